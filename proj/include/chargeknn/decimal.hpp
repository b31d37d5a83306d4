#ifndef CHARGEKNN_DECIMAL_HPP_
#define CHARGEKNN_DECIMAL_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace chargeknn {

/**
 * Exact decimal value mantissa * 10^exponent, kept in canonical form
 * (mantissa has no trailing zero digit, zero is {0, 0}).
 *
 * Edge weights are stored this way so that out-weight normalisation can be
 * carried out in exact rational arithmetic. A weight file whose weights are
 * all multiplied by the same decimal constant then yields exactly the same
 * transition shares, and hence bitwise identical diffusion runs.
 */
struct Decimal {
    std::int64_t mantissa = 0;
    std::int32_t exponent = 0;

    /// Maximum number of significant digits a weight may carry.
    static constexpr int kMaxDigits = 18;

    static Decimal one() { return Decimal{1, 0}; }

    /// Parses `[+-]digits[.digits][(e|E)[+-]digits]`. Returns nullopt on
    /// malformed input or when the value has more than kMaxDigits
    /// significant digits.
    static std::optional<Decimal> parse(std::string_view text) {
        std::size_t pos = 0;
        bool negative = false;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            negative = text[pos] == '-';
            ++pos;
        }
        std::string digits;
        long long exp = 0;
        bool seen_digit = false;
        bool seen_point = false;
        for (; pos < text.size(); ++pos) {
            const char c = text[pos];
            if (c >= '0' && c <= '9') {
                seen_digit = true;
                if (!(digits.empty() && c == '0'))
                    digits.push_back(c);
                if (seen_point)
                    --exp;
            } else if (c == '.' && !seen_point) {
                seen_point = true;
            } else {
                break;
            }
        }
        if (!seen_digit)
            return std::nullopt;
        if (pos < text.size()) {
            if (text[pos] != 'e' && text[pos] != 'E')
                return std::nullopt;
            ++pos;
            int exp_part = 0;
            const char* first = text.data() + pos;
            const char* last = text.data() + text.size();
            if (first != last && *first == '+')
                ++first;
            auto [ptr, ec] = std::from_chars(first, last, exp_part);
            if (ec != std::errc{} || ptr != last)
                return std::nullopt;
            exp += exp_part;
        }
        if (digits.empty())
            return Decimal{};
        while (digits.size() > 1 && digits.back() == '0') {
            digits.pop_back();
            ++exp;
        }
        // Leading zeros after the point were dropped above but still
        // shifted exp, so exp already reflects the value.
        if (static_cast<int>(digits.size()) > kMaxDigits)
            return std::nullopt;
        if (exp < -100000 || exp > 100000)
            return std::nullopt;
        std::int64_t m = 0;
        for (char c : digits)
            m = m * 10 + (c - '0');
        return Decimal{negative ? -m : m, static_cast<std::int32_t>(exp)};
    }

    /// Shortest decimal that round-trips to `value`.
    static Decimal from_double(double value) {
        if (!std::isfinite(value))
            throw std::invalid_argument("weight must be finite");
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
        auto parsed = parse(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
        if (ec != std::errc{} || !parsed)
            throw std::invalid_argument("cannot represent weight exactly");
        return *parsed;
    }

    bool positive() const { return mantissa > 0; }

    double to_double() const {
        const std::string s = std::to_string(mantissa) + "e" + std::to_string(exponent);
        double out = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), out);
        return out;
    }

    /// Plain notation for moderate exponents, scientific otherwise.
    std::string to_string() const {
        if (mantissa == 0)
            return "0";
        std::string sign = mantissa < 0 ? "-" : "";
        std::string digits = std::to_string(mantissa < 0 ? -mantissa : mantissa);
        const long len = static_cast<long>(digits.size());
        if (exponent >= 0 && exponent <= 6)
            return sign + digits + std::string(static_cast<std::size_t>(exponent), '0');
        if (exponent < 0 && -exponent < len)
            return sign + digits.substr(0, static_cast<std::size_t>(len + exponent)) + "." +
                   digits.substr(static_cast<std::size_t>(len + exponent));
        if (exponent < 0 && -exponent - len <= 6)
            return sign + "0." + std::string(static_cast<std::size_t>(-exponent - len), '0') +
                   digits;
        return sign + digits + "e" + std::to_string(exponent);
    }

    friend bool operator==(const Decimal&, const Decimal&) = default;
};

namespace detail {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt pow10(std::int64_t k) {
    BigInt r = 1;
    BigInt base = 10;
    while (k > 0) {
        if (k & 1)
            r *= base;
        base *= base;
        k >>= 1;
    }
    return r;
}

/// Nearest double (ties to even) to num/den for positive integers.
inline double nearest_double(const BigInt& num, const BigInt& den) {
    if (num == 0)
        return 0.0;
    long shift = 52 - (static_cast<long>(boost::multiprecision::msb(num)) -
                       static_cast<long>(boost::multiprecision::msb(den)));
    const BigInt lo = BigInt(1) << 52;
    const BigInt hi = BigInt(1) << 53;
    BigInt q, r;
    for (;;) {
        BigInt n = num, d = den;
        if (shift >= 0)
            n <<= static_cast<unsigned>(shift);
        else
            d <<= static_cast<unsigned>(-shift);
        boost::multiprecision::divide_qr(n, d, q, r);
        if (q < lo) {
            ++shift;
            continue;
        }
        if (q >= hi) {
            --shift;
            continue;
        }
        const BigInt twice = r * 2;
        if (twice > d || (twice == d && (q & 1) != 0))
            ++q;
        break;
    }
    if (q == hi) {
        q = lo;
        --shift;
    }
    return std::ldexp(q.convert_to<double>(), static_cast<int>(-shift));
}

/// Exact weights scaled to a common exponent, as integers.
inline std::vector<BigInt> common_scale(const std::vector<Decimal>& ws) {
    std::int32_t lowest = 0;
    bool first = true;
    for (const auto& w : ws) {
        if (first || w.exponent < lowest)
            lowest = w.exponent;
        first = false;
    }
    std::vector<BigInt> out;
    out.reserve(ws.size());
    for (const auto& w : ws)
        out.push_back(BigInt(w.mantissa) * pow10(static_cast<std::int64_t>(w.exponent) - lowest));
    return out;
}

} // namespace detail

} // namespace chargeknn

#endif // CHARGEKNN_DECIMAL_HPP_
