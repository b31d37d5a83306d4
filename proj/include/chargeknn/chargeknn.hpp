#ifndef CHARGEKNN_CHARGEKNN_HPP_
#define CHARGEKNN_CHARGEKNN_HPP_

#include <chargeknn/baselines.hpp>
#include <chargeknn/decimal.hpp>
#include <chargeknn/diffusion.hpp>
#include <chargeknn/distsim.hpp>
#include <chargeknn/engine.hpp>
#include <chargeknn/graph.hpp>

#endif // CHARGEKNN_CHARGEKNN_HPP_
