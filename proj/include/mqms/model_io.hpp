#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include <json.hpp>

#include "mqms/capacity_region.hpp"
#include "mqms/channel_model.hpp"
#include "mqms/fluid_region.hpp"
#include "mqms/simulator.hpp"

namespace mqms::io {

using Json = nlohmann::ordered_json;

using AnyChannelModel = std::variant<DiscreteChannelModel, ContinuousChannelModel>;

// Reads and parses a JSON file; missing files and syntax errors raise ModelError.
nlohmann::json load_json(const std::filesystem::path& path);

/**
 * Model descriptor:
 *   {"N": 2, "K": 1, "kind": "bernoulli", "p": [[0.5], [0.5]]}
 *   {"N": 1, "K": 2, "kind": "factored", "M": 2, "pmf": [[[0.2, 0.3, 0.5], [1, 0, 0]]]}
 *   {"N": 2, "K": 1, "kind": "explicit_joint", "M": 2,
 *    "states": [{"C": [[2], [1]], "prob": 0.4}, ...]}
 *   {"N": 2, "K": 1, "kind": "continuous",
 *    "links": [[{"dist": "exponential", "mean": 2}], [{"dist": "uniform", "b": 1}]]}
 * Matrices are row-major nested arrays (row n = queue n). Empirical links use
 * {"dist": "empirical", "values": [...]}. "M" of explicit_joint defaults to the
 * largest listed capacity.
 */
AnyChannelModel parse_model(const nlohmann::json& j);
DiscreteChannelModel parse_discrete_model(const nlohmann::json& j);
ContinuousChannelModel parse_continuous_model(const nlohmann::json& j);

/**
 * Arrivals descriptor, one entry per queue:
 *   {"queues": [{"type": "bernoulli_batch", "q": 0.3, "B": 1},
 *               {"type": "deterministic", "rate": 0.4},
 *               {"type": "pmf", "pmf": [0.5, 0.3, 0.2]}]}
 */
ArrivalModel parse_arrivals(const nlohmann::json& j);

// Rounds to 12 significant digits so emitted JSON is stable and diff-able.
double round12(double v);
// printf("%.12g")
std::string format12(double v);

Json region_to_json(const StabilityRegion& region);
// One row per inequality: alpha_1,...,alpha_N,beta (with header row).
std::string region_to_csv(const StabilityRegion& region);

Json vhat_to_json(int queues, int max_capacity, const std::vector<AlphaVector>& vhat);

}  // namespace mqms::io
