#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cournot/model.hpp"

namespace cournot {

/// Network plus market parameters, as read from an instance document:
///
///   { "nodes": [{"a": 10, "b": 1.2, "c": 1}, ...],
///     "lines": [{"from": 0, "to": 1, "capacity": 2, "susceptance": 1}, ...],
///     "slack": 1,             // optional, defaults to the last node
///     "H": [[1, 0]] }         // optional, overrides the computed shift factors
///
/// Node indices are 0-based. A missing or null capacity means the line is
/// unconstrained.
struct Instance {
  NetworkModel network;
  MarketParams params;
  std::vector<Line> lines;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Instance parse_instance(const nlohmann::json& doc);
Instance load_instance(const std::filesystem::path& path);
nlohmann::json to_json(const Instance& instance);

}  // namespace cournot
