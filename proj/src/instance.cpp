#include "cournot/instance.hpp"

#include <cmath>
#include <fstream>

namespace cournot {

namespace {

double number_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw InstanceError(where + ": missing numeric field '" + key + "'");
  }
  return obj.at(key).get<double>();
}

std::size_t index_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer() || obj.at(key).get<long long>() < 0) {
    throw InstanceError(where + ": field '" + std::string(key) +
                        "' must be a nonnegative integer node index");
  }
  return obj.at(key).get<std::size_t>();
}

}  // namespace

Instance parse_instance(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InstanceError("instance must be a JSON object");
  if (!doc.contains("nodes") || !doc.at("nodes").is_array() || doc.at("nodes").empty()) {
    throw InstanceError("instance needs a nonempty 'nodes' array");
  }
  const auto& nodes = doc.at("nodes");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Vector a(n), b(n), c(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::string where = "nodes[" + std::to_string(k) + "]";
    const auto& node = nodes.at(static_cast<std::size_t>(k));
    a[k] = number_field(node, "a", where);
    b[k] = number_field(node, "b", where);
    c[k] = number_field(node, "c", where);
  }

  std::vector<Line> lines;
  if (doc.contains("lines")) {
    if (!doc.at("lines").is_array()) throw InstanceError("'lines' must be an array");
    for (std::size_t l = 0; l < doc.at("lines").size(); ++l) {
      const auto& item = doc.at("lines").at(l);
      const std::string where = "lines[" + std::to_string(l) + "]";
      Line line;
      line.from = index_field(item, "from", where);
      line.to = index_field(item, "to", where);
      if (item.contains("susceptance")) line.susceptance = number_field(item, "susceptance", where);
      if (item.contains("capacity") && !item.at("capacity").is_null()) {
        line.capacity = number_field(item, "capacity", where);
      }
      lines.push_back(line);
    }
  }

  try {
    MarketParams params(std::move(a), std::move(b), std::move(c));
    const std::size_t slack =
        doc.contains("slack") ? index_field(doc, "slack", "instance") : params.nodes() - 1;

    Vector f(static_cast<Eigen::Index>(lines.size()));
    for (std::size_t l = 0; l < lines.size(); ++l) f[static_cast<Eigen::Index>(l)] = lines[l].capacity;

    if (doc.contains("H")) {
      const auto& rows = doc.at("H");
      if (!rows.is_array() || rows.size() != lines.size()) {
        throw InstanceError("'H' must have one row per line");
      }
      Matrix h(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(params.nodes()));
      for (std::size_t l = 0; l < rows.size(); ++l) {
        const auto& row = rows.at(l);
        if (!row.is_array() || row.size() != params.nodes()) {
          throw InstanceError("'H' row " + std::to_string(l) + " must have one entry per node");
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
          if (!row.at(k).is_number()) throw InstanceError("'H' entries must be numbers");
          h(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = row.at(k).get<double>();
        }
      }
      return Instance{NetworkModel(std::move(h), std::move(f)), std::move(params), std::move(lines)};
    }
    NetworkModel net = NetworkModel::from_lines(params.nodes(), lines, slack);
    return Instance{std::move(net), std::move(params), std::move(lines)};
  } catch (const std::logic_error& e) {
    throw InstanceError(e.what());
  }
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open instance file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_instance(doc);
}

nlohmann::json to_json(const Instance& instance) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < instance.params.nodes(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    doc["nodes"].push_back(
        {{"a", instance.params.a[i]}, {"b", instance.params.b[i]}, {"c", instance.params.c[i]}});
  }
  doc["lines"] = nlohmann::json::array();
  for (const Line& line : instance.lines) {
    nlohmann::json item = {{"from", line.from}, {"to", line.to}, {"susceptance", line.susceptance}};
    item["capacity"] = std::isinf(line.capacity) ? nlohmann::json(nullptr) : nlohmann::json(line.capacity);
    doc["lines"].push_back(item);
  }
  const Matrix& h = instance.network.shift_factors();
  doc["H"] = nlohmann::json::array();
  for (Eigen::Index l = 0; l < h.rows(); ++l) {
    std::vector<double> row;
    for (Eigen::Index k = 0; k < h.cols(); ++k) row.push_back(h(l, k));
    doc["H"].push_back(row);
  }
  return doc;
}

}  // namespace cournot
