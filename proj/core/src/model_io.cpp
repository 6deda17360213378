#include "treeffuse/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace treeffuse {

namespace {

using nlohmann::json;

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back(json::array({n.feature, n.threshold_bin,
                                 n.missing_left ? 1 : 0, n.left, n.right,
                                 n.value}));
  }
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& rec : j) {
    TreeNode n;
    n.feature = rec.at(0).get<int>();
    n.threshold_bin = rec.at(1).get<int>();
    n.missing_left = rec.at(2).get<int>() != 0;
    n.left = rec.at(3).get<int>();
    n.right = rec.at(4).get<int>();
    n.value = rec.at(5).get<double>();
    t.nodes.push_back(n);
  }
  return t;
}

json ensemble_to_json(const GbtEnsemble& e) {
  json j;
  j["base_score"] = e.base_score;
  j["learning_rate"] = e.learning_rate;
  j["bin_edges"] = e.bin_map.edges;
  json trees = json::array();
  for (const auto& t : e.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j;
}

GbtEnsemble ensemble_from_json(const json& j) {
  GbtEnsemble e;
  e.base_score = j.at("base_score").get<double>();
  e.learning_rate = j.at("learning_rate").get<double>();
  e.bin_map.edges = j.at("bin_edges").get<std::vector<std::vector<double>>>();
  for (const auto& t : j.at("trees")) e.trees.push_back(tree_from_json(t));
  return e;
}

}  // namespace

std::string serialize_model(const TreeffuserModel& m) {
  json j;
  j["magic"] = kModelMagic;
  j["version"] = kModelVersion;
  j["d_x"] = m.d_x;
  j["d_y"] = m.d_y;
  j["scale_noise"] = m.scale_noise;
  j["sde"] = {{"alpha_min", m.sde.alpha_min},
              {"alpha_max", m.sde.alpha_max},
              {"horizon", m.sde.horizon}};
  j["scaler"] = {{"means", m.scaler.means}, {"scales", m.scaler.scales}};
  json ens = json::array();
  for (const auto& e : m.ensembles) ens.push_back(ensemble_to_json(e));
  j["ensembles"] = std::move(ens);
  return j.dump();
}

TreeffuserModel deserialize_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") +
                          e.what());
  }
  if (!j.contains("magic") || j.at("magic") != kModelMagic)
    throw ValidationError("not a model file (bad magic)");
  if (!j.contains("version") || j.at("version").get<int>() != kModelVersion)
    throw ValidationError("unsupported model file version");

  TreeffuserModel m;
  m.d_x = j.at("d_x").get<std::size_t>();
  m.d_y = j.at("d_y").get<std::size_t>();
  m.scale_noise = j.at("scale_noise").get<bool>();
  m.sde.alpha_min = j.at("sde").at("alpha_min").get<double>();
  m.sde.alpha_max = j.at("sde").at("alpha_max").get<double>();
  m.sde.horizon = j.at("sde").at("horizon").get<double>();
  m.scaler.means = j.at("scaler").at("means").get<std::vector<double>>();
  m.scaler.scales = j.at("scaler").at("scales").get<std::vector<double>>();
  for (const auto& e : j.at("ensembles"))
    m.ensembles.push_back(ensemble_from_json(e));
  if (m.ensembles.size() != m.d_y)
    throw ValidationError("model file: ensemble count does not match d_y");
  return m;
}

void save_model(const TreeffuserModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << serialize_model(m);
}

TreeffuserModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace treeffuse
