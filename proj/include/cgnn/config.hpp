#pragma once

// Run configuration: every TrainConfig field plus dataset/output paths and
// sweep settings, read from a flat JSON object. Unknown keys are rejected and
// relative paths resolve against the directory holding the config file.

#include "cgnn/core.hpp"
#include "cgnn/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace cgnn {

struct RunConfig {
  TrainConfig train;
  std::filesystem::path dataset_path;
  std::filesystem::path output_dir = "out";
  std::vector<Variant> variants;  // sweep-time; empty means {train.variant}
  std::vector<double> t_list;     // sweep-time / mem-report
  std::vector<std::uint64_t> seeds;  // sweep-time; empty means {train.seed}
};

namespace detail {

inline SolverMethod parse_solver(const std::string& s) {
  if (s == "rk4") return SolverMethod::FixedRk4;
  if (s == "dopri5") return SolverMethod::AdaptiveRk45;
  throw ParseError("unknown solver '" + s + "' (expected rk4 or dopri5)");
}

inline std::string solver_name(SolverMethod m) { return m == SolverMethod::FixedRk4 ? "rk4" : "dopri5"; }

}  // namespace detail

inline nlohmann::json to_json(const RunConfig& rc) {
  const TrainConfig& c = rc.train;
  nlohmann::json j = {
      {"lr", c.lr},
      {"optimizer", to_string(c.optimizer)},
      {"weight_decay", c.weight_decay},
      {"dropout", c.dropout},
      {"decoder_dropout", c.decoder_dropout},
      {"epochs", c.epochs},
      {"beta", c.beta},
      {"t1", c.t1},
      {"seed", c.seed},
      {"variant", to_string(c.variant)},
      {"hidden", c.hidden},
      {"alpha_init", c.alpha_init},
      {"gamma", c.gamma},
      {"per_node_alpha", c.per_node_alpha},
      {"augment", c.augment},
      {"encoder_relu", c.encoder_relu},
      {"row_normalize", c.row_normalize},
      {"solver", detail::solver_name(c.solver)},
      {"solver_steps", c.solver_steps},
      {"rtol", c.rtol},
      {"atol", c.atol},
      {"discrete_steps", c.discrete_steps},
      {"dataset_path", rc.dataset_path.string()},
      {"output_dir", rc.output_dir.string()},
      {"t_list", rc.t_list},
      {"seeds", rc.seeds},
  };
  std::vector<std::string> vs;
  for (Variant v : rc.variants) vs.push_back(to_string(v));
  j["variants"] = vs;
  return j;
}

/// Parses a flat JSON object. `base` is the directory relative paths resolve
/// against.
inline RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  static const std::set<std::string> known = {
      "lr",       "optimizer",   "weight_decay",   "dropout",      "decoder_dropout", "epochs",
      "beta",     "t1",          "seed",           "variant",      "hidden",          "alpha_init",
      "gamma",    "per_node_alpha", "augment",     "encoder_relu", "row_normalize",   "solver",
      "solver_steps", "rtol",    "atol",           "discrete_steps", "dataset_path",  "output_dir",
      "variants", "t_list",      "seeds"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ParseError("config: unknown key '" + key + "'");
  }

  RunConfig rc;
  TrainConfig& c = rc.train;
  try {
    auto get = [&](const char* key, auto& dst) {
      if (j.contains(key)) j.at(key).get_to(dst);
    };
    get("lr", c.lr);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    get("weight_decay", c.weight_decay);
    get("dropout", c.dropout);
    get("decoder_dropout", c.decoder_dropout);
    get("epochs", c.epochs);
    get("beta", c.beta);
    get("t1", c.t1);
    get("seed", c.seed);
    if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
    get("hidden", c.hidden);
    get("alpha_init", c.alpha_init);
    get("gamma", c.gamma);
    get("per_node_alpha", c.per_node_alpha);
    get("augment", c.augment);
    get("encoder_relu", c.encoder_relu);
    get("row_normalize", c.row_normalize);
    if (j.contains("solver")) c.solver = detail::parse_solver(j.at("solver").get<std::string>());
    get("solver_steps", c.solver_steps);
    get("rtol", c.rtol);
    get("atol", c.atol);
    get("discrete_steps", c.discrete_steps);
    if (j.contains("dataset_path")) rc.dataset_path = j.at("dataset_path").get<std::string>();
    if (j.contains("output_dir")) rc.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("variants")) {
      for (const auto& v : j.at("variants")) rc.variants.push_back(parse_variant(v.get<std::string>()));
    }
    get("t_list", rc.t_list);
    get("seeds", rc.seeds);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!rc.dataset_path.empty() && rc.dataset_path.is_relative()) rc.dataset_path = base / rc.dataset_path;
  if (rc.output_dir.is_relative()) rc.output_dir = base / rc.output_dir;
  c.validate();
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

}  // namespace cgnn
