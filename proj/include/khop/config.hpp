#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <yaml-cpp/yaml.h>

#include "khop/experiments.hpp"

namespace khop {

// Experiment config file: YAML mapping with the ExperimentConfig fields.
// Keys not present keep the defaults of the experiment kind, e.g.
//
//   kind: compare
//   n: [100]
//   loads: [0.5, 1.0, 2.0, 3.0, 5.0]
//   similarities: [0.6]
//   rules: [klr, krr]
//   scalings: [2.0]            # gamma = c / N
//   scaling_per_n: {250: 2.0}  # optional per-N override of `scalings`
//   lambdas: [0.01]
//   seeds: [1, 2, 3, 4, 5]
//   trials_per_pattern: 5
//   max_steps: 30
//   learn: {beta: 0.1, m_updates: 200}
//   workers: 0                 # 0 = hardware concurrency
//   allow_large: false         # required for N >= 500
inline ExperimentConfig config_from_yaml(const YAML::Node& root, std::optional<ExperimentKind> kind_override = {}) {
  if (!root.IsMap()) throw std::invalid_argument("config: top level must be a mapping");
  ExperimentKind kind = ExperimentKind::landscape;
  if (kind_override) {
    kind = *kind_override;
  } else if (root["kind"]) {
    kind = parse_kind(root["kind"].as<std::string>());
  }
  ExperimentConfig c = default_config(kind);
  try {
    if (root["n"]) c.n = root["n"].IsSequence() ? root["n"].as<std::vector<std::size_t>>()
                                               : std::vector<std::size_t>{root["n"].as<std::size_t>()};
    if (root["loads"]) c.loads = root["loads"].as<std::vector<double>>();
    if (root["similarities"]) c.similarities = root["similarities"].as<std::vector<double>>();
    if (root["rules"]) {
      c.rules.clear();
      for (const auto& r : root["rules"]) c.rules.push_back(parse_rule(r.as<std::string>()));
    }
    if (root["scalings"]) c.scalings = root["scalings"].as<std::vector<double>>();
    if (root["scaling_per_n"]) c.scaling_per_n = root["scaling_per_n"].as<std::map<std::size_t, double>>();
    if (root["lambdas"]) c.lambdas = root["lambdas"].as<std::vector<double>>();
    if (root["seeds"]) c.seeds = root["seeds"].as<std::vector<std::uint64_t>>();
    if (root["trials_per_pattern"]) c.trials_per_pattern = root["trials_per_pattern"].as<std::size_t>();
    if (root["max_steps"]) c.dyn.max_steps = root["max_steps"].as<std::size_t>();
    if (const auto learn = root["learn"]) {
      if (learn["beta"]) c.learn.beta = learn["beta"].as<double>();
      if (learn["m_updates"]) c.learn.m_updates = learn["m_updates"].as<std::size_t>();
    }
    if (root["workers"]) c.workers = root["workers"].as<std::size_t>();
    if (root["allow_large"]) c.allow_large = root["allow_large"].as<bool>();
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> kind = {}) {
  try {
    return config_from_yaml(YAML::Load(text), kind);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path, std::optional<ExperimentKind> kind = {}) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), kind);
}

// Lossless YAML echo: doubles carry 17 significant digits.
inline std::string config_to_yaml(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(c.kind));
  out << YAML::Key << "n" << YAML::Value << YAML::Flow << c.n;
  out << YAML::Key << "loads" << YAML::Value << YAML::Flow << c.loads;
  out << YAML::Key << "similarities" << YAML::Value << YAML::Flow << c.similarities;
  out << YAML::Key << "rules" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto r : c.rules) out << std::string(to_string(r));
  out << YAML::EndSeq;
  out << YAML::Key << "scalings" << YAML::Value << YAML::Flow << c.scalings;
  out << YAML::Key << "scaling_per_n" << YAML::Value << YAML::Flow << YAML::BeginMap;
  for (const auto& [nn, x] : c.scaling_per_n) out << YAML::Key << nn << YAML::Value << x;
  out << YAML::EndMap;
  out << YAML::Key << "lambdas" << YAML::Value << YAML::Flow << c.lambdas;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds;
  out << YAML::Key << "trials_per_pattern" << YAML::Value << c.trials_per_pattern;
  out << YAML::Key << "max_steps" << YAML::Value << c.dyn.max_steps;
  out << YAML::Key << "learn" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "beta" << YAML::Value << c.learn.beta;
  out << YAML::Key << "m_updates" << YAML::Value << c.learn.m_updates;
  out << YAML::EndMap;
  out << YAML::Key << "workers" << YAML::Value << c.workers;
  out << YAML::Key << "allow_large" << YAML::Value << c.allow_large;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace khop
