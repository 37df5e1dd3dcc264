#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "hypflow/cylinder.hpp"
#include "hypflow/group.hpp"
#include "hypflow/walk.hpp"

namespace hypflow {

// Validation failure with the offending field path, surfaced verbatim by the
// CLI (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Parsed, schema-validated experiment configuration.
class Config {
 public:
  static Config load_file(const std::string& path);
  static Config from_json_text(const std::string& text);

  GroupModel build_model() const;
  StepDistribution build_mu(const GroupModel& model) const;

  const std::string& experiment() const { return experiment_; }
  std::uint64_t seed() const { return seed_; }
  void override_seed(std::uint64_t seed) { seed_ = seed; }
  const std::string& out_dir() const { return out_dir_; }
  void override_out_dir(std::string dir) { out_dir_ = std::move(dir); }
  int threads() const { return threads_; }
  void override_threads(int threads) { threads_ = threads; }
  double undecided_max() const { return undecided_max_; }

  const nlohmann::json& params() const;
  const nlohmann::json& raw() const;

  // Hash over the semantic fields (model, mu, experiment, params, seed,
  // version); the output directory does not participate.
  std::string hash() const;

 private:
  Config();
  std::shared_ptr<nlohmann::json> doc_;
  std::string experiment_;
  std::uint64_t seed_ = 1;
  std::string out_dir_ = "results";
  int threads_ = 0;
  double undecided_max_ = 0.05;
};

// Word / boundary-set literal helpers shared by config parsing and tests.
BoundarySet parse_boundary_set(const GroupModel& model, const nlohmann::json& spec);
Rectangle parse_rectangle(const GroupModel& model, const nlohmann::json& spec);

}  // namespace hypflow
