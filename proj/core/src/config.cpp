#include "hypflow/config.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hypflow {

namespace {

using nlohmann::json;

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(where + "." + key, "required field missing");
  }
  return obj.at(key);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Config::Config() : doc_(std::make_shared<json>()) {}

Config Config::from_json_text(const std::string& text) {
  Config cfg;
  try {
    *cfg.doc_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("(document)", std::string("invalid JSON: ") + e.what());
  }
  const json& doc = *cfg.doc_;
  if (!doc.is_object()) throw ConfigError("(document)", "config must be an object");
  if (doc.contains("version")) {
    if (!doc.at("version").is_number_integer()) {
      throw ConfigError("version", "must be an integer");
    }
    if (doc.at("version").get<int>() != 1) {
      throw ConfigError("version", "unsupported schema version (expected 1)");
    }
  }
  const json& exp = need(doc, "experiment", "(config)");
  if (!exp.is_string()) throw ConfigError("experiment", "must be a string");
  cfg.experiment_ = exp.get<std::string>();
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw ConfigError("seed", "must be a non-negative integer");
    }
    cfg.seed_ = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("out")) cfg.out_dir_ = doc.at("out").get<std::string>();
  if (doc.contains("threads")) cfg.threads_ = doc.at("threads").get<int>();
  if (doc.contains("undecided_max")) {
    cfg.undecided_max_ = doc.at("undecided_max").get<double>();
  }
  // Eagerly validate the model and step distribution so schema errors carry
  // field names instead of surfacing later inside an estimator.
  const GroupModel model = cfg.build_model();
  (void)cfg.build_mu(model);
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("(file)", "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

GroupModel Config::build_model() const {
  const json& doc = *doc_;
  const json& spec = need(doc, "model", "(config)");
  const json& kind = need(spec, "kind", "model");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "free") {
      return GroupModel::free_group(need(spec, "rank", "model").get<int>());
    }
    if (k == "free_product") {
      return GroupModel::free_product(
          need(spec, "orders", "model").get<std::vector<int>>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  throw ConfigError("model.kind", "unknown model kind '" + k + "'");
}

StepDistribution Config::build_mu(const GroupModel& model) const {
  const json& doc = *doc_;
  if (!doc.contains("mu") || doc.at("mu").is_null() ||
      (doc.at("mu").is_string() && doc.at("mu") == "uniform")) {
    return StepDistribution::uniform(model);
  }
  const json& mu = doc.at("mu");
  const json& weights = need(mu, "weights", "mu");
  if (!weights.is_object()) {
    throw ConfigError("mu.weights", "must map generator tokens to weights");
  }
  std::vector<double> w(model.alphabet_size(), -1.0);
  for (const auto& [token, value] : weights.items()) {
    Letter c;
    try {
      c = model.alphabet().parse_token(token);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mu.weights." + token, e.what());
    }
    w[c] = value.get<double>();
  }
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] < 0.0) {
      throw ConfigError("mu.weights",
                        "missing weight for generator '" +
                            model.format_word(Word{{static_cast<Letter>(c)}}) + "'");
    }
  }
  try {
    return StepDistribution::from_weights(model, std::move(w));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mu.weights", e.what());
  }
}

const nlohmann::json& Config::params() const {
  static const json empty = json::object();
  if (!doc_->contains("params")) return empty;
  return doc_->at("params");
}

const nlohmann::json& Config::raw() const { return *doc_; }

std::string Config::hash() const {
  json semantic = json::object();
  semantic["version"] = doc_->contains("version") ? doc_->at("version") : json(1);
  semantic["model"] = doc_->at("model");
  semantic["mu"] = doc_->contains("mu") ? doc_->at("mu") : json("uniform");
  semantic["experiment"] = experiment_;
  semantic["params"] = params();
  semantic["seed"] = seed_;
  // nlohmann objects serialize with sorted keys: the dump is canonical.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(semantic.dump())));
  return std::string(buf);
}

BoundarySet parse_boundary_set(const GroupModel& model, const nlohmann::json& spec) {
  BoundarySet out;
  auto add_part = [&](const json& part) {
    if (part.is_string()) {
      out.parts.push_back(BranchSet::cyl(model.parse_word(part.get<std::string>())));
    } else if (part.is_object() && part.contains("cyl")) {
      out.parts.push_back(
          BranchSet::cyl(model.parse_word(part.at("cyl").get<std::string>())));
    } else if (part.is_object() && part.contains("cocyl")) {
      out.parts.push_back(
          BranchSet::cocyl(model.parse_word(part.at("cocyl").get<std::string>())));
    } else {
      throw ConfigError("rectangle", "boundary part must be a word or {cyl|cocyl}");
    }
  };
  if (spec.is_array()) {
    for (const auto& part : spec) add_part(part);
  } else {
    add_part(spec);
  }
  return out;
}

Rectangle parse_rectangle(const GroupModel& model, const nlohmann::json& spec) {
  Rectangle rect;
  rect.fwd = parse_boundary_set(model, need(spec, "fwd", "rectangle"));
  rect.bwd = parse_boundary_set(model, need(spec, "bwd", "rectangle"));
  validate_rectangle(model, rect);
  return rect;
}

}  // namespace hypflow
