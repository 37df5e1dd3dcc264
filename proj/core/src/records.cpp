#include "hypflow/records.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace hypflow {

using nlohmann::json;

json ResultRecord::to_json() const {
  json j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["experiment"] = experiment;
  j["wall_ms"] = wall_ms;
  j["payload"] = payload;
  return j;
}

ResultRecord ResultRecord::from_json(const json& j) {
  ResultRecord r;
  r.version = j.at("version").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.experiment = j.at("experiment").get<std::string>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.payload = j.at("payload");
  return r;
}

RecordWriter::RecordWriter(const std::string& path) : path_(path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

void RecordWriter::write(const ResultRecord& record) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open result file '" + path_ + "'");
  out << record.to_json().dump() << '\n';
}

std::vector<ResultRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read result file '" + path + "'");
  std::vector<ResultRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(ResultRecord::from_json(json::parse(line)));
  }
  return out;
}

std::vector<ResultRecord> read_records_dir(const std::string& dir) {
  std::vector<ResultRecord> out;
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("result directory '" + dir + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto piece = read_records_file(f.string());
    out.insert(out.end(), piece.begin(), piece.end());
  }
  return out;
}

}  // namespace hypflow
