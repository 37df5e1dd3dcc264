#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hypflow {

// One experiment result: a line of the .jsonl result file. The payload is
// deterministic for a fixed (config, seed); wall time lives outside it.
struct ResultRecord {
  std::string version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string experiment;
  double wall_ms = 0.0;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
};

// Append-only writer; record emission is serialized through one writer.
class RecordWriter {
 public:
  explicit RecordWriter(const std::string& path);
  void write(const ResultRecord& record);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::mutex mutex_;
};

std::vector<ResultRecord> read_records_file(const std::string& path);
std::vector<ResultRecord> read_records_dir(const std::string& dir);

}  // namespace hypflow
