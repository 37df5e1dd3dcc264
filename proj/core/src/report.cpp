#include "hypflow/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hypflow/records.hpp"
#include "hypflow/runner.hpp"

namespace hypflow {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// Flattens one payload row into label -> printable cell. Flat numeric
// arrays (curve grids, estimates, standard errors) print inline; nested
// structures stay in the JSON record only.
std::map<std::string, std::string> flatten(const json& row) {
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : row.items()) {
    if (value.is_number_float()) {
      out[key] = fmt(value.get<double>());
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      out[key] = value.dump();
    } else if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_boolean()) {
      out[key] = value.get<bool>() ? "true" : "false";
    } else if (key == "rect") {
      out[key] = value.dump();
    } else if (value.is_array() && !value.empty() && value[0].is_number() &&
               value.size() <= 16) {
      std::string cell;
      for (const auto& v : value) {
        if (!cell.empty()) cell += ' ';
        cell += v.is_number_float() ? fmt(v.get<double>()) : v.dump();
      }
      out[key] = cell;
    }
  }
  return out;
}

void print_table(std::ostream& out, const std::string& title,
                 const std::vector<std::map<std::string, std::string>>& rows) {
  out << "== " << title << " ==\n";
  if (rows.empty()) {
    out << "(no rows)\n\n";
    return;
  }
  std::vector<std::string> cols;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    for (const auto& [k, _] : r) {
      if (seen.insert(k).second) cols.push_back(k);
    }
  }
  std::vector<std::size_t> width(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    width[c] = cols[c].size();
    for (const auto& r : rows) {
      auto it = r.find(cols[c]);
      if (it != r.end()) width[c] = std::max(width[c], it->second.size());
    }
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out << std::left << std::setw(static_cast<int>(width[c]) + 2) << cols[c];
  }
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto it = r.find(cols[c]);
      out << std::left << std::setw(static_cast<int>(width[c]) + 2)
          << (it != r.end() ? it->second : "-");
    }
    out << "\n";
  }
  out << "\n";
}

void write_csv(const std::string& path,
               const std::vector<std::map<std::string, std::string>>& rows) {
  if (rows.empty()) return;
  std::vector<std::string> cols;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    for (const auto& [k, _] : r) {
      if (seen.insert(k).second) cols.push_back(k);
    }
  }
  std::sort(cols.begin(), cols.end());  // documented column order: sorted names
  std::ofstream out(path);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out << (c ? "," : "") << cols[c];
  }
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto it = r.find(cols[c]);
      out << (c ? "," : "");
      if (it != r.end()) {
        std::string cell = it->second;
        if (cell.find(',') != std::string::npos) cell = "\"" + cell + "\"";
        out << cell;
      }
    }
    out << "\n";
  }
}

// Minimal log-scale polyline plot of exceedance curves.
void write_curve_svg(const std::string& path, const json& rows) {
  const double w = 640, h = 420, ml = 60, mb = 40;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
      << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  double xmax = 1e-9, ymin = 0.0;
  for (const auto& row : rows) {
    if (!row.contains("grid")) continue;
    for (double x : row.at("grid").get<std::vector<double>>()) xmax = std::max(xmax, x);
    for (double p : row.at("estimates").get<std::vector<double>>()) {
      if (p > 0) ymin = std::min(ymin, std::log(p));
    }
  }
  if (ymin == 0.0) ymin = -1.0;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  int ci = 0;
  for (const auto& row : rows) {
    if (!row.contains("grid")) continue;
    const auto grid = row.at("grid").get<std::vector<double>>();
    const auto est = row.at("estimates").get<std::vector<double>>();
    std::ostringstream pts;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (est[i] <= 0) continue;
      const double x = ml + (w - ml - 10) * grid[i] / xmax;
      const double y = 10 + (h - mb - 10) * (std::log(est[i]) / ymin);
      pts << x << "," << y << " ";
    }
    svg << "<polyline fill='none' stroke='" << colors[ci % 5]
        << "' stroke-width='1.5' points='" << pts.str() << "'/>\n";
    ++ci;
  }
  svg << "<line x1='" << ml << "' y1='10' x2='" << ml << "' y2='" << h - mb
      << "' stroke='black'/>\n"
      << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - 10
      << "' y2='" << h - mb << "' stroke='black'/>\n"
      << "<text x='" << w / 2 << "' y='" << h - 8
      << "' font-size='12'>D (green units)</text>\n"
      << "<text x='8' y='" << h / 2 << "' font-size='12'>log P</text>\n</svg>\n";
  std::ofstream out(path);
  out << svg.str();
}

struct Verdict {
  std::string name;
  bool pass;
  std::string detail;
};

void theorem_checks(const std::string& experiment, const json& payload,
                    std::vector<Verdict>& verdicts) {
  if (experiment == "deviation.curve" || experiment == "deviation.conditional") {
    for (const auto& row : payload.at("rows")) {
      const double slope = row.at("slope").get<double>();
      const bool ok = std::abs(slope + 1.0) <= 0.15;
      verdicts.push_back({experiment + " slope=-1±0.15", ok, fmt(slope)});
    }
  } else if (experiment == "boundary.shadow_band") {
    const double band = payload.at("band_ratio").get<double>();
    verdicts.push_back({"shadow band max/min<=4", band <= 4.0, fmt(band)});
  } else if (experiment == "measures.theta3") {
    double lo = 1e300, hi = 0;
    for (const auto& row : payload.at("rows")) {
      const double r = row.at("ratio").get<double>();
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double c = std::max(hi, lo > 0 ? 1.0 / lo : 1e300);
    verdicts.push_back({"theta3/hbms band C<=10", c <= 10.0, "C=" + fmt(c)});
  } else if (experiment == "measures.theta2") {
    bool ok = true;
    for (const auto& row : payload.at("rows")) {
      const double r = row.at("ratio").get<double>();
      ok = ok && r >= 0.1 && r <= 1.1 &&
           row.at("bound_violations").get<std::uint64_t>() == 0;
    }
    verdicts.push_back({"theta2 band [0.1,1.1], bound holds", ok, ""});
  } else if (experiment == "ergodic.shift_independence") {
    for (const auto& row : payload.at("rows")) {
      const double p = row.at("ks_pvalue").get<double>();
      verdicts.push_back({"shift independence KS p>0.01 (m=" +
                              row.at("m").dump() + ")",
                          p > 0.01, fmt(p)});
    }
  } else if (experiment == "walks.escape") {
    const double v = payload.at("value").get<double>();
    const double se = payload.at("std_error").get<double>();
    const bool ok = std::abs(v - payload.at("exact").get<double>()) <= 3 * se;
    verdicts.push_back({"escape probability = 2/3 within 3SE", ok, fmt(v)});
  }
}

}  // namespace

int write_reports(const std::string& result_dir, const std::string& export_dir,
                  std::ostream& out) {
  std::vector<ResultRecord> records;
  try {
    records = read_records_dir(result_dir);
  } catch (const std::exception& e) {
    out << "report error: " << e.what() << "\n";
    return 1;
  }
  if (records.empty()) {
    out << "report error: no records in '" << result_dir << "'\n";
    return 1;
  }
  std::set<std::string> versions;
  for (const auto& r : records) versions.insert(r.version);
  if (versions.size() > 1) {
    out << "report error: records from mixed versions:";
    for (const auto& v : versions) out << " " << v;
    out << "\n";
    return kExitMixedVersions;
  }

  if (!export_dir.empty()) std::filesystem::create_directories(export_dir);

  std::map<std::string, std::vector<const ResultRecord*>> by_experiment;
  for (const auto& r : records) by_experiment[r.experiment].push_back(&r);

  std::vector<Verdict> verdicts;
  for (const auto& [experiment, recs] : by_experiment) {
    std::vector<std::map<std::string, std::string>> rows;
    json svg_rows = json::array();
    for (const ResultRecord* r : recs) {
      json meta{{"seed", r->seed}, {"config_hash", r->config_hash}};
      if (r->payload.contains("rows")) {
        for (const auto& row : r->payload.at("rows")) {
          json merged = row;
          merged.update(meta);
          rows.push_back(flatten(merged));
          if (row.contains("grid")) svg_rows.push_back(row);
        }
      } else {
        json merged = r->payload;
        merged.update(meta);
        rows.push_back(flatten(merged));
      }
      theorem_checks(experiment, r->payload, verdicts);
    }
    print_table(out, experiment, rows);
    if (!export_dir.empty()) {
      std::string base = experiment;
      for (auto& c : base) {
        if (c == '.') c = '_';
      }
      write_csv(export_dir + "/" + base + ".csv", rows);
      if (!svg_rows.empty()) {
        write_curve_svg(export_dir + "/" + base + ".svg", svg_rows);
      }
    }
  }

  if (!verdicts.empty()) {
    out << "== theorem checks ==\n";
    for (const auto& v : verdicts) {
      out << (v.pass ? "[PASS] " : "[FAIL] ") << v.name;
      if (!v.detail.empty()) out << "  (" << v.detail << ")";
      out << "\n";
    }
  }
  return kExitOk;
}

}  // namespace hypflow
