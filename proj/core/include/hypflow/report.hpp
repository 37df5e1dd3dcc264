#pragma once

#include <ostream>
#include <string>

namespace hypflow {

// Renders the records in `result_dir` as text tables on `out`, one table per
// experiment, writes CSV exports and SVG curve plots under `export_dir`
// (skipped when empty), and prints a theorem pass/fail summary against the
// acceptance thresholds. Returns a runner exit code (4 when records from
// mixed versions are found, 1 when the directory holds no records).
int write_reports(const std::string& result_dir, const std::string& export_dir,
                  std::ostream& out);

}  // namespace hypflow
