#pragma once

// Deterministic serialisation: CSV tables with fixed headers, report JSON,
// and the on-disk formats for homodyne datasets and PNRD count records.
// Identical inputs produce byte-identical files.

#include <array>
#include <string>
#include <vector>

#include "cvpol/report.hpp"
#include "cvpol/tomography.hpp"

namespace cvpol::io {

// Shortest-roundtrip style formatting via "%.17g".
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows);

// Per-manifold table: n,p,s1,s2,s3,contrib_sc_1,contrib_sc_2,contrib_sc_3,contrib_p1
std::string manifolds_csv(const PolarisationReport<double>& report);

struct ReportMeta {
  int dim = 0;
  int n_max = 0;
  std::uint64_t seed = 0;
  std::string analysis;
};

std::string report_json(const PolarisationReport<double>& report, const ReportMeta& meta);

// Homodyne dataset: '# key=value' header lines, then a CSV table of rows
// x_h,p_h,x_v,p_v in shot-noise units.
void save_dataset(const std::string& path, const QuadratureDataset& ds,
                  const CalibrationModel& cal);
QuadratureDataset load_dataset(const std::string& path, CalibrationModel* cal = nullptr);

// Count records: basis,m,n,count (one file for all three bases).
void save_counts(const std::string& path, const std::array<CountRecord, 3>& records);
std::array<CountRecord, 3> load_counts(const std::string& path);

}  // namespace cvpol::io
