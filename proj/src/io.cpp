#include "cvpol/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cvpol::io {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string manifolds_csv(const PolarisationReport<double>& report) {
  std::string out =
      "n,p,s1,s2,s3,contrib_sc_1,contrib_sc_2,contrib_sc_3,contrib_p1\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.n);
    out += ',';
    out += format_double(row.p);
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(row.stokes(k));
    }
    for (int k = 0; k < 3; ++k) {
      out += ',';
      out += format_double(row.contrib_sc(k));
    }
    out += ',';
    out += format_double(row.contrib_p1);
    out += '\n';
  }
  return out;
}

std::string report_json(const PolarisationReport<double>& report, const ReportMeta& meta) {
  nlohmann::ordered_json j;
  j["p1"] = report.p1;
  j["p1sc"] = report.p1sc;
  j["tail_bound"] = report.tail_bound;
  if (report.p1_err) j["p1_err"] = *report.p1_err;
  if (report.p1sc_err) j["p1sc_err"] = *report.p1sc_err;
  j["meta"] = {{"dim", meta.dim},
               {"n_max", meta.n_max},
               {"seed", meta.seed},
               {"analysis", meta.analysis}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["n"] = row.n;
    r["p"] = row.p;
    r["defined"] = row.defined;
    r["s"] = {row.stokes(0), row.stokes(1), row.stokes(2)};
    r["contrib_sc"] = {row.contrib_sc(0), row.contrib_sc(1), row.contrib_sc(2)};
    r["contrib_p1"] = row.contrib_p1;
    rows.push_back(std::move(r));
  }
  j["manifolds"] = std::move(rows);
  return j.dump(2) + "\n";
}

void save_dataset(const std::string& path, const QuadratureDataset& ds,
                  const CalibrationModel& cal) {
  validate_dataset(ds);
  std::string out = "# cvpol quadrature dataset\n";
  out += "# samples=" + std::to_string(ds.samples.rows()) + "\n";
  out += "# seed=" + std::to_string(ds.seed) + "\n";
  out += "# shot_noise_rel_uncertainty=" + format_double(cal.shot_noise_rel_uncertainty) + "\n";
  out += "x_h,p_h,x_v,p_v\n";
  for (Eigen::Index i = 0; i < ds.samples.rows(); ++i) {
    for (int k = 0; k < 4; ++k) {
      if (k) out += ',';
      out += format_double(ds.samples(i, k));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

QuadratureDataset load_dataset(const std::string& path, CalibrationModel* cal) {
  std::istringstream in(read_text_file(path));
  std::string line;
  QuadratureDataset ds;
  long long declared = -1;
  std::vector<std::array<double, 4>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "samples") declared = std::stoll(value);
      if (key == "seed") ds.seed = std::stoull(value);
      if (key == "shot_noise_rel_uncertainty" && cal)
        cal->shot_noise_rel_uncertainty = std::stod(value);
      continue;
    }
    if (!header_seen) {
      if (line != "x_h,p_h,x_v,p_v")
        throw std::runtime_error("dataset: unexpected column header in " + path);
      header_seen = true;
      continue;
    }
    std::array<double, 4> row{};
    std::istringstream ls(line);
    std::string cell;
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("dataset: short row in " + path);
      row[k] = std::stod(cell);
    }
    rows.push_back(row);
  }
  if (declared >= 0 && declared != static_cast<long long>(rows.size()))
    throw std::runtime_error("dataset: header sample count does not match rows in " + path);
  ds.samples.resize(static_cast<Eigen::Index>(rows.size()), 4);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < 4; ++k) ds.samples(static_cast<Eigen::Index>(i), k) = rows[i][k];
  validate_dataset(ds);
  return ds;
}

void save_counts(const std::string& path, const std::array<CountRecord, 3>& records) {
  std::string out = "basis,m,n,count\n";
  for (const auto& rec : records) {
    validate_counts(rec);
    for (const auto& [mn, c] : rec.counts) {
      out += pnrd_basis_name(rec.basis);
      out += ',' + std::to_string(mn.first) + ',' + std::to_string(mn.second) + ',' +
             std::to_string(c) + '\n';
    }
  }
  write_text_file(path, out);
}

std::array<CountRecord, 3> load_counts(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "basis,m,n,count")
    throw std::runtime_error("counts: unexpected header in " + path);
  std::array<CountRecord, 3> records;
  records[0].basis = PnrdBasis::intensity;
  records[1].basis = PnrdBasis::diagonal;
  records[2].basis = PnrdBasis::circular;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string basis, m, n, c;
    if (!std::getline(ls, basis, ',') || !std::getline(ls, m, ',') || !std::getline(ls, n, ',') ||
        !std::getline(ls, c, ','))
      throw std::runtime_error("counts: short row in " + path);
    int idx = -1;
    for (int k = 0; k < 3; ++k)
      if (basis == pnrd_basis_name(records[k].basis)) idx = k;
    if (idx < 0) throw std::runtime_error("counts: unknown basis '" + basis + "'");
    const long long count = std::stoll(c);
    records[idx].counts[{std::stoi(m), std::stoi(n)}] += count;
    records[idx].shots += count;
  }
  for (auto& rec : records) validate_counts(rec);
  return records;
}

}  // namespace cvpol::io
