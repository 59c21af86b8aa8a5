// Copyright 2026 The QNL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qnl/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace qnl::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json operator_to_json(const Operator& op) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < op.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < op.cols(); ++j) row.push_back({op(i, j).real(), op(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Operator operator_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw InvalidInput("operator JSON must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Operator op(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw InvalidInput("ragged operator JSON");
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) {
      const auto& pair = j[i][j2];
      op(i, j2) = cdouble(pair.at(0).get<double>(), pair.at(1).get<double>());
    }
  }
  return op;
}

json rb_result_to_json(const RbResult& r) {
  json j;
  j["lengths"] = r.lengths;
  j["mean_survival"] = r.mean_survival;
  j["sem_survival"] = r.sem_survival;
  j["shots"] = r.shots;
  j["gate_duration_s"] = r.gate_duration;
  j["fit_ok"] = r.fit_ok;
  if (r.fit_ok) {
    j["fit"] = {{"A", r.fit.a},       {"B", r.fit.b},         {"p", r.fit.p},
                {"A_se", r.fit.a_se}, {"B_se", r.fit.b_se},   {"p_se", r.fit.p_se},
                {"reduced_chi_square", r.fit.reduced_chi_square}};
    j["fidelity"] = r.fidelity;
    j["fidelity_se"] = r.fidelity_se;
  } else {
    j["fit_message"] = r.fit_message;
  }
  return j;
}

json snr_fit_to_json(const SnrFit& fit) {
  json cov = json::array();
  for (Eigen::Index i = 0; i < fit.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < fit.covariance.cols(); ++k) row.push_back(fit.covariance(i, k));
    cov.push_back(row);
  }
  return {{"A_pct", fit.a_coeff},
          {"b_per_unit", fit.b_coeff},
          {"offset_pct", fit.offset},
          {"snr_unit", fit.snr_unit},
          {"offset_fitted", fit.offset_fitted},
          {"weighted", fit.weighted},
          {"covariance", cov},
          {"chi_square", fit.chi_square},
          {"dof", fit.dof},
          {"reduced_chi_square", fit.reduced_chi_square()}};
}

json error_budget_to_json(const ErrorBudget& b) {
  auto m = [](const Measured& x) { return json{{"value_pct", x.value}, {"uncertainty_pct", x.uncertainty}}; };
  return {{"f_sim", m(b.f_sim)}, {"f_exp", m(b.f_exp)}, {"eps_cor", m(b.eps_cor)}, {"eps_others", m(b.eps_others)}};
}

json calibration_to_json(const DurationCalibration& c) {
  return {{"durations_s", c.durations},
          {"error_per_clifford", c.error_per_clifford},
          {"slope_per_s", c.slope},
          {"max_linearity_deviation", c.max_linearity_deviation},
          {"monotone", c.monotone},
          {"target_error", c.target_error},
          {"calibrated_duration_s", c.calibrated_duration}};
}

void write_table(std::ostream& out, const std::vector<std::string>& header_lines,
                 const std::vector<std::string>& column_names, const std::vector<std::vector<double>>& columns,
                 char delimiter) {
  if (column_names.size() != columns.size()) throw InvalidInput("write_table: name/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw InvalidInput("write_table: ragged columns");
  }
  for (const auto& h : header_lines) out << "# " << h << '\n';
  for (std::size_t k = 0; k < column_names.size(); ++k) out << (k ? std::string(1, delimiter) : "") << column_names[k];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (k) out << delimiter;
      out << format_double(columns[k][r]);
    }
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const FrequencyTrace& trace, const std::vector<std::string>& header) {
  std::vector<std::string> h = header;
  h.push_back(std::string("source: ") + to_string(trace.source));
  write_table(out, h, {"time_s", "offset_hz"}, {trace.times, trace.frequency_offsets});
}

FrequencyTrace read_trace_csv(std::istream& in, TraceSource source) {
  FrequencyTrace trace;
  trace.source = source;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("time_s", 0) == 0) continue;
    }
    std::istringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw InvalidInput("trace CSV line " + std::to_string(line_no) + ": expected time_s,offset_hz");
    }
    try {
      trace.times.push_back(std::stod(a));
      trace.frequency_offsets.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw InvalidInput("trace CSV line " + std::to_string(line_no) + ": not a number");
    }
    if (trace.times.size() > 1 && !(trace.times.back() > trace.times[trace.times.size() - 2])) {
      throw InvalidInput("trace CSV line " + std::to_string(line_no) + ": times must be strictly increasing");
    }
  }
  return trace;
}

void write_psd_csv(std::ostream& out, const PsdEstimate& psd, const std::vector<std::string>& header) {
  std::vector<std::string> h = header;
  h.push_back("welch: window=" + psd.window + " segment=" + std::to_string(psd.segment_length) +
              " overlap=" + format_double(psd.overlap_fraction));
  write_table(out, h, {"freq_hz", "psd"}, {psd.frequencies, psd.power});
}

void write_rb_csv(std::ostream& out, const RbResult& result, const std::vector<std::string>& header) {
  std::vector<double> m(result.lengths.begin(), result.lengths.end());
  write_table(out, header, {"m", "mean_P", "sem_P"}, {m, result.mean_survival, result.sem_survival});
}

void write_sweep_csv(std::ostream& out, const std::vector<SnrFidelityPoint>& points,
                     const std::vector<std::string>& header) {
  std::vector<double> snr, err, unc;
  for (const auto& p : points) {
    snr.push_back(p.snr);
    err.push_back(p.error_rate);
    unc.push_back(p.error_rate_uncertainty);
  }
  write_table(out, header, {"snr", "error_pct", "err_unc_pct"}, {snr, err, unc});
}

void write_envelope_csv(std::ostream& out, const PulseSchedule& schedule) {
  std::vector<double> t, v;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    t.push_back((static_cast<double>(k) + 0.5) * schedule.sample_period);
    v.push_back(std::abs(schedule.samples[k]));
  }
  write_table(out, {"envelope magnitude, peak-normalized; rabi_scale_rad_per_s=" + format_double(schedule.rabi_scale)},
              {"time_s", "value"}, {t, v});
}

void write_noise_csv(std::ostream& out, const NoiseRealization& noise, double sample_period) {
  std::vector<double> t;
  for (std::size_t k = 0; k < noise.size(); ++k) t.push_back((static_cast<double>(k) + 0.5) * sample_period);
  write_table(out, {"white baseband noise; seed=" + std::to_string(noise.seed) + " rms=" + format_double(noise.rms)},
              {"time_s", "in_phase", "quadrature"}, {t, noise.in_phase, noise.quadrature});
}

const std::vector<double>& Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return columns[k];
  }
  throw InvalidInput("table has no column '" + name + "'");
}

Table read_table(std::istream& in, char delimiter) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  auto split = [delimiter](const std::string& l) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(l);
    while (std::getline(ss, cell, delimiter)) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (t.names.empty()) {
      t.names = cells;
      t.columns.assign(cells.size(), {});
      continue;
    }
    if (cells.size() != t.names.size()) {
      throw InvalidInput("line " + std::to_string(line_no) + ": expected " + std::to_string(t.names.size()) +
                         " columns, found " + std::to_string(cells.size()));
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[k].size() || cells[k].empty()) {
        throw InvalidInput("line " + std::to_string(line_no) + ": '" + cells[k] + "' is not a number");
      }
      t.columns[k].push_back(v);
    }
  }
  if (t.names.empty()) throw InvalidInput("table has no header line");
  return t;
}

std::vector<SnrFidelityPoint> read_sweep_csv(std::istream& in) {
  const Table t = read_table(in);
  const auto& snr = t.column("snr");
  const auto& err = t.column("error_pct");
  const auto& unc = t.column("err_unc_pct");
  std::vector<SnrFidelityPoint> out;
  for (std::size_t i = 0; i < snr.size(); ++i) out.push_back({snr[i], err[i], unc[i]});
  return out;
}

}  // namespace qnl::io
