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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "qnl/drift.hpp"
#include "qnl/dynamics.hpp"
#include "qnl/noise.hpp"
#include "qnl/pulse.hpp"
#include "qnl/rb.hpp"
#include "qnl/snr_fit.hpp"
#include "qnl/spectral.hpp"

namespace qnl::io {

using nlohmann::json;

// Row-major complex pairs: [[[re, im], ...], ...].
json operator_to_json(const Operator& op);
Operator operator_from_json(const json& j);

json rb_result_to_json(const RbResult& result);
json snr_fit_to_json(const SnrFit& fit);
json error_budget_to_json(const ErrorBudget& budget);
json calibration_to_json(const DurationCalibration& calibration);

/// Plain numeric table with '#'-prefixed header lines. `columns` are written
/// side by side; all must have equal length.
void write_table(std::ostream& out, const std::vector<std::string>& header_lines,
                 const std::vector<std::string>& column_names,
                 const std::vector<std::vector<double>>& columns, char delimiter = ',');

std::string format_double(double v);

/// Numeric table as written by write_table: '#' lines skipped, first other
/// line is the column header.
struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  const std::vector<double>& column(const std::string& name) const;
};
Table read_table(std::istream& in, char delimiter = ',');

// Schemas. All CSVs start with optional '#' comment lines and a column header.
//   trace: time_s,offset_hz
//   psd:   freq_hz,psd
//   rb:    m,mean_P,sem_P
//   sweep: snr,error_pct,err_unc_pct
//   envelope: time_s,value (|sample|) ; noise: time_s,in_phase,quadrature
void write_trace_csv(std::ostream& out, const FrequencyTrace& trace, const std::vector<std::string>& header = {});
FrequencyTrace read_trace_csv(std::istream& in, TraceSource source = TraceSource::kQubit);
void write_psd_csv(std::ostream& out, const PsdEstimate& psd, const std::vector<std::string>& header = {});
void write_rb_csv(std::ostream& out, const RbResult& result, const std::vector<std::string>& header = {});
void write_sweep_csv(std::ostream& out, const std::vector<SnrFidelityPoint>& points,
                     const std::vector<std::string>& header = {});
void write_envelope_csv(std::ostream& out, const PulseSchedule& schedule);
void write_noise_csv(std::ostream& out, const NoiseRealization& noise, double sample_period);
std::vector<SnrFidelityPoint> read_sweep_csv(std::istream& in);

}  // namespace qnl::io
