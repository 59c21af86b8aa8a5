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

#include "runner.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "config.hpp"
#include "qnl/drift.hpp"
#include "qnl/io.hpp"
#include "qnl/rb.hpp"
#include "qnl/snr_fit.hpp"
#include "qnl/spectral.hpp"

namespace qnl::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"", {}},
      {"run", {"experiment", "seed"}},
      {"physics",
       {"t1_us", "t2_us", "levels", "anharmonicity_mhz", "leak_decay_per_us", "detuning_hz", "readout_error"}},
      {"pulse",
       {"shape", "pi2_duration_ns", "sample_period_ns", "calibrate", "target_fidelity", "calibrate_min_ns",
        "calibrate_max_ns", "calibrate_step_ns"}},
      {"rb", {"lengths", "sequences", "shots"}},
      {"snr",
       {"snr_linear", "bandwidth_factor", "bandwidth_hz", "signal_power_dbm", "gain_db", "snr_unit", "targets_pct"}},
      {"drift",
       {"source", "sigma_hz", "corner_hz", "duration_h", "sample_period_s", "white_level_hz2_per_hz",
        "pink_coefficient_hz2", "input_csv", "track", "segment_length", "overlap_fraction"}},
      {"ramsey", {"detuning_hz", "max_delay_us", "points", "shots"}},
      {"detuning", {"offsets_hz"}},
      {"fit", {"input_csv", "kind", "offset_mode", "offset_pct", "targets_pct"}},
      {"budget", {"f_sim_pct", "f_sim_unc_pct", "f_exp_pct", "f_exp_unc_pct"}},
  };
  return s;
}

// Collects artifact payloads in memory so digests cover exactly what is written.
class Artifacts {
 public:
  Artifacts(std::string experiment, std::string config_hash, std::uint64_t seed)
      : experiment_(std::move(experiment)), config_hash_(std::move(config_hash)), seed_(seed) {}

  std::vector<std::string> header(const std::string& description, const std::string& units) const {
    return {"qnl " + std::string(kToolVersion) + " experiment=" + experiment_ + " seed=" + std::to_string(seed_),
            "config_sha256=" + config_hash_, description, "units: " + units};
  }

  void add(const std::string& name, const std::string& payload) { files_.emplace_back(name, payload); }

  void add_table(const std::string& name, const std::string& description, const std::string& units,
                 const std::vector<std::string>& columns, const std::vector<std::vector<double>>& data,
                 char delimiter = ',') {
    std::ostringstream ss;
    io::write_table(ss, header(description, units), columns, data, delimiter);
    add(name, ss.str());
  }

  void add_json(const std::string& name, json j) {
    j["qnl_version"] = kToolVersion;
    j["experiment"] = experiment_;
    j["config_sha256"] = config_hash_;
    j["seed"] = seed_;
    add(name, j.dump(2) + "\n");
  }

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::string experiment_;
  std::string config_hash_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<int> to_ints(const ConfigFile& cfg, const std::string& section, const std::string& key,
                         const std::vector<int>& fallback) {
  if (!cfg.has(section, key)) return fallback;
  std::vector<int> out;
  for (double d : cfg.numbers(section, key, {})) {
    if (d != std::floor(d) || d < 1 || d > 1e9) throw ConfigError(cfg.where(section, key) + " must hold positive integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

fs::path resolve_input(const ConfigFile& cfg, const std::string& section, const std::string& key) {
  fs::path p = cfg.string(section, key, "");
  if (p.empty()) throw ConfigError(cfg.where(section, key) + " must name a file");
  if (p.is_relative()) p = fs::path(cfg.origin()).parent_path() / p;
  return p;
}

struct Settings {
  RbConfig rb;
  bool calibrate = false;
  double target_fidelity = 0.99849;
  std::vector<double> calibration_durations;
};

// Physics, pulse and RB blocks shared by the RB-based experiments.
Settings rb_settings(const ConfigFile& cfg, std::uint64_t seed, int jobs) {
  Settings s;
  RbConfig& rb = s.rb;
  const double t1 = cfg.number("physics", "t1_us", 8.66) * 1e-6;
  const double t2 = cfg.number("physics", "t2_us", 9.08) * 1e-6;
  try {
    rb.coherence = CoherenceParams::from_t1_t2(t1, t2);
  } catch (const InvalidInput& e) {
    throw ConfigError(cfg.where("physics", "t2_us") + ": " + e.what());
  }
  rb.levels.levels = static_cast<int>(cfg.integer("physics", "levels", 2));
  if (rb.levels.levels != 2 && rb.levels.levels != 3) throw ConfigError(cfg.where("physics", "levels") + " must be 2 or 3");
  rb.levels.anharmonicity = kTwoPi * 1e6 * cfg.number("physics", "anharmonicity_mhz", -300.0);
  if (auto leak = cfg.optional_number("physics", "leak_decay_per_us")) rb.levels.leak_decay_rate = *leak * 1e6;
  rb.detuning = kTwoPi * cfg.number("physics", "detuning_hz", 0.0);
  rb.readout_error = cfg.number("physics", "readout_error", 0.0);
  if (!(rb.readout_error >= 0.0 && rb.readout_error <= 0.5)) {
    throw ConfigError(cfg.where("physics", "readout_error") + " must lie in [0, 0.5]");
  }

  try {
    rb.pulse.shape = envelope_shape_from_string(cfg.string("pulse", "shape", "gaussian"));
  } catch (const InvalidInput& e) {
    throw ConfigError(cfg.where("pulse", "shape") + ": " + e.what());
  }
  rb.pulse.duration = cfg.number("pulse", "pi2_duration_ns", 20.0) * 1e-9;
  rb.pulse.sample_period = cfg.number("pulse", "sample_period_ns", 0.5) * 1e-9;
  if (!(rb.pulse.sample_period > 0.0)) throw ConfigError(cfg.where("pulse", "sample_period_ns") + " must be positive");
  if (!(rb.pulse.duration >= 2.0 * rb.pulse.sample_period)) {
    throw ConfigError(cfg.where("pulse", "pi2_duration_ns") + " must cover at least two samples");
  }
  s.calibrate = cfg.boolean("pulse", "calibrate", false);
  s.target_fidelity = cfg.number("pulse", "target_fidelity", 0.99849);
  if (!(s.target_fidelity > 0.5 && s.target_fidelity < 1.0)) {
    throw ConfigError(cfg.where("pulse", "target_fidelity") + " must lie in (0.5, 1)");
  }
  const double lo = cfg.number("pulse", "calibrate_min_ns", 10.0);
  const double hi = cfg.number("pulse", "calibrate_max_ns", 40.0);
  const double step = cfg.number("pulse", "calibrate_step_ns", 2.5);
  if (!(lo > 0.0 && hi > lo && step > 0.0)) throw ConfigError(cfg.where("pulse", "calibrate_step_ns") + ": bad sweep range");
  for (double d = lo; d <= hi + 1e-9 * hi; d += step) s.calibration_durations.push_back(d * 1e-9);

  rb.lengths = to_ints(cfg, "rb", "lengths", rb.lengths);
  rb.n_sequences = static_cast<int>(cfg.integer("rb", "sequences", rb.n_sequences));
  rb.shots = static_cast<int>(cfg.integer("rb", "shots", rb.shots));
  if (rb.n_sequences < 2) throw ConfigError(cfg.where("rb", "sequences") + " must be >= 2");
  if (rb.shots < 1) throw ConfigError(cfg.where("rb", "shots") + " must be >= 1");
  for (std::size_t i = 1; i < rb.lengths.size(); ++i) {
    if (rb.lengths[i] <= rb.lengths[i - 1]) throw ConfigError(cfg.where("rb", "lengths") + " must be increasing");
  }
  if (rb.lengths.size() < 3) throw ConfigError(cfg.where("rb", "lengths") + " needs at least three lengths");

  rb.noise_bandwidth_factor = cfg.number("snr", "bandwidth_factor", 1.0);
  if (!(rb.noise_bandwidth_factor > 0.0)) throw ConfigError(cfg.where("snr", "bandwidth_factor") + " must be positive");
  rb.seed = seed;
  rb.jobs = jobs;
  return s;
}

json rb_block(const RbResult& r) {
  json j = io::rb_result_to_json(r);
  j["survivals"] = r.survivals;
  return j;
}

void add_rb_artifacts(Artifacts& art, const RbResult& r, const std::string& stem) {
  std::ostringstream csv;
  io::write_rb_csv(csv, r, art.header("RB mean survival per length", "m: Cliffords; mean_P, sem_P: probability"));
  art.add(stem + ".csv", csv.str());
  if (!r.fit_ok) return;
  std::vector<double> m, fit;
  const double m_max = r.lengths.back();
  for (int i = 0; i < 200; ++i) {
    const double x = 1.0 + (m_max - 1.0) * i / 199.0;
    m.push_back(x);
    fit.push_back(r.fit.a * std::pow(r.fit.p, x) + r.fit.b);
  }
  art.add_table(stem + "_fit.dat", "fit overlay P(m) = A p^m + B, 200 points", "m: Cliffords; P: probability",
                {"m", "P_fit"}, {m, fit}, ' ');
}

void calibrate(Settings& s, json& results, std::ostream& out) {
  const DurationCalibration cal = calibrate_gate_duration(s.target_fidelity, s.rb, s.calibration_durations);
  s.rb.pulse.duration = cal.calibrated_duration;
  results["calibration"] = io::calibration_to_json(cal);
  out << "calibration: pi/2 duration " << cal.calibrated_duration * 1e9 << " ns for target F = " << s.target_fidelity
      << " (monotone " << (cal.monotone ? "yes" : "no") << ", max linearity deviation "
      << cal.max_linearity_deviation * 100 << "%)\n";
}

json thresholds(const SnrFit& fit, const std::vector<double>& targets) {
  json arr = json::array();
  for (double t : targets) {
    json row{{"target_error_pct", t}};
    for (bool with_offset : {false, true}) {
      const char* key = with_offset ? "snr_with_offset" : "snr_without_offset";
      try {
        row[key] = required_snr(t, fit, with_offset);
      } catch (const UnachievableTarget&) {
        row[key] = nullptr;
      }
    }
    arr.push_back(row);
  }
  return arr;
}

void add_snr_curve(Artifacts& art, const SnrFit& fit, double snr_lo, double snr_hi) {
  std::vector<double> x, solid, dashed;
  for (int i = 0; i < 200; ++i) {
    const double s = snr_lo * std::pow(snr_hi / snr_lo, i / 199.0);
    x.push_back(s);
    solid.push_back(fit.evaluate(s, true));
    dashed.push_back(fit.evaluate(s, false));
  }
  art.add_table("snr_fit.dat",
                "fit overlay error = A exp(-b snr/unit) + offset (with_offset) and without offset, 200 points",
                "snr: linear; errors: percent", {"snr", "error_with_offset_pct", "error_without_offset_pct"},
                {x, solid, dashed}, ' ');
}

void print_thresholds(std::ostream& out, const json& th) {
  for (const auto& row : th) {
    out << "  required SNR for " << row["target_error_pct"].get<double>() << "% error: ";
    const auto& w = row["snr_without_offset"];
    if (w.is_null()) {
      out << "unachievable";
    } else {
      out << std::setprecision(4) << w.get<double>();
    }
    out << " (offset-free curve)\n";
  }
}

// ---- experiments ---------------------------------------------------------

json rb_baseline(const ConfigFile& cfg, std::uint64_t seed, int jobs, Artifacts& art, std::ostream& out) {
  Settings s = rb_settings(cfg, seed, jobs);
  json results;
  if (s.calibrate) calibrate(s, results, out);
  const RbResult r = run_rb(s.rb);
  results["rb"] = rb_block(r);
  add_rb_artifacts(art, r, "rb");
  if (!r.fit_ok) throw FitFailure("RB decay fit failed: " + r.fit_message);
  out << std::setprecision(6) << "RB fidelity F = " << 100.0 * r.fidelity << " +- " << 100.0 * r.fidelity_se
      << " %  (A = " << r.fit.a << ", B = " << r.fit.b << ", p = " << r.fit.p << ", pi/2 = " << r.gate_duration * 1e9
      << " ns)\n";
  return results;
}

json snr_sweep_experiment(const ConfigFile& cfg, std::uint64_t seed, int jobs, Artifacts& art, std::ostream& out) {
  Settings s = rb_settings(cfg, seed, jobs);
  json results;
  if (s.calibrate) calibrate(s, results, out);
  const std::vector<double> grid = cfg.numbers("snr", "snr_linear", {1e5, 2.68e5, 7.2e5, 1.93e6, 5.18e6, 1.39e7, 3.73e7, 1e8});
  const double unit = cfg.number("snr", "snr_unit", 1e6);
  const std::vector<double> targets = cfg.numbers("snr", "targets_pct", {0.1, 0.01});
  if (grid.size() < 4) throw ConfigError(cfg.where("snr", "snr_linear") + " needs at least four values");
  for (double g : grid) {
    if (!(g > 0.0)) throw ConfigError(cfg.where("snr", "snr_linear") + " values must be positive");
  }
  if (!(unit > 0.0)) throw ConfigError(cfg.where("snr", "snr_unit") + " must be positive");

  const SnrSweepResult sweep = snr_sweep(grid, s.rb, seed, unit);
  SnrSpec link;
  link.signal_power_dbm = cfg.number("snr", "signal_power_dbm", link.signal_power_dbm);
  link.gain_db = cfg.number("snr", "gain_db", link.gain_db);
  link.bandwidth_hz = cfg.number("snr", "bandwidth_hz", link.bandwidth_hz);

  json pts = json::array();
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    pts.push_back({{"snr", p.snr},
                   {"equivalent_noise_power_dbm", link.signal_power_dbm + link.gain_db - 10.0 * std::log10(p.snr)},
                   {"error_pct", p.error_rate},
                   {"err_unc_pct", p.error_rate_uncertainty},
                   {"rb", rb_block(sweep.rb_results[i + 1])}});
  }
  results["baseline"] = {{"error_pct", sweep.baseline.error_rate},
                         {"err_unc_pct", sweep.baseline.error_rate_uncertainty},
                         {"rb", rb_block(sweep.rb_results.front())}};
  results["points"] = pts;
  results["bandwidth_factor"] = s.rb.noise_bandwidth_factor;
  results["bandwidth_hz"] = link.bandwidth_hz;
  results["fit"] = io::snr_fit_to_json(sweep.fit);
  results["runs_test_p"] = sweep.runs_test_p;
  const json th = thresholds(sweep.fit, targets);
  results["thresholds"] = th;

  std::ostringstream csv;
  io::write_sweep_csv(csv, sweep.points,
                      art.header("RB error rate per SNR; baseline error " + io::format_double(sweep.baseline.error_rate) + " %",
                                 "snr: linear power ratio; error_pct, err_unc_pct: percent"));
  art.add("sweep.csv", csv.str());
  add_snr_curve(art, sweep.fit, grid.front(), grid.back());

  out << std::setprecision(6) << "baseline error " << sweep.baseline.error_rate << " +- "
      << sweep.baseline.error_rate_uncertainty << " %\n";
  for (const auto& p : sweep.points) {
    out << "  SNR " << p.snr << ": error " << p.error_rate << " +- " << p.error_rate_uncertainty << " %\n";
  }
  out << "fit: A = " << sweep.fit.a_coeff << " %, b = " << sweep.fit.b_coeff << " per " << unit
      << " SNR, offset = " << sweep.fit.offset << " %, reduced chi2 = " << sweep.fit.reduced_chi_square()
      << ", runs-test p = " << sweep.runs_test_p << "\n";
  print_thresholds(out, th);
  return results;
}

json ramsey_drift(const ConfigFile& cfg, std::uint64_t seed, Artifacts& art, std::ostream& out) {
  const std::string source_name = cfg.string("drift", "source", "qubit");
  if (source_name != "qubit" && source_name != "controller") {
    throw ConfigError(cfg.where("drift", "source") + " must be \"qubit\" or \"controller\"");
  }
  const TraceSource source = source_name == "qubit" ? TraceSource::kQubit : TraceSource::kController;
  json results;
  FrequencyTrace trace;
  std::optional<NoiseModel1f> model;
  std::optional<TrackingResult> tracking;

  if (cfg.has("drift", "input_csv")) {
    const fs::path path = resolve_input(cfg, "drift", "input_csv");
    std::ifstream in(path);
    if (!in) throw ConfigError(cfg.where("drift", "input_csv") + ": cannot open " + path.string());
    trace = io::read_trace_csv(in, source);
    if (trace.size() < 100) throw InvalidInput("input trace needs at least 100 samples");
    results["input_csv"] = path.filename().string();
  } else {
    const double hours = cfg.number("drift", "duration_h", source == TraceSource::kQubit ? 20.0 : 24.0);
    const double dt = cfg.number("drift", "sample_period_s", 30.0);
    if (!(hours > 0.0 && dt > 0.0)) throw ConfigError(cfg.where("drift", "duration_h") + ": duration and period must be positive");
    NoiseModel1f m;
    if (cfg.has("drift", "white_level_hz2_per_hz") || cfg.has("drift", "pink_coefficient_hz2")) {
      m.white_level = cfg.number("drift", "white_level_hz2_per_hz", 0.0);
      m.pink_coefficient = cfg.number("drift", "pink_coefficient_hz2", 0.0);
      try {
        m.validate();
      } catch (const InvalidInput& e) {
        throw ConfigError(cfg.where("drift", "pink_coefficient_hz2") + ": " + e.what());
      }
    } else {
      const double sigma = cfg.number("drift", "sigma_hz", source == TraceSource::kQubit ? 5e3 : 0.2);
      const double corner = cfg.number("drift", "corner_hz", 0.01);
      if (!(sigma > 0.0 && corner > 0.0)) throw ConfigError(cfg.where("drift", "sigma_hz") + ": sigma and corner must be positive");
      m = NoiseModel1f::tuned(sigma, corner, hours * 3600.0, dt);
    }
    model = m;
    if (cfg.boolean("drift", "track", source == TraceSource::kQubit)) {
      const CoherenceParams coh = CoherenceParams::from_t1_t2(cfg.number("physics", "t1_us", 8.66) * 1e-6,
                                                              cfg.number("physics", "t2_us", 9.08) * 1e-6);
      RamseyConfig rc = RamseyConfig::uniform(cfg.number("ramsey", "max_delay_us", 20.0) * 1e-6,
                                              static_cast<int>(cfg.integer("ramsey", "points", 64)),
                                              cfg.number("ramsey", "detuning_hz", 1e6), coh,
                                              static_cast<int>(cfg.integer("ramsey", "shots", 100)));
      rc.estimate_interval = dt;
      tracking = track_frequency(m, hours, rc, seed, source);
      trace = tracking->truth;
    } else {
      trace = synthesize_drift(m, hours * 3600.0, dt, seed, source);
    }
    results["model"] = {{"white_level_hz2_per_hz", m.white_level},
                        {"pink_coefficient_hz2", m.pink_coefficient},
                        {"corner_hz", m.corner_frequency()},
                        {"expected_sigma_hz", std::sqrt(drift_variance(m, hours * 3600.0, dt))}};
  }

  const double sigma = drift_sigma(trace);
  const std::size_t seg = static_cast<std::size_t>(
      cfg.integer("drift", "segment_length", static_cast<std::int64_t>(default_welch_segment(trace.size()))));
  const double overlap = cfg.number("drift", "overlap_fraction", 0.5);
  const PsdEstimate psd = welch_psd(trace.frequency_offsets, trace.sample_period(), seg, overlap);
  const PsdModelFit psd_fit = fit_psd_model(psd, psd.frequencies.front(), psd.frequencies.back(), true);

  results["source"] = to_string(source);
  results["samples"] = trace.size();
  results["sample_period_s"] = trace.sample_period();
  results["drift_sigma_hz"] = sigma;
  results["psd"] = {{"segment_length", psd.segment_length},
                    {"overlap_fraction", psd.overlap_fraction},
                    {"window", psd.window},
                    {"fit_white_level_hz2_per_hz", psd_fit.white_level},
                    {"fit_pink_coefficient_hz2", psd_fit.pink_coefficient},
                    {"fit_pink_slope", psd_fit.slope},
                    {"fit_pink_slope_se", psd_fit.slope_se}};

  std::ostringstream tcsv;
  io::write_trace_csv(tcsv, trace, art.header("frequency offset trace (ground truth when synthesized)", "time_s: s; offset_hz: Hz"));
  art.add("trace.csv", tcsv.str());
  std::ostringstream pcsv;
  io::write_psd_csv(pcsv, psd, art.header("one-sided Welch PSD of the offset trace", "freq_hz: Hz; psd: Hz^2/Hz"));
  art.add("psd.csv", pcsv.str());
  std::vector<double> model_curve;
  for (double f : psd.frequencies) model_curve.push_back(psd_fit.pink_coefficient * std::pow(f, psd_fit.slope) + psd_fit.white_level);
  art.add_table("psd.dat", "log-log ready PSD with fitted c f^slope + w overlay", "freq_hz: Hz; psd, psd_fit: Hz^2/Hz",
                {"freq_hz", "psd", "psd_fit"}, {psd.frequencies, psd.power, model_curve}, ' ');

  out << std::setprecision(6) << to_string(source) << " drift: sigma = " << sigma << " Hz over " << trace.size()
      << " samples; PSD pink slope " << psd_fit.slope << " +- " << psd_fit.slope_se << ", white level "
      << psd_fit.white_level << " Hz^2/Hz\n";

  if (tracking) {
    const double est_sigma = drift_sigma(tracking->estimate);
    results["tracking"] = {{"estimated_sigma_hz", nan_safe(est_sigma)},
                           {"truth_sigma_hz", sigma},
                           {"relative_error", nan_safe(est_sigma / sigma - 1.0)},
                           {"gaps", tracking->gaps}};
    art.add_table("tracking.csv", "Ramsey tracker estimate against ground truth (nan marks fit gaps)",
                  "time_s: s; truth_hz, estimate_hz: Hz", {"time_s", "truth_hz", "estimate_hz"},
                  {tracking->truth.times, tracking->truth.frequency_offsets, tracking->estimate.frequency_offsets});
    out << "tracker: estimated sigma " << est_sigma << " Hz (truth " << sigma << " Hz), " << tracking->gaps.size()
        << " gaps\n";
  }
  return results;
}

json detuning_sweep(const ConfigFile& cfg, std::uint64_t seed, int jobs, Artifacts& art, std::ostream& out) {
  Settings s = rb_settings(cfg, seed, jobs);
  json results;
  if (s.calibrate) calibrate(s, results, out);
  const std::vector<double> offsets = cfg.numbers("detuning", "offsets_hz", {0.0, -5e3, 5e3, -5e6, 5e6});
  if (offsets.empty()) throw ConfigError(cfg.where("detuning", "offsets_hz") + " must not be empty");
  const auto points = fidelity_vs_detuning(offsets, s.rb);
  json arr = json::array();
  std::vector<double> off, f, fse;
  for (const auto& p : points) {
    arr.push_back({{"offset_hz", p.offset_hz}, {"fidelity_pct", nan_safe(100 * p.fidelity)}, {"fidelity_se_pct", nan_safe(100 * p.fidelity_se)}});
    off.push_back(p.offset_hz);
    f.push_back(100 * p.fidelity);
    fse.push_back(100 * p.fidelity_se);
    out << std::setprecision(6) << "  offset " << p.offset_hz << " Hz: F = " << 100 * p.fidelity << " +- "
        << 100 * p.fidelity_se << " %\n";
  }
  results["points"] = arr;
  art.add_table("detuning.csv", "RB fidelity per fixed drive detuning", "offset_hz: Hz; fidelity_pct, fidelity_se_pct: percent",
                {"offset_hz", "fidelity_pct", "fidelity_se_pct"}, {off, f, fse});
  return results;
}

json fit_only(const ConfigFile& cfg, Artifacts& art, std::ostream& out) {
  json results;
  const bool has_input = cfg.has("fit", "input_csv");
  const std::string kind = cfg.string("fit", "kind", "snr");
  if (kind != "snr" && kind != "rb") throw ConfigError(cfg.where("fit", "kind") + " must be \"snr\" or \"rb\"");
  if (has_input) {
    const fs::path path = resolve_input(cfg, "fit", "input_csv");
    std::ifstream in(path);
    if (!in) throw ConfigError(cfg.where("fit", "input_csv") + ": cannot open " + path.string());
    results["input_csv"] = path.filename().string();
    if (kind == "snr") {
      const auto points = io::read_sweep_csv(in);
      const std::string mode = cfg.string("fit", "offset_mode", "fixed");
      if (mode != "fixed" && mode != "free") throw ConfigError(cfg.where("fit", "offset_mode") + " must be \"fixed\" or \"free\"");
      const double offset = cfg.number("fit", "offset_pct", 0.167);
      const SnrFit fit = fit_snr_model(points, mode == "fixed" ? OffsetMode::kFixed : OffsetMode::kFree, offset);
      const json th = thresholds(fit, cfg.numbers("fit", "targets_pct", {0.1, 0.01}));
      results["fit"] = io::snr_fit_to_json(fit);
      results["thresholds"] = th;
      double lo = points.front().snr, hi = lo;
      for (const auto& p : points) {
        lo = std::min(lo, p.snr);
        hi = std::max(hi, p.snr);
      }
      add_snr_curve(art, fit, lo, hi);
      out << std::setprecision(6) << "fit: A = " << fit.a_coeff << " %, b = " << fit.b_coeff << ", offset = " << fit.offset
          << " %, reduced chi2 = " << fit.reduced_chi_square() << "\n";
      print_thresholds(out, th);
    } else {
      const io::Table t = io::read_table(in);
      const auto& m = t.column("m");
      const auto& p = t.column("mean_P");
      std::vector<double> sem;
      for (const auto& name : t.names) {
        if (name == "sem_P") sem = t.column("sem_P");
      }
      std::vector<int> lengths;
      for (double x : m) lengths.push_back(static_cast<int>(std::llround(x)));
      const RbFit fit = fit_rb_decay(lengths, p, sem);
      const double f = fidelity_from_p(fit.p);
      results["fit"] = {{"A", fit.a}, {"B", fit.b}, {"p", fit.p}, {"A_se", fit.a_se}, {"B_se", fit.b_se},
                        {"p_se", fit.p_se}, {"reduced_chi_square", fit.reduced_chi_square}};
      results["fidelity"] = f;
      results["fidelity_se"] = fit.p_se / 2;
      out << std::setprecision(6) << "RB fit: F = " << 100 * f << " +- " << 50 * fit.p_se << " %, p = " << fit.p << "\n";
    }
  }
  const bool has_budget = cfg.has("budget", "f_sim_pct") || cfg.has("budget", "f_exp_pct");
  if (has_budget) {
    if (!cfg.has("budget", "f_sim_pct") || !cfg.has("budget", "f_exp_pct")) {
      throw ConfigError(cfg.origin() + ": [budget] needs both f_sim_pct and f_exp_pct");
    }
    const ErrorBudget b = error_budget({cfg.number("budget", "f_sim_pct", 0), cfg.number("budget", "f_sim_unc_pct", 0)},
                                       {cfg.number("budget", "f_exp_pct", 0), cfg.number("budget", "f_exp_unc_pct", 0)});
    results["budget"] = io::error_budget_to_json(b);
    out << std::setprecision(6) << "budget: eps_cor = " << b.eps_cor.value << " +- " << b.eps_cor.uncertainty
        << " %, eps_others = " << b.eps_others.value << " +- " << b.eps_others.uncertainty << " %\n";
  }
  if (!has_input && !has_budget) throw ConfigError(cfg.origin() + ": fit-only needs [fit] input_csv or a [budget] block");
  return results;
}

int resolve_job_count(const std::optional<int>& cli) {
  if (cli) return *cli;
  if (const char* env = std::getenv("QNL_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<int>(v);
  }
  return 1;
}

void write_file(const fs::path& path, const std::string& payload) {
  std::ofstream f(path, std::ios::binary);
  f << payload;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"rb-baseline", "snr-sweep", "ramsey-drift", "detuning-sweep", "fit-only"};
  return names;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return ss.str();
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  ConfigFile cfg;
  std::uint64_t seed = 1;
  try {
    cfg = ConfigFile::load(options.config_path);
    cfg.check_keys(schema());
    const std::string declared = cfg.string("run", "experiment", options.experiment);
    if (declared != options.experiment) {
      throw ConfigError(cfg.where("run", "experiment") + " is '" + declared + "' but '" + options.experiment +
                        "' was requested");
    }
    const std::int64_t s = cfg.integer("run", "seed", 1);
    if (s < 0) throw ConfigError(cfg.where("run", "seed") + " must be >= 0");
    seed = options.seed.value_or(static_cast<std::uint64_t>(s));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  const int jobs = resolve_job_count(options.jobs);
  const std::string config_hash = sha256_hex(cfg.text());
  Artifacts art(options.experiment, config_hash, seed);
  const fs::path dir = options.out_dir;

  json results;
  try {
    out << "qnl " << kToolVersion << " " << options.experiment << " (seed " << seed << ", jobs " << jobs << ")\n";
    if (options.experiment == "rb-baseline") {
      results = rb_baseline(cfg, seed, jobs, art, out);
    } else if (options.experiment == "snr-sweep") {
      results = snr_sweep_experiment(cfg, seed, jobs, art, out);
    } else if (options.experiment == "ramsey-drift") {
      results = ramsey_drift(cfg, seed, art, out);
    } else if (options.experiment == "detuning-sweep") {
      results = detuning_sweep(cfg, seed, jobs, art, out);
    } else if (options.experiment == "fit-only") {
      results = fit_only(cfg, art, out);
    } else {
      err << "unknown experiment '" << options.experiment << "'\n";
      return kExitUsage;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    try {
      fs::create_directories(dir);
      json diag{{"experiment", options.experiment}, {"seed", seed}, {"config_sha256", config_hash},
                {"error", e.what()}, {"partial_results", results}};
      write_file(dir / "diagnostics.json", diag.dump(2) + "\n");
      // Whatever artifacts were produced before the failure are kept for inspection.
      for (const auto& [name, payload] : art.files()) write_file(dir / name, payload);
      err << "diagnostics written to " << (dir / "diagnostics.json").string() << "\n";
    } catch (const std::exception& inner) {
      err << "could not write diagnostics: " << inner.what() << "\n";
    }
    return kExitRuntime;
  }

  try {
    art.add_json("results.json", results);
    fs::create_directories(dir);
    json files = json::array();
    for (const auto& [name, payload] : art.files()) {
      write_file(dir / name, payload);
      files.push_back({{"name", name}, {"bytes", payload.size()}, {"sha256", sha256_hex(payload)}});
    }
    const json manifest{{"tool", "qnl"},
                        {"tool_version", kToolVersion},
                        {"experiment", options.experiment},
                        {"config_path", options.config_path},
                        {"config_sha256", config_hash},
                        {"seed", seed},
                        {"started_utc", started},
                        {"finished_utc", utc_now()},
                        {"files", files}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    out << "artifacts: " << dir.string() << " (" << files.size() << " files + manifest.json)\n";
  } catch (const std::exception& e) {
    err << "run failed while writing artifacts: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace qnl::cli
