// SPDX-License-Identifier: Apache-2.0
#include "mmo/sim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "mmo/oracle.hpp"
#include "mmo/relay.hpp"
#include "mmo/sensor.hpp"
#include "mmo/sim/channel.hpp"
#include "mmo/spectral.hpp"
#include "mmo/uplink.hpp"

namespace mmo::sim {

namespace {

using Clock = std::chrono::steady_clock;

double noise_var(double power, double snr_db) { return power / std::pow(10.0, snr_db / 10.0); }

struct Cell {
  double value = 0.0;
  bool converged = true;
};

class TrialRunner {
 public:
  TrialRunner(const ExperimentConfig& cfg, std::vector<Algorithm> algos, std::uint64_t seed)
      : cfg_(cfg), algos_(std::move(algos)), seed_(seed) {}

  std::vector<RunRecord> run(int trial) const {
    std::vector<RunRecord> out;
    switch (cfg_.scenario) {
      case ScenarioKind::Uplink: uplink(trial, out); break;
      case ScenarioKind::Sensor: sensor(trial, out); break;
      case ScenarioKind::Relay: relay(trial, out); break;
    }
    return out;
  }

 private:
  template <typename F>
  void emit(std::vector<RunRecord>& out, const std::string& scenario, Algorithm a, int trial, double snr,
            const char* metric, F&& solve) const {
    const auto start = Clock::now();
    const Cell c = solve();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    if (!std::isfinite(c.value)) throw Error("non-finite metric in trial " + std::to_string(trial));
    out.push_back({scenario, algorithm_name(a), trial, snr, metric, c.value, cfg_.record_timing ? ms : 0.0, c.converged});
  }

  GradientOptions oracle_options(int trial) const {
    GradientOptions o;
    o.restarts = cfg_.oracle.restarts;
    o.max_iters = cfg_.oracle.max_iters;
    o.check_gradient = false;
    o.seed = (seed_ ^ static_cast<std::uint64_t>(trial)) + 0x9e3779b97f4a7c15ULL;
    return o;
  }

  void uplink(int trial, std::vector<RunRecord>& out) const {
    Rng rng(seed_ ^ static_cast<std::uint64_t>(trial));
    const auto& u = cfg_.uplink;
    const CMatrix r_rx = exponential_corr(cfg_.rx_correlation, u.bs_antennas);
    const CMatrix r_tx = exponential_corr(cfg_.tx_correlation, u.user_antennas);
    UplinkScenario sc;
    for (Index k = 0; k < u.users; ++k) {
      sc.channels.push_back(sample_channel(r_rx, r_tx, rng));
      sc.weights.push_back(CMatrix::Identity(u.user_antennas, u.user_antennas));
      sc.constraints.push_back(cfg_.constraint.build(u.user_antennas));
    }
    const double power = cfg_.constraint.total_power(u.user_antennas);
    for (double snr : cfg_.snr_db) {
      sc.noise_cov = noise_var(power, snr) * CMatrix::Identity(u.bs_antennas, u.bs_antennas);
      for (Algorithm a : algos_) {
        emit(out, cfg_.name, a, trial, snr, "sum_rate", [&] {
          if (a == Algorithm::ClosedForm) {
            const PrecoderState st = alternating_solve_uplink(sc);
            return Cell{sum_rate(sc, st.realized), st.converged};
          }
          Rng init_rng(oracle_options(trial).seed);
          std::vector<CMatrix> init;
          for (const auto& c : sc.constraints) init.push_back(random_feasible(c, u.user_antennas, u.user_antennas, init_rng));
          const auto res = projected_gradient(uplink_sum_rate_objective(sc.channels, sc.noise_cov, sc.weights),
                                              sc.constraints, init, oracle_options(trial));
          return Cell{res.report.best_objective, res.report.converged};
        });
      }
    }
  }

  void sensor(int trial, std::vector<RunRecord>& out) const {
    const auto& s = cfg_.sensor;
    for (Index count : s.sensor_counts) {
      Rng rng(seed_ ^ static_cast<std::uint64_t>(trial));
      const std::string label = cfg_.name + ":K=" + std::to_string(count);
      const CMatrix cx = distance_source_cov(count, s.block_dim, rng);
      const CMatrix r_rx = exponential_corr(cfg_.rx_correlation, s.fusion_antennas);
      const CMatrix r_tx = exponential_corr(cfg_.tx_correlation, s.sensor_antennas);
      std::vector<CMatrix> channels;
      std::vector<PowerConstraint> cons;
      std::vector<Index> dims(static_cast<size_t>(count), s.block_dim);
      for (Index k = 0; k < count; ++k) {
        channels.push_back(sample_channel(r_rx, r_tx, rng));
        cons.push_back(cfg_.constraint.build(s.sensor_antennas));
      }
      const double power = cfg_.constraint.total_power(s.sensor_antennas);
      for (double snr : cfg_.snr_db) {
        const CMatrix rn = noise_var(power, snr) * CMatrix::Identity(s.fusion_antennas, s.fusion_antennas);
        const SensorScenario sc = SensorScenario::make(cx, dims, channels, std::vector<CMatrix>(static_cast<size_t>(count), rn), cons);
        for (Algorithm a : algos_) {
          emit(out, label, a, trial, snr, "mutual_info", [&] {
            if (a == Algorithm::ClosedForm) {
              const FusionState st = alternating_solve_sensors(sc);
              return Cell{mutual_information(sc, st.compressors_X), st.converged};
            }
            return lmmse_baseline(sc, trial);
          });
        }
      }
    }
  }

  // Projected gradient on the total LMMSE error over whitened compressors;
  // reports the mutual information of the result.
  Cell lmmse_baseline(const SensorScenario& sc, int trial) const {
    std::vector<CMatrix> inv_roots;
    for (const auto& r : sc.per_sensor_cov) inv_roots.push_back(hermitian_inv_sqrt(r));
    const MatrixObjective base = sensor_lmmse_objective(sc.source_cov, sc.channels, sc.noise_covs);
    auto unwhiten = [&](const std::vector<CMatrix>& y) {
      std::vector<CMatrix> x(y.size());
      for (size_t k = 0; k < y.size(); ++k) x[k] = y[k] * inv_roots[k];
      return x;
    };
    MatrixObjective mapped;
    mapped.value = [&](const std::vector<CMatrix>& y) { return base.value(unwhiten(y)); };
    mapped.gradient = [&](const std::vector<CMatrix>& y) {
      auto g = base.gradient(unwhiten(y));
      for (size_t k = 0; k < g.size(); ++k) g[k] = g[k] * inv_roots[k];
      return g;
    };
    const GradientOptions opts = oracle_options(trial);
    Rng init_rng(opts.seed);
    std::vector<CMatrix> init;
    for (Index k = 0; k < sc.sensors(); ++k) {
      const auto ku = static_cast<size_t>(k);
      init.push_back(random_feasible(sc.constraints[ku], sc.channels[ku].cols(), sc.per_sensor_cov[ku].rows(), init_rng));
    }
    const auto res = projected_gradient(mapped, sc.constraints, init, opts);
    return Cell{mutual_information(sc, unwhiten(res.variables)), res.report.converged};
  }

  void relay(int trial, std::vector<RunRecord>& out) const {
    const auto& r = cfg_.relay;
    const CMatrix psi_base = exponential_corr(r.error_correlation, r.antennas);
    for (double err : r.error_variances) {
      Rng rng(seed_ ^ static_cast<std::uint64_t>(trial));
      char label[96];
      std::snprintf(label, sizeof(label), "%s:sigma_e2=%g", cfg_.name.c_str(), err);
      RelayScenario sc;
      sc.source_dim = r.antennas;
      sc.source_var = 1.0;
      sc.objective.kind = objective_kind_from_index(r.objective);
      for (Index k = 0; k < r.hops; ++k) {
        const RelayCsi csi = sample_relay_csi(r.antennas, r.antennas, err, psi_base, rng);
        sc.est_channels.push_back(csi.estimate);
        sc.error_covs.push_back(csi.error_cov);
        sc.constraints.push_back(cfg_.constraint.build(r.antennas));
      }
      const double power = cfg_.constraint.total_power(r.antennas);
      for (double snr : cfg_.snr_db) {
        sc.noise_vars.assign(static_cast<size_t>(r.hops), noise_var(power, snr));
        for (Algorithm a : algos_) {
          emit(out, label, a, trial, snr, "sum_rate", [&] {
            const HopState st = a == Algorithm::ClosedForm ? cascade_solve(sc) : cascade_solve(perfect_csi(sc));
            return Cell{relay_sum_rate(sc, dense_forwarders(st)), st.converged};
          });
        }
      }
    }
  }

  const ExperimentConfig& cfg_;
  std::vector<Algorithm> algos_;
  std::uint64_t seed_;
};

bool record_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.scenario, a.algorithm, a.trial, a.snr_db) < std::tie(b.scenario, b.algorithm, b.trial, b.snr_db);
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  ExperimentConfig c = cfg;
  if (opts.trials) c.trials = *opts.trials;
  c.validate();
  std::vector<Algorithm> algos = c.algorithms;
  if (opts.only) {
    std::vector<Algorithm> keep;
    for (Algorithm a : *opts.only) {
      if (std::find(algos.begin(), algos.end(), a) != algos.end()) keep.push_back(a);
    }
    if (keep.empty()) keep = *opts.only;
    algos = keep;
    c.algorithms = algos;
    c.validate();
  }
  const TrialRunner runner(c, algos, opts.seed.value_or(c.seed));
  const int workers = std::clamp(opts.parallel, 1, std::max(1, c.trials));
  std::vector<std::vector<RunRecord>> per_trial(static_cast<size_t>(c.trials));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int t = next++; t < c.trials; t = next++) {
      try {
        per_trial[static_cast<size_t>(t)] = runner.run(t);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = c.trials;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<RunRecord> records;
  for (auto& v : per_trial) records.insert(records.end(), v.begin(), v.end());
  std::stable_sort(records.begin(), records.end(), record_less);
  return records;
}

std::string format_csv(const std::vector<RunRecord>& records) {
  std::string out = "scenario,algorithm,trial,snr_db,metric_name,value,wall_time_ms,converged\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.17g,%s,%.17g,%.6f,%d\n", r.scenario.c_str(), r.algorithm.c_str(),
                  r.trial, r.snr_db, r.metric_name.c_str(), r.value, r.wall_time_ms, r.converged ? 1 : 0);
    out += buf;
  }
  return out;
}

void write_csv_atomic(const std::string& path, const std::vector<RunRecord>& records) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    const std::string text = format_csv(records);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.flush();
    if (!f) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move results into '" + path + "': " + ec.message());
  }
}

std::vector<CurvePoint> summarize(const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, std::string, double>, std::pair<double, int>> acc;
  for (const auto& r : records) {
    auto& slot = acc[{r.scenario, r.algorithm, r.snr_db}];
    slot.first += r.value;
    slot.second += 1;
  }
  std::vector<CurvePoint> out;
  for (const auto& [key, v] : acc) {
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v.first / v.second, v.second});
  }
  return out;
}

}  // namespace mmo::sim
