// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmo/constraints.hpp"
#include "mmo/oracle.hpp"
#include "mmo/random.hpp"
#include "mmo/relay.hpp"
#include "mmo/sensor.hpp"
#include "mmo/sim/channel.hpp"
#include "mmo/sim/config.hpp"
#include "mmo/sim/experiment.hpp"
#include "mmo/spectral.hpp"
#include "mmo/structure.hpp"
#include "mmo/uplink.hpp"
#include "mmo/waterfill.hpp"

using namespace mmo;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string config_path(const char* name) { return std::string(MMO_CONFIG_DIR) + "/" + name; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

CMatrix exp_corr(Index n, double r) { return sim::exponential_corr(r, n); }

// Mean value per (scenario, algorithm, snr).
std::map<std::tuple<std::string, std::string, double>, double> means(const std::vector<sim::RunRecord>& records) {
  std::map<std::tuple<std::string, std::string, double>, double> out;
  for (const auto& p : sim::summarize(records)) out[{p.scenario, p.algorithm, p.snr_db}] = p.mean;
  return out;
}

Outcome uplink_agreement() {
  const auto t0 = Clock::now();
  const sim::ExperimentConfig cfg = sim::load_config(config_path("uplink_per_antenna.json"));
  const auto records = sim::run_experiment(cfg);
  const double elapsed = seconds_since(t0);
  const auto m = means(records);
  double worst = 0.0;
  for (double snr : cfg.snr_db) {
    const double cf = m.at({cfg.name, "closed_form", snr});
    const double orc = m.at({cfg.name, "oracle", snr});
    worst = std::max(worst, std::abs(cf - orc) / std::abs(orc));
  }
  Outcome o;
  o.pass = worst <= 0.01 && elapsed < 300.0;
  o.detail = fmt("worst relative gap %.2e over %g trials, %.1f s", worst, cfg.trials, elapsed);
  return o;
}

Outcome constraint_families() {
  Rng rng(2002);
  int infeasible = 0, dominated = 0, over_cap = 0, total = 0;
  const double cap = 1.4;
  for (int family = 0; family < 3; ++family) {
    for (int t = 0; t < 200; ++t) {
      const Index n = 2 + t % 3;
      const CMatrix pi = random_psd(n, rng, 0.05);
      PowerConstraint c;
      if (family == 0) {
        c = ShapingConstraint{random_psd(n, rng, 0.1)};
      } else if (family == 1) {
        c = JointConstraint{random_uniform(1, rng, 1.0, 1.4 * static_cast<double>(n))(0), cap};
      } else if (t % 2 == 0) {
        std::vector<double> budgets(static_cast<size_t>(n));
        for (auto& b : budgets) b = random_uniform(1, rng, 0.5, 1.5)(0);
        c = per_antenna(budgets);
      } else {
        WeightedConstraint w;
        for (int i = 0; i < 2; ++i) {
          w.weights.push_back(random_psd(n, rng, 0.1));
          w.budgets.push_back(random_uniform(1, rng, 0.5, 2.0)(0));
        }
        c = w;
      }
      const auto s = solve_structure(pi, c, log_det_scalarizer(), n);
      ++total;
      if (feasibility_residual(c, s.dense) > 1e-6) ++infeasible;
      if (!pareto_dominance_check(s.dense, pi, c, 10000, rng)) ++dominated;
      if (family == 1 && s.gains.size() > 0 && s.gains.array().square().maxCoeff() > cap + 1e-12) ++over_cap;
    }
  }
  Outcome o;
  o.pass = infeasible == 0 && dominated == 0 && over_cap == 0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d instances: %d infeasible, %d dominated, %d above the joint cap", total,
                infeasible, dominated, over_cap);
  o.detail = buf;
  return o;
}

Outcome waterfill_equivalence() {
  Rng rng(3003);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const Index n = 1 + t % 3;
    const RVector g = random_uniform(n, rng, 0.05, 5.0);
    const double budget = random_uniform(1, rng, 0.2, 3.0)(0);
    const double cap = random_uniform(1, rng, budget / static_cast<double>(n) + 1e-3, budget)(0);
    const RVector free_grid = grid_waterfill(g, budget);
    worst = std::max(worst, (waterfill(g, budget).powers - free_grid).cwiseAbs().maxCoeff());
    const RVector capped_grid = grid_waterfill(g, budget, cap);
    worst = std::max(worst, (waterfill_capped(g, budget, cap).powers - capped_grid).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-3, fmt("500 instances, worst per-channel power gap %.2e", worst)};
}

SensorScenario random_sensors(const std::vector<Index>& dims, Index nt, Index nr, Rng& rng) {
  Index total = 0;
  for (Index d : dims) total += d;
  std::vector<CMatrix> h, rn;
  std::vector<PowerConstraint> cs;
  for (size_t k = 0; k < dims.size(); ++k) {
    h.push_back(complex_gaussian(nr, nt, rng));
    rn.push_back(random_psd(nr, rng, 0.5));
    cs.push_back(sum_power(nt, 1.0));
  }
  return SensorScenario::make(random_psd(total, rng, 0.2), dims, h, rn, cs);
}

// log-det of C^-1 + blkdiag(X^H H^H R^-1 H X), assembled directly.
double full_log_det(const SensorScenario& sc, const std::vector<CMatrix>& x) {
  CMatrix b = sc.source_cov.inverse();
  for (Index k = 0; k < sc.sensors(); ++k) {
    const auto ku = static_cast<size_t>(k);
    const Index off = sc.block_offset(k);
    const Index d = sc.block_dims()[ku];
    b.block(off, off, d, d) +=
        x[ku].adjoint() * sc.channels[ku].adjoint() * sc.noise_covs[ku].inverse() * sc.channels[ku] * x[ku];
  }
  return log_det_hpd(b);
}

Outcome sensor_fusion() {
  Rng rng(4004);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index count = 1 + t % 5;
    std::vector<Index> dims(static_cast<size_t>(count));
    for (auto& d : dims) d = 1 + static_cast<Index>(rng() % 3);
    const SensorScenario sc = random_sensors(dims, 3, 3, rng);
    std::vector<CMatrix> x;
    for (Index d : dims) x.push_back(complex_gaussian(3, d, rng));
    const double full = full_log_det(sc, x);
    for (Index k = 0; k < count; ++k) {
      const auto ku = static_cast<size_t>(k);
      const RMatrix p = build_permutation(dims, k);
      const CMatrix pc = p.cast<Complex>() * sc.source_cov.inverse() * p.transpose().cast<Complex>();
      const Index rest = pc.rows() - dims[ku];
      const CMatrix own =
          x[ku].adjoint() * sc.channels[ku].adjoint() * sc.noise_covs[ku].inverse() * sc.channels[ku] * x[ku];
      double split = log_det_hpd(own + sensor_phi(sc, x, k));
      if (rest > 0) split += log_det_hpd(pc.bottomRightCorner(rest, rest) + sensor_xi(sc, x, k));
      worst = std::max(worst, std::abs(split - full) / std::max(1.0, std::abs(full)));
    }
  }

  sim::ExperimentConfig cfg = sim::load_config(config_path("sensor_fusion.json"));
  cfg.trials = 20;
  const auto m = means(sim::run_experiment(cfg));
  int points = 0, losses = 0;
  double min_margin = 1e300;
  for (Index count : cfg.sensor.sensor_counts) {
    const std::string label = cfg.name + ":K=" + std::to_string(count);
    for (double snr : cfg.snr_db) {
      const double margin = m.at({label, "closed_form", snr}) - m.at({label, "oracle", snr});
      ++points;
      if (margin < 0.0) ++losses;
      min_margin = std::min(min_margin, margin);
    }
  }
  Outcome o;
  o.pass = worst < 1e-9 && losses == 0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "split residual %.1e on 200 instances; MI above the LMMSE baseline at %d/%d points (min margin %.3f, %d trials)",
                worst, points - losses, points, min_margin, cfg.trials);
  o.detail = buf;
  return o;
}

struct Chain {
  RelayScenario sc;
  std::vector<CMatrix> forwarders;
};

Chain random_chain(const std::vector<Index>& dims, ObjectiveKind kind, Rng& rng, bool square = false) {
  Chain c;
  c.sc.source_dim = dims.front();
  c.sc.source_var = random_uniform(1, rng, 0.5, 2.0)(0);
  c.sc.objective.kind = kind;
  if (kind == ObjectiveKind::WeightedMse) c.sc.objective.weight_matrix = random_psd(dims.front(), rng, 0.1);
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    const Index tx = dims[k] + (square ? 0 : static_cast<Index>(rng() % 2));
    c.sc.est_channels.push_back(complex_gaussian(dims[k + 1], tx, rng));
    c.sc.error_covs.push_back(0.02 * exp_corr(tx, 0.6));
    c.sc.noise_vars.push_back(random_uniform(1, rng, 0.1, 1.0)(0));
    c.sc.constraints.push_back(sum_power(tx, 4.0));
    c.forwarders.push_back(complex_gaussian(tx, dims[k], rng));
  }
  return c;
}

Outcome relay_consistency() {
  Rng rng(5005);
  double worst_path = 0.0, worst_mse_spread = 0.0, worst_chol_spread = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Index hops = 1 + t % 3;
    std::vector<Index> dims(static_cast<size_t>(hops + 1));
    for (auto& d : dims) d = 2 + static_cast<Index>(rng() % 3);
    const ObjectiveKind kind = objective_kind_from_index(1 + t % 6);
    const Chain c = random_chain(dims, kind, rng);
    const auto ev = evaluate_cascade(c.sc, c.forwarders);
    const double eigen =
        objective_from_eigen(c.sc.objective, c.sc.source_var, hop_eigenvalues(c.sc, c.forwarders), c.sc.source_dim);
    worst_path = std::max(worst_path, std::abs(ev.objective - eigen) / std::max(1.0, std::abs(eigen)));

    // Equalization checks on square chains, where the rotation acts on every stream.
    std::vector<Index> square(static_cast<size_t>(hops + 1), dims.front());
    Chain eq = random_chain(square, ObjectiveKind::MaxMse, rng);
    const RVector d = evaluate_cascade(eq.sc, eq.forwarders).mse.matrix.diagonal().real();
    worst_mse_spread = std::max(worst_mse_spread, d.maxCoeff() - d.minCoeff());
    eq.sc.objective.kind = ObjectiveKind::MaxCholesky;
    const auto ev5 = evaluate_cascade(eq.sc, eq.forwarders);
    const RVector l = mse_tilde(eq.sc.source_var, ev5.product).llt().matrixL().toDenseMatrix().diagonal().real();
    worst_chol_spread = std::max(worst_chol_spread, l.maxCoeff() - l.minCoeff());
  }
  Outcome o;
  o.pass = worst_path < 1e-8 && worst_mse_spread < 1e-8 && worst_chol_spread < 1e-8;
  o.detail = fmt("path gap %.1e, MSE diagonal spread %.1e, Cholesky diagonal spread %.1e", worst_path,
                 worst_mse_spread, worst_chol_spread);
  return o;
}

Outcome robust_trend() {
  sim::ExperimentConfig cfg = sim::load_config(config_path("relay_robust.json"));
  cfg.snr_db = {20.0};
  const auto records = sim::run_experiment(cfg);
  std::map<std::string, std::map<int, double>> robust, naive;
  for (const auto& r : records) (r.algorithm == "closed_form" ? robust : naive)[r.scenario][r.trial] = r.value;
  Outcome o;
  double previous_gap = -1e300;
  std::string detail;
  for (double err : cfg.relay.error_variances) {
    char label[96];
    std::snprintf(label, sizeof(label), "%s:sigma_e2=%g", cfg.name.c_str(), err);
    double sum = 0.0, sq = 0.0;
    const auto& rb = robust.at(label);
    const auto& nv = naive.at(label);
    for (const auto& [trial, v] : rb) {
      const double diff = v - nv.at(trial);
      sum += diff;
      sq += diff * diff;
    }
    const double n = static_cast<double>(rb.size());
    const double gap = sum / n;
    const double sd = std::sqrt(std::max(0.0, (sq - n * gap * gap) / (n - 1.0)));
    const double tstat = sd > 0.0 ? gap / (sd / std::sqrt(n)) : 0.0;
    if (err > 0.0 && !(gap >= 0.0 && tstat > 2.33)) o.pass = false;
    if (gap < previous_gap - 1e-12) o.pass = false;
    previous_gap = gap;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s%g: gap %.4f (t=%.1f)", detail.empty() ? "" : "; ", err, gap, tstat);
    detail += buf;
  }
  o.detail = detail + fmt(" over %g paired trials at %g dB", cfg.trials, cfg.snr_db.front());
  return o;
}

UplinkScenario random_uplink(Index users, Index nt, Index nr, const PowerConstraint& c, Rng& rng) {
  UplinkScenario sc;
  for (Index k = 0; k < users; ++k) {
    sc.channels.push_back(complex_gaussian(nr, nt, rng));
    sc.weights.push_back(random_psd(nt, rng, 0.2));
    sc.constraints.push_back(c);
  }
  sc.noise_cov = random_psd(nr, rng, 0.5);
  return sc;
}

Outcome invariance() {
  Rng rng(7007);
  double worst_rotation = 0.0;
  double worst_drop = 0.0;
  int uplink_runs = 0, sensor_runs = 0, relay_runs = 0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
  auto check_trace = [&](const std::vector<double>& trace, bool increasing) {
    for (size_t i = 1; i < trace.size(); ++i) {
      const double step = increasing ? trace[i - 1] - trace[i] : trace[i] - trace[i - 1];
      worst_drop = std::max(worst_drop, step);
    }
  };
  auto family = [&](int t, Index n) -> PowerConstraint {
    switch (t % 3) {
      case 0: return ShapingConstraint{exp_corr(n, 0.6)};
      case 1: return JointConstraint{static_cast<double>(n), 1.4};
      default: {
        std::vector<double> budgets(static_cast<size_t>(n));
        for (auto& b : budgets) b = random_uniform(1, rng, 0.6, 1.4)(0);
        return per_antenna(budgets);
      }
    }
  };

  for (int t = 0; t < 100; ++t) {
    const PowerConstraint c = family(t, 3);

    const CMatrix pi = random_psd(3, rng, 0.1);
    const CMatrix f = complex_gaussian(3, 3, rng);
    worst_rotation = std::max(worst_rotation, rel(log_det_objective(pi, f), log_det_objective(pi, f * random_unitary(3, rng))));

    UplinkScenario up = random_uplink(2 + t % 2, 3, 4, c, rng);
    for (auto& w : up.weights) w = CMatrix::Identity(3, 3);
    std::vector<CMatrix> x;
    for (size_t k = 0; k < up.channels.size(); ++k) x.push_back(complex_gaussian(3, 3, rng));
    const double rate = sum_rate(up, x);
    const size_t k = static_cast<size_t>(t) % x.size();
    x[k] = x[k] * random_unitary(3, rng);
    worst_rotation = std::max(worst_rotation, rel(rate, sum_rate(up, x)));
    check_trace(alternating_solve_uplink(random_uplink(2, 3, 4, c, rng)).objective_trace, true);
    ++uplink_runs;

    const Index count = 2 + t % 3;
    SensorScenario sc = random_sensors(std::vector<Index>(static_cast<size_t>(count), 3), 3, 3, rng);
    for (auto& cons : sc.constraints) cons = family(t, 3);
    check_trace(alternating_solve_sensors(sc).objective_trace, true);
    ++sensor_runs;

    Chain ch = random_chain({3, 3, 3}, objective_kind_from_index(1 + t % 6), rng, true);
    const double before = evaluate_cascade(ch.sc, ch.forwarders).objective;
    const size_t kr = static_cast<size_t>(t) % ch.forwarders.size();
    ch.forwarders[kr] = ch.forwarders[kr] * random_unitary(ch.forwarders[kr].cols(), rng);
    worst_rotation = std::max(worst_rotation, rel(before, evaluate_cascade(ch.sc, ch.forwarders).objective));
    for (size_t i = 0; i < ch.sc.constraints.size(); ++i) ch.sc.constraints[i] = family(t, ch.sc.est_channels[i].cols());
    check_trace(cascade_solve(ch.sc).objective_trace, false);
    ++relay_runs;
  }
  Outcome o;
  o.pass = worst_rotation < 1e-9 && worst_drop <= 1e-8;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "rotation change %.1e; worst monotonicity violation %.1e over %d/%d/%d solves",
                worst_rotation, worst_drop, uplink_runs, sensor_runs, relay_runs);
  o.detail = buf;
  return o;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const auto dir = std::filesystem::temp_directory_path() / "mmo_acceptance";
  std::filesystem::create_directories(dir);
  int identical = 0, total = 0;
  for (const char* name : {"uplink_per_antenna.json", "sensor_fusion.json", "relay_robust.json"}) {
    sim::ExperimentConfig cfg = sim::load_config(config_path(name));
    cfg.trials = 3;
    cfg.snr_db = {0.0, 20.0};
    sim::RunOptions par;
    par.parallel = 2;
    const auto a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
    sim::write_csv_atomic(a.string(), sim::run_experiment(cfg));
    sim::write_csv_atomic(b.string(), sim::run_experiment(cfg));
    sim::write_csv_atomic(c.string(), sim::run_experiment(cfg, par));
    const std::string first = read_file(a);
    total += 1;
    if (!first.empty() && first == read_file(b) && first == read_file(c)) ++identical;
  }
  std::filesystem::remove_all(dir);
  Outcome o;
  o.pass = identical == total;
  o.detail = fmt("%g/%g scenarios byte-identical across reruns and worker counts", identical, total);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"uplink closed form vs gradient oracle", uplink_agreement},
      {"constraint families feasible and undominated", constraint_families},
      {"water-filling vs grid search", waterfill_equivalence},
      {"sensor determinant split and MI vs baseline", sensor_fusion},
      {"relay matrix path vs eigenvalue composition", relay_consistency},
      {"robust vs non-robust relay trend", robust_trend},
      {"rotation invariance and monotone solvers", invariance},
      {"byte-identical reruns", reproducibility},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s  %s (%s) [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
