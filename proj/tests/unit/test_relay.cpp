#include "doctest.h"
#include "mmo/gmd.hpp"
#include "mmo/oracle.hpp"
#include "mmo/relay.hpp"
#include "test_helpers.hpp"

using namespace mmo;
using namespace mmo::testing;

namespace {

struct Chain {
  RelayScenario sc;
  std::vector<CMatrix> forwarders;
};

// Random chain: hop k maps dims[k] inputs through an n_tx x dims[k] forwarder
// and an dims[k+1] x n_tx channel.
Chain random_chain(const std::vector<Index>& dims, Rng& rng, ObjectiveKind kind = ObjectiveKind::LogDetMse,
                   double error = 0.05) {
  Chain c;
  c.sc.source_dim = dims.front();
  c.sc.source_var = 0.7 + random_uniform(1, rng)(0);
  c.sc.objective.kind = kind;
  if (kind == ObjectiveKind::WeightedMse) c.sc.objective.weight_matrix = random_psd(dims.front(), rng, 0.1);
  for (size_t k = 0; k + 1 < dims.size(); ++k) {
    const Index tx = dims[k] + static_cast<Index>(rng() % 2);
    c.sc.est_channels.push_back(complex_gaussian(dims[k + 1], tx, rng));
    c.sc.error_covs.push_back(error * exp_corr(tx, 0.6));
    c.sc.noise_vars.push_back(0.2 + random_uniform(1, rng)(0));
    c.sc.constraints.push_back(sum_power(tx, 4.0));
    c.forwarders.push_back(complex_gaussian(tx, dims[k], rng));
  }
  return c;
}

// Independent LMMSE evaluation: propagate the signal covariance hop by hop
// through the realized transforms X_k and form the estimator's error matrix.
CMatrix lmmse_error(const RelayScenario& sc, const std::vector<CMatrix>& forwarders,
                    const std::vector<CMatrix>& rotations, const CMatrix& feedback) {
  const Index n0 = sc.source_dim;
  const CMatrix r0 = sc.source_var * CMatrix::Identity(n0, n0);
  CMatrix r_prev = r0;
  CMatrix g = CMatrix::Identity(n0, n0);
  CMatrix m_prev_inv;
  double k_prev = 1.0;
  for (size_t k = 0; k < forwarders.size(); ++k) {
    CMatrix x = forwarders[k] * rotations[k];
    if (k == 0) {
      x /= std::sqrt(sc.source_var);
    } else {
      x = x * m_prev_inv / std::sqrt(k_prev);
    }
    const CMatrix& h = sc.est_channels[k];
    const double level = sc.noise_vars[k] + (x * r_prev * x.adjoint() * sc.error_covs[k]).trace().real();
    const CMatrix hx = h * x;
    r_prev = hx * r_prev * hx.adjoint() + level * CMatrix::Identity(h.rows(), h.rows());
    g = hx * g;
    const CMatrix f = forwarders[k];
    const CMatrix m2 = h * f * f.adjoint() * h.adjoint() / level + CMatrix::Identity(h.rows(), h.rows());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m2);
    m_prev_inv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    k_prev = level;
  }
  const CMatrix cross = r0 * g.adjoint();
  const CMatrix err = r0 - cross * r_prev.ldlt().solve(cross.adjoint());
  return feedback * err * feedback.adjoint();
}

}  // namespace

TEST_CASE("noise level and amplification") {
  Rng rng(51);
  const CMatrix f = complex_gaussian(3, 2, rng);
  const CMatrix psi = random_psd(3, rng);
  double direct = 0.3;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) direct += ((f * f.adjoint())(i, j) * psi(j, i)).real();
  CHECK(std::abs(hop_noise_level(f, psi, 0.3) - direct) < 1e-12);
  const CMatrix h = complex_gaussian(4, 3, rng);
  const CMatrix m = hop_amplification(f, h, 1.7);
  const CMatrix want = h * f * f.adjoint() * h.adjoint() / 1.7 + CMatrix::Identity(4, 4);
  CHECK((m * m - want).norm() < 1e-9);
}

TEST_CASE("scalar hop reduces to the scalar LMMSE error") {
  RelayScenario sc;
  sc.source_dim = 1;
  sc.source_var = 1.5;
  sc.est_channels = {CMatrix::Constant(1, 1, 0.8)};
  sc.error_covs = {CMatrix::Zero(1, 1)};
  sc.noise_vars = {0.5};
  sc.constraints = {sum_power(1, 4.0)};
  const std::vector<CMatrix> f = {CMatrix::Constant(1, 1, 1.3)};
  const auto ev = evaluate_cascade(sc, f);
  const double g2 = 0.8 * 0.8 * 1.3 * 1.3 / 0.5;
  CHECK(ev.mse.matrix(0, 0).real() == doctest::Approx(1.5 * (1.0 - g2 / (1.0 + g2))).epsilon(1e-12));
}

TEST_CASE("cascade MSE matches the direct LMMSE evaluation") {
  Rng rng(52);
  for (int t = 0; t < 20; ++t) {
    for (auto kind : {ObjectiveKind::LogDetMse, ObjectiveKind::MaxMse, ObjectiveKind::MaxCholesky}) {
      const Chain c = random_chain({2, 3, 2}, rng, kind);
      const auto ev = evaluate_cascade(c.sc, c.forwarders);
      const CMatrix direct = lmmse_error(c.sc, c.forwarders, ev.rotations, ev.feedback);
      CHECK((ev.mse.matrix - direct).norm() < 1e-9 * std::max(1.0, direct.norm()));
    }
  }
}

TEST_CASE("cascade singular values are per-hop products") {
  Rng rng(53);
  for (int t = 0; t < 20; ++t) {
    std::vector<CMatrix> ops = {complex_gaussian(3, 3, rng), complex_gaussian(3, 3, rng)};
    const auto q = inner_rotations(ops);
    const CMatrix b = cascade_product(ops, {CMatrix::Identity(3, 3), q[1]});
    const RVector want = (sorted_svd(ops[0]).singvals.array() * sorted_svd(ops[1]).singvals.array()).matrix();
    CHECK((sorted_svd(b).singvals - want).norm() < 1e-9);
  }
  RMatrix p(3, 3);
  p << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const CMatrix a1 = (p * RVector((RVector(3) << 3, 2, 1).finished()).asDiagonal() * p.transpose()).cast<Complex>();
  const CMatrix a2 = (p.transpose() * RVector((RVector(3) << 5, 4, 0.5).finished()).asDiagonal()).cast<Complex>();
  const std::vector<CMatrix> ops = {a1, a2};
  const auto q = inner_rotations(ops);
  const RVector got = sorted_svd(cascade_product(ops, {CMatrix::Identity(3, 3), q[1]})).singvals;
  CHECK(got(0) == doctest::Approx(15));
  CHECK(got(1) == doctest::Approx(8));
  CHECK(got(2) == doctest::Approx(0.5));
}

TEST_CASE("DFT rotation equalizes the MSE diagonal") {
  const CMatrix d2 = dft_matrix(2);
  CMatrix want(2, 2);
  want << 1, 1, 1, -1;
  CHECK((d2 - want / std::sqrt(2.0)).norm() < 1e-15);
  Rng rng(54);
  for (int t = 0; t < 20; ++t) {
    const Chain c = random_chain({3, 3, 3}, rng, ObjectiveKind::MaxMse);
    const auto ev = evaluate_cascade(c.sc, c.forwarders);
    const RVector d = ev.mse.matrix.diagonal().real();
    CHECK(d.maxCoeff() - d.minCoeff() < 1e-8);
  }
}

TEST_CASE("geometric mean decomposition") {
  Rng rng(55);
  for (int t = 0; t < 50; ++t) {
    const RVector s = random_uniform(4, rng, 0.1, 3.0);
    const auto g = gmd_diagonal(s);
    const double mean = std::exp(s.array().log().mean());
    CHECK((g.q * g.r * g.p.transpose() - RMatrix(s.asDiagonal())).norm() < 1e-10);
    CHECK((g.r.diagonal().array() - mean).abs().maxCoeff() < 1e-10);
    CHECK(g.r.triangularView<Eigen::StrictlyLower>().toDenseMatrix().norm() < 1e-14);
    CHECK((g.q.transpose() * g.q - RMatrix::Identity(4, 4)).norm() < 1e-10);
    CHECK((g.p.transpose() * g.p - RMatrix::Identity(4, 4)).norm() < 1e-10);
  }
  for (int t = 0; t < 20; ++t) {
    const Chain c = random_chain({3, 3, 3}, rng, ObjectiveKind::MaxCholesky);
    const auto ev = evaluate_cascade(c.sc, c.forwarders);
    const RVector l = mse_tilde(c.sc.source_var, ev.product).llt().matrixL().toDenseMatrix().diagonal().real();
    CHECK(l.maxCoeff() - l.minCoeff() < 1e-8);
  }
}

TEST_CASE("feedback matrix") {
  CMatrix l(2, 2);
  l << 1, 0, 1, 1;
  const CMatrix c = feedback_matrix(l * l.adjoint());
  CMatrix want(2, 2);
  want << 1, 0, -1, 1;
  CHECK((c - want).norm() < 1e-12);
  Rng rng(56);
  for (int t = 0; t < 20; ++t) {
    const CMatrix f = feedback_matrix(random_psd(4, rng, 0.2));
    for (Index i = 0; i < 4; ++i) {
      CHECK(f(i, i) == Complex(1.0, 0.0));
      for (Index j = i + 1; j < 4; ++j) CHECK(f(i, j) == Complex(0.0, 0.0));
    }
  }
}

TEST_CASE("matrix path equals the eigenvalue composition for every objective") {
  Rng rng(57);
  for (int kind = 1; kind <= 6; ++kind) {
    for (int t = 0; t < 15; ++t) {
      const Index hops = 1 + t % 3;
      std::vector<Index> dims(static_cast<size_t>(hops + 1));
      for (auto& d : dims) d = 2 + static_cast<Index>(rng() % 2);
      const Chain c = random_chain(dims, rng, objective_kind_from_index(kind));
      const double matrix = evaluate_cascade(c.sc, c.forwarders).objective;
      const double eigen = objective_from_eigen(c.sc.objective, c.sc.source_var,
                                                hop_eigenvalues(c.sc, c.forwarders), c.sc.source_dim);
      CHECK(std::abs(matrix - eigen) < 1e-8 * std::max(1.0, std::abs(eigen)));
    }
  }
}

TEST_CASE("eigen rate matches the log-determinant of the MSE matrix") {
  Rng rng(58);
  for (int t = 0; t < 20; ++t) {
    const Chain c = random_chain({2, 3, 2}, rng);
    const auto ev = evaluate_cascade(c.sc, c.forwarders);
    const double rate = f_eigen(EigenForm::SumRate, c.sc.source_var, hop_eigenvalues(c.sc, c.forwarders), 2);
    const double from_matrix = 2.0 * std::log(c.sc.source_var) - log_det_hpd(ev.mse.matrix);
    CHECK(std::abs(rate - from_matrix) < 1e-8);
    const double mse = f_eigen(EigenForm::SumMse, c.sc.source_var, hop_eigenvalues(c.sc, c.forwarders), 2);
    CHECK(std::abs(mse - ev.mse.matrix.trace().real()) < 1e-8);
  }
  const std::vector<RVector> silent = {RVector::Zero(3)};
  CHECK(f_eigen(EigenForm::SumMse, 2.0, silent, 3) == doctest::Approx(6.0));
}

TEST_CASE("single hop with perfect CSI reaches water-filling capacity") {
  Rng rng(59);
  RelayScenario sc;
  sc.source_dim = 3;
  sc.source_var = 1.0;
  sc.est_channels = {complex_gaussian(3, 3, rng)};
  sc.error_covs = {CMatrix::Zero(3, 3)};
  sc.noise_vars = {0.5};
  sc.constraints = {sum_power(3, 4.0)};
  const auto st = cascade_solve(sc);
  const double rate = relay_sum_rate(sc, dense_forwarders(st));
  const CMatrix pi = sc.est_channels[0].adjoint() * sc.est_channels[0] / 0.5;
  const RVector lam = sorted_evd(pi).eigvals;
  const double capacity = (lam.array() * waterfill(lam, 4.0).powers.array()).log1p().sum();
  CHECK(rel_diff(rate, capacity) < 1e-3);
}

TEST_CASE("cascade solve is monotone and feasible for every family") {
  Rng rng(60);
  const std::vector<PowerConstraint> families = {ShapingConstraint{exp_corr(3, 0.6)}, JointConstraint{4.0, 1.4},
                                                 per_antenna({1.0, 1.0, 1.0})};
  for (int kind = 1; kind <= 6; ++kind) {
    for (const auto& fam : families) {
      Chain c = random_chain({3, 3, 3}, rng, objective_kind_from_index(kind), 0.01);
      for (auto& h : c.sc.est_channels) h = complex_gaussian(3, 3, rng);
      for (auto& psi : c.sc.error_covs) psi = 0.01 * exp_corr(3, 0.6);
      c.sc.constraints = {fam, fam};
      const auto st = cascade_solve(c.sc);
      for (size_t i = 1; i < st.objective_trace.size(); ++i) {
        CHECK(st.objective_trace[i] <= st.objective_trace[i - 1] + 1e-8 * std::max(1.0, std::abs(st.objective_trace[i - 1])));
      }
      for (const auto& f : st.forwarders_F) CHECK(is_feasible(fam, f.dense, 1e-6));
    }
  }
}

TEST_CASE("right rotation of a forwarder leaves the objective unchanged") {
  Rng rng(61);
  for (int t = 0; t < 20; ++t) {
    Chain c = random_chain({2, 3, 3, 2}, rng, objective_kind_from_index(1 + t % 6));
    const double before = evaluate_cascade(c.sc, c.forwarders).objective;
    const size_t k = static_cast<size_t>(t) % c.forwarders.size();
    c.forwarders[k] = c.forwarders[k] * random_unitary(c.forwarders[k].cols(), rng);
    const double after = evaluate_cascade(c.sc, c.forwarders).objective;
    CHECK(std::abs(before - after) < 1e-9 * std::max(1.0, std::abs(before)));
  }
}

TEST_CASE("robust design is not worse than the mismatched design") {
  Rng rng(62);
  int wins = 0;
  const int trials = 10;
  for (int t = 0; t < trials; ++t) {
    RelayScenario sc;
    sc.source_dim = 4;
    sc.source_var = 1.0;
    for (int k = 0; k < 2; ++k) {
      sc.est_channels.push_back(std::sqrt(1.0 - 0.008) * complex_gaussian(4, 4, rng));
      sc.error_covs.push_back(0.008 * exp_corr(4, 0.6));
      sc.noise_vars.push_back(4.0 / 100.0);
      sc.constraints.push_back(per_antenna({1, 1, 1, 1}));
    }
    const double robust = relay_sum_rate(sc, dense_forwarders(cascade_solve(sc)));
    const double naive = relay_sum_rate(sc, dense_forwarders(cascade_solve(perfect_csi(sc))));
    if (robust >= naive - 1e-9) ++wins;
  }
  CHECK(wins >= trials - 1);
}

TEST_CASE("scenario validation") {
  Rng rng(63);
  Chain c = random_chain({2, 2}, rng);
  CHECK_NOTHROW(c.sc.validate());
  c.sc.noise_vars[0] = 0.0;
  CHECK_THROWS_AS(c.sc.validate(), InvalidInput);
  Chain w = random_chain({2, 2}, rng, ObjectiveKind::WeightedMse);
  w.sc.objective.weight_matrix.reset();
  CHECK_THROWS_AS(w.sc.validate(), InvalidInput);
  CHECK_THROWS_AS(objective_kind_from_index(7), InvalidInput);
}
