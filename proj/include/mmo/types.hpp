// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mmo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. Everything derives from std::runtime_error so callers can
// catch broadly; the subtypes let tests and the CLI map failures precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotPsd : public Error {
 public:
  using Error::Error;
};

class UnsupportedRank : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical knobs shared by the solvers. Defaults are the values the test
// suites are pinned against; change them only through a copy.
struct Tolerances {
  double hermitian_symmetry = 1e-10;
  double eig_tie_gap = 1e-10;
  double psd_clamp = 1e-10;
  double psd_reject = 1e-6;  // relative to the matrix 2-norm
  int waterfill_bisection_iters = 200;
  int subgradient_max_iters = 20000;
  double subgradient_violation = 1e-9;  // relative to each budget
  double subgradient_slackness = 1e-9;
  double weight_condition_limit = 1e12;
  double weight_regularization = 1e-10;  // times trace/n
  double denominator_margin = 1e-6;
  double gmd_diagonal = 1e-10;
  double feasibility = 1e-8;
};

const Tolerances& default_tolerances();

}  // namespace mmo
