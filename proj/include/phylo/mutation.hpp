#pragma once

#include <Eigen/Dense>
#include <string>

namespace phylo {

// Finite-alphabet substitution model: an irreducible rate matrix Q over the
// allele set, a strictly positive root distribution, and the constants the
// divergence bounds depend on:
//   eta   - least positive entry of Q,
//   gamma - entry of Q with maximal magnitude,
//   w     - least j with all entries of |Q|^j strictly positive.
class MutationModel {
 public:
  static MutationModel create(std::string symbols, Eigen::MatrixXd Q,
                              Eigen::VectorXd root_dist);
  static MutationModel binary_symmetric(double mu);
  static MutationModel jukes_cantor(double mu);

  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbols() const { return symbols_; }
  const Eigen::MatrixXd& Q() const { return q_; }
  const Eigen::VectorXd& root_dist() const { return root_; }
  double eta() const { return eta_; }
  double gamma() const { return gamma_; }
  int w() const { return w_; }
  bool reversible() const { return reversible_; }

  // Row-stochastic exp(Q t); throws for negative t.
  Eigen::MatrixXd transition(double t) const;

  Eigen::VectorXd stationary() const;

  // min over alleles and t >= 0 of exp(Qt)_{aa}, by a refined grid search
  // together with the t -> infinity limit.
  double min_diagonal_transition() const;

 private:
  MutationModel() = default;

  std::string symbols_;
  Eigen::MatrixXd q_;
  Eigen::VectorXd root_;
  double eta_ = 0.0, gamma_ = 0.0;
  int w_ = 0;
  bool reversible_ = false;

  // Spectral factorization exp(Qt) = left * diag(exp(evals t)) * right,
  // available when Q is reversible with respect to the root distribution.
  bool spectral_ = false;
  Eigen::MatrixXd left_, right_;
  Eigen::VectorXd evals_;
};

// (eta, gamma, w) for a raw rate matrix; throws if Q is reducible.
struct RateConstants {
  double eta;
  double gamma;
  int w;
};
RateConstants derive_constants(const Eigen::MatrixXd& Q);

}  // namespace phylo
