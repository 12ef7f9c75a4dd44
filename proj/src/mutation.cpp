#include "phylo/mutation.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace phylo {

namespace {
constexpr double kTol = 1e-12;
}

RateConstants derive_constants(const Eigen::MatrixXd& Q) {
  const int h = static_cast<int>(Q.rows());
  if (h < 2 || Q.cols() != h)
    throw std::invalid_argument("derive_constants: Q must be square, size >= 2");

  double eta = 0.0, gamma = 0.0;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < h; ++j) {
      const double q = Q(i, j);
      gamma = std::max(gamma, std::abs(q));
      if (q > 0.0 && (eta == 0.0 || q < eta)) eta = q;
    }
  }
  if (eta == 0.0) throw std::invalid_argument("derive_constants: Q has no positive entry");

  // Boolean powers of the support of |Q| until strictly positive.
  using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMat support(h, h), power(h, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) support(i, j) = std::abs(Q(i, j)) > 0.0;
  power = support;
  int w = 1;
  auto all_positive = [&](const BoolMat& m) {
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j)
        if (!m(i, j)) return false;
    return true;
  };
  while (!all_positive(power)) {
    if (++w > h * h)
      throw std::invalid_argument("derive_constants: Q is not irreducible");
    BoolMat next(h, h);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j) {
        bool v = false;
        for (int k = 0; k < h && !v; ++k) v = power(i, k) && support(k, j);
        next(i, j) = v;
      }
    power = next;
  }
  return {eta, gamma, w};
}

MutationModel MutationModel::create(std::string symbols, Eigen::MatrixXd Q,
                                    Eigen::VectorXd root_dist) {
  const int h = static_cast<int>(symbols.size());
  if (h < 2) throw std::invalid_argument("MutationModel: need at least two alleles");
  if (Q.rows() != h || Q.cols() != h || root_dist.size() != h)
    throw std::invalid_argument("MutationModel: dimension mismatch");
  for (int i = 0; i < h; ++i) {
    if (std::abs(Q.row(i).sum()) > kTol)
      throw std::invalid_argument("MutationModel: Q rows must sum to zero");
    for (int j = 0; j < h; ++j)
      if (i != j && Q(i, j) < 0.0)
        throw std::invalid_argument("MutationModel: negative off-diagonal rate");
    if (root_dist(i) <= 0.0)
      throw std::invalid_argument("MutationModel: root distribution must be positive");
  }
  if (std::abs(root_dist.sum() - 1.0) > kTol)
    throw std::invalid_argument("MutationModel: root distribution must sum to one");

  MutationModel m;
  m.symbols_ = std::move(symbols);
  m.q_ = std::move(Q);
  m.root_ = std::move(root_dist);
  const auto rc = derive_constants(m.q_);
  m.eta_ = rc.eta;
  m.gamma_ = rc.gamma;
  m.w_ = rc.w;

  m.reversible_ = true;
  for (int i = 0; i < h && m.reversible_; ++i)
    for (int j = 0; j < h; ++j)
      if (std::abs(m.root_(i) * m.q_(i, j) - m.root_(j) * m.q_(j, i)) > kTol) {
        m.reversible_ = false;
        break;
      }

  if (m.reversible_) {
    // Symmetrize by similarity with diag(sqrt(r)); the symmetric part has a
    // real spectrum and orthogonal eigenvectors.
    Eigen::VectorXd sqrt_r = m.root_.array().sqrt();
    Eigen::MatrixXd sym(h, h);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < h; ++j)
        sym(i, j) = sqrt_r(i) * m.q_(i, j) / sqrt_r(j);
    sym = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    m.evals_ = es.eigenvalues();
    const Eigen::MatrixXd v = es.eigenvectors();
    m.left_ = sqrt_r.cwiseInverse().asDiagonal() * v;
    m.right_ = v.transpose() * Eigen::MatrixXd(sqrt_r.asDiagonal());
    m.spectral_ = true;
  }
  return m;
}

MutationModel MutationModel::binary_symmetric(double mu) {
  if (mu <= 0.0) throw std::invalid_argument("binary_symmetric: mu must be positive");
  Eigen::MatrixXd q(2, 2);
  q << -mu, mu, mu, -mu;
  Eigen::VectorXd r(2);
  r << 0.5, 0.5;
  return create("01", q, r);
}

MutationModel MutationModel::jukes_cantor(double mu) {
  if (mu <= 0.0) throw std::invalid_argument("jukes_cantor: mu must be positive");
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(4, 4, mu);
  for (int i = 0; i < 4; ++i) q(i, i) = -3.0 * mu;
  Eigen::VectorXd r = Eigen::VectorXd::Constant(4, 0.25);
  return create("ACGT", q, r);
}

Eigen::MatrixXd MutationModel::transition(double t) const {
  if (t < 0.0 || !std::isfinite(t))
    throw std::invalid_argument("transition: time must be finite and nonnegative");
  const int h = size();
  if (t == 0.0) return Eigen::MatrixXd::Identity(h, h);

  if (spectral_) {
    Eigen::VectorXd e = (evals_.array() * t).exp();
    Eigen::MatrixXd p = left_ * e.asDiagonal() * right_;
    // Round-off can leave tiny negatives in near-zero cells.
    return p.cwiseMax(0.0);
  }

  // Scaling and squaring with a truncated series.
  Eigen::MatrixXd a = q_ * t;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    a /= std::pow(2.0, squarings);
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(h, h);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(h, h);
  for (int k = 1; k <= 40; ++k) {
    term = (term * a) / static_cast<double>(k);
    p += term;
    if (term.cwiseAbs().maxCoeff() < 1e-19) break;
  }
  for (int s = 0; s < squarings; ++s) p = p * p;
  return p.cwiseMax(0.0);
}

Eigen::VectorXd MutationModel::stationary() const {
  const int h = size();
  // Solve pi^T Q = 0 with the normalization sum(pi) = 1.
  Eigen::MatrixXd a = q_.transpose();
  a.row(h - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(h);
  b(h - 1) = 1.0;
  return a.fullPivLu().solve(b);
}

double MutationModel::min_diagonal_transition() const {
  const Eigen::VectorXd pi = stationary();
  double best = std::min(1.0, pi.minCoeff());

  double lo = 1e-4 / gamma_, hi = 200.0 / gamma_;
  double best_t = 0.0;
  for (int round = 0; round < 6; ++round) {
    const int grid = 512;
    double round_best = best;
    for (int g = 0; g <= grid; ++g) {
      const double t = lo * std::pow(hi / lo, static_cast<double>(g) / grid);
      const double d = transition(t).diagonal().minCoeff();
      if (d < round_best) {
        round_best = d;
        best_t = t;
      }
    }
    if (std::abs(best - round_best) < 1e-9 && round > 0) {
      best = std::min(best, round_best);
      break;
    }
    best = std::min(best, round_best);
    if (best_t > 0.0) {
      lo = best_t * 0.8;
      hi = best_t * 1.25;
    }
  }
  return best;
}

}  // namespace phylo
