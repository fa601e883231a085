#include "mfabc/distributions.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfabc/errors.hpp"

namespace mfabc {

UniformBoxPrior::UniformBoxPrior(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.empty()) {
    throw LengthMismatch("UniformBoxPrior: bounds must be nonempty and of equal length");
  }
  double volume = 1.0;
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(upper_[j] > lower_[j])) {
      throw Error("UniformBoxPrior: upper bound must exceed lower bound");
    }
    volume *= upper_[j] - lower_[j];
  }
  density_ = 1.0 / volume;
}

double UniformBoxPrior::density(std::span<const double> theta) const {
  if (theta.size() != lower_.size()) {
    throw LengthMismatch("UniformBoxPrior: parameter dimension mismatch");
  }
  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!(theta[j] >= lower_[j] && theta[j] <= upper_[j])) {
      return 0.0;
    }
  }
  return density_;
}

ParameterVector UniformBoxPrior::sample(RngStream& rng) const {
  ParameterVector theta(lower_.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    theta[j] = lower_[j] + (upper_[j] - lower_[j]) * rng.uniform();
  }
  return theta;
}

GridPrior::GridPrior(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) {
    throw Error("GridPrior: no support points");
  }
}

std::size_t GridPrior::index_of(double theta) const noexcept {
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (std::abs(points_[k] - theta) < 1e-9) {
      return k;
    }
  }
  return npos;
}

double GridPrior::density(std::span<const double> theta) const {
  if (theta.size() != 1) {
    throw LengthMismatch("GridPrior: parameter dimension mismatch");
  }
  return index_of(theta[0]) == npos ? 0.0 : 1.0 / static_cast<double>(points_.size());
}

ParameterVector GridPrior::sample(RngStream& rng) const {
  auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(points_.size()));
  k = std::min(k, points_.size() - 1);
  return {points_[k]};
}

GaussianRandomWalk::GaussianRandomWalk(std::size_t dimension, double scale)
    : dim_(dimension), scale_(scale), chol_(dimension * dimension, 0.0) {
  for (std::size_t j = 0; j < dim_; ++j) {
    chol_[j * dim_ + j] = 1.0;
  }
}

void GaussianRandomWalk::set_covariance(std::span<const double> row_major) {
  if (row_major.size() != dim_ * dim_) {
    throw LengthMismatch("GaussianRandomWalk: covariance size mismatch");
  }
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) {
      cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row_major[r * dim_ + c];
    }
  }
  double jitter = 1e-12 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  while (llt.info() != Eigen::Success) {
    cov.diagonal().array() += jitter;
    jitter *= 10.0;
    llt.compute(cov);
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  double log_det = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) {
      chol_[r * dim_ + c] = lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
    log_det += 2.0 * std::log(chol_[r * dim_ + r]);
  }
  log_norm_ = -0.5 * (static_cast<double>(dim_) * std::log(2.0 * std::numbers::pi) + log_det);
}

void GaussianRandomWalk::adapt(std::span<const ParticleState> particles, std::span<const double> weights) {
  if (particles.size() != weights.size()) {
    throw LengthMismatch("GaussianRandomWalk::adapt: particle and weight counts differ");
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    mean += weights[i] * Eigen::Map<const Eigen::VectorXd>(particles[i].theta.data(), d);
    total += weights[i];
  }
  if (total <= 0.0) {
    throw ZeroTotalMass("GaussianRandomWalk::adapt");
  }
  mean /= total;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (weights[i] <= 0.0) {
      continue;
    }
    const Eigen::VectorXd centered = Eigen::Map<const Eigen::VectorXd>(particles[i].theta.data(), d) - mean;
    cov += weights[i] * centered * centered.transpose();
  }
  cov *= scale_ / total;
  std::vector<double> flat(dim_ * dim_);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), d, d) = cov;
  set_covariance(flat);
}

ParameterVector GaussianRandomWalk::propose(const ParameterVector& from, RngStream& rng) const {
  std::vector<double> z(dim_);
  for (auto& v : z) {
    v = rng.normal(0.0, 1.0);
  }
  ParameterVector to = from;
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c <= r; ++c) {
      to[r] += chol_[r * dim_ + c] * z[c];
    }
  }
  return to;
}

double GaussianRandomWalk::density(const ParameterVector& to, const ParameterVector& from) const {
  // forward substitution L y = (to - from)
  std::vector<double> y(dim_);
  double quad = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    double v = to[r] - from[r];
    for (std::size_t c = 0; c < r; ++c) {
      v -= chol_[r * dim_ + c] * y[c];
    }
    y[r] = v / chol_[r * dim_ + r];
    quad += y[r] * y[r];
  }
  return std::exp(log_norm_ - 0.5 * quad);
}

GridRandomWalk::GridRandomWalk(double spacing, int max_step) : spacing_(spacing), max_step_(max_step) {
  if (!(spacing_ > 0.0) || max_step_ < 1) {
    throw Error("GridRandomWalk: spacing must be positive and max_step >= 1");
  }
}

ParameterVector GridRandomWalk::propose(const ParameterVector& from, RngStream& rng) const {
  const int choices = 2 * max_step_;
  int k = std::min(static_cast<int>(rng.uniform() * choices), choices - 1);
  const int offset = k < max_step_ ? k - max_step_ : k - max_step_ + 1;
  // snap to the lattice so repeated moves do not accumulate rounding drift
  return {std::round(from[0] / spacing_ + offset) * spacing_};
}

double GridRandomWalk::density(const ParameterVector& to, const ParameterVector& from) const {
  const double steps = std::round((to[0] - from[0]) / spacing_);
  if (steps == 0.0 || std::abs(steps) > max_step_) {
    return 0.0;
  }
  return 1.0 / (2.0 * max_step_);
}

}  // namespace mfabc
