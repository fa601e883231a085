#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/rng.hpp"

namespace mfabc {

/// A density we can evaluate and draw from. Serves as prior and as the
/// importance proposal of the pre-filtering sampler.
class Distribution {
 public:
  virtual ~Distribution() = default;
  [[nodiscard]] virtual std::size_t dimension() const = 0;
  [[nodiscard]] virtual double density(std::span<const double> theta) const = 0;
  virtual ParameterVector sample(RngStream& rng) const = 0;
};

using Prior = Distribution;

/// Independent uniforms on a box; density prod 1/(hi_j - lo_j) inside, 0 outside.
class UniformBoxPrior final : public Distribution {
 public:
  UniformBoxPrior(std::vector<double> lower, std::vector<double> upper);

  [[nodiscard]] std::size_t dimension() const override { return lower_.size(); }
  [[nodiscard]] double density(std::span<const double> theta) const override;
  ParameterVector sample(RngStream& rng) const override;

  [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  double density_ = 0.0;
};

/// Uniform over a finite set of scalar support points.
class GridPrior final : public Distribution {
 public:
  explicit GridPrior(std::vector<double> points);

  [[nodiscard]] std::size_t dimension() const override { return 1; }
  [[nodiscard]] double density(std::span<const double> theta) const override;
  ParameterVector sample(RngStream& rng) const override;

  [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
  /// Index of the support point equal to theta (within 1e-9), or npos.
  [[nodiscard]] std::size_t index_of(double theta) const noexcept;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<double> points_;
};

/// Markov proposal q(theta* | theta) used by the MH rejuvenation moves.
class ProposalKernel {
 public:
  virtual ~ProposalKernel() = default;
  /// Refits kernel parameters to the current weighted particle cloud.
  virtual void adapt(std::span<const ParticleState> particles, std::span<const double> weights) = 0;
  virtual ParameterVector propose(const ParameterVector& from, RngStream& rng) const = 0;
  /// q(to | from), up to a constant shared by every evaluation.
  [[nodiscard]] virtual double density(const ParameterVector& to, const ParameterVector& from) const = 0;
};

/// Gaussian random walk with covariance scale * (weighted sample covariance).
class GaussianRandomWalk final : public ProposalKernel {
 public:
  explicit GaussianRandomWalk(std::size_t dimension, double scale = 2.0);

  void adapt(std::span<const ParticleState> particles, std::span<const double> weights) override;
  ParameterVector propose(const ParameterVector& from, RngStream& rng) const override;
  [[nodiscard]] double density(const ParameterVector& to, const ParameterVector& from) const override;

  /// Row-major lower Cholesky factor of the current proposal covariance.
  [[nodiscard]] const std::vector<double>& cholesky() const noexcept { return chol_; }
  void set_covariance(std::span<const double> row_major);

 private:
  std::size_t dim_;
  double scale_;
  std::vector<double> chol_;
  double log_norm_ = 0.0;
};

/// Symmetric random walk on GridPrior support: moves by a uniformly chosen
/// nonzero offset in [-max_step, max_step] grid spacings. Proposals may leave
/// the grid; the prior then rejects them.
class GridRandomWalk final : public ProposalKernel {
 public:
  GridRandomWalk(double spacing, int max_step);

  void adapt(std::span<const ParticleState>, std::span<const double>) override {}
  ParameterVector propose(const ParameterVector& from, RngStream& rng) const override;
  [[nodiscard]] double density(const ParameterVector& to, const ParameterVector& from) const override;

 private:
  double spacing_;
  int max_step_;
};

}  // namespace mfabc
