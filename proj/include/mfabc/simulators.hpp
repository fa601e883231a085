#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mfabc/core.hpp"
#include "mfabc/rng.hpp"

namespace mfabc {

/// A stochastic (or deterministic) simulator at one fidelity level together
/// with its summary statistics and discrepancy.
///
/// Raw outputs are flat real vectors whose layout is fixed per model. The call
/// counter increments exactly once per sample() call and is safe to bump from
/// several threads.
class Simulator {
 public:
  Simulator() = default;
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;
  virtual ~Simulator() = default;

  std::vector<double> sample(std::span<const double> theta, RngStream& rng) const {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_sample(theta, rng);
  }
  [[nodiscard]] virtual std::vector<double> summarize(std::span<const double> raw) const = 0;
  [[nodiscard]] virtual double discrepancy(std::span<const double> summary,
                                           std::span<const double> observed_summary) const = 0;

  /// sample -> summarize -> discrepancy against an observed summary.
  double distance(std::span<const double> theta, RngStream& rng, std::span<const double> observed_summary) const {
    return discrepancy(summarize(sample(theta, rng)), observed_summary);
  }

  [[nodiscard]] std::uint64_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  void reset_calls() noexcept { calls_.store(0, std::memory_order_relaxed); }

 protected:
  virtual std::vector<double> do_sample(std::span<const double> theta, RngStream& rng) const = 0;

 private:
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// High- and low-fidelity simulators sharing one parameter space and data space.
///
/// Simulation k of a work item draws from item.child(tag, k). With
/// common_random_numbers the LF draws reuse the HF tag, so an LF simulator
/// identical to the HF one replays exactly the same outputs.
struct FidelityPair {
  std::shared_ptr<const Simulator> hf;
  std::shared_ptr<const Simulator> lf;
  std::vector<double> observed_hf_summary;
  std::vector<double> observed_lf_summary;
  bool common_random_numbers = false;

  [[nodiscard]] std::vector<double> hf_distances(std::span<const double> theta, const RngStream& item,
                                                 std::size_t n) const;
  [[nodiscard]] std::vector<double> lf_distances(std::span<const double> theta, const RngStream& item,
                                                 std::size_t n) const;
};

// ---------------------------------------------------------------------------
// Toy nonlinear Gaussian model. Raw output is a single real.

double toy_hf_mean(double theta) noexcept;
double toy_lf_mean(double theta) noexcept;
inline constexpr double kToyNoiseSd = 0.2;

double toy_hf_sample(double theta, RngStream& rng);
double toy_lf_sample(double theta, RngStream& rng);

enum class Fidelity { kHigh, kLow };

/// Toy discrepancy: |x - y| or (x - y)^2.
enum class ToyDistance { kAbsolute, kSquared };

/// Half-width w with {x : distance(x, y) < eps} = (y - w, y + w).
double toy_window(double eps, ToyDistance distance) noexcept;

/// Toy simulator; summary is the output itself.
class ToySimulator final : public Simulator {
 public:
  explicit ToySimulator(Fidelity fidelity, ToyDistance distance = ToyDistance::kSquared)
      : fidelity_(fidelity), distance_(distance) {}
  [[nodiscard]] std::vector<double> summarize(std::span<const double> raw) const override;
  [[nodiscard]] double discrepancy(std::span<const double> summary, std::span<const double> observed) const override;

 protected:
  std::vector<double> do_sample(std::span<const double> theta, RngStream& rng) const override;

 private:
  Fidelity fidelity_;
  ToyDistance distance_;
};

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck model, theta = (mu, sigma, gamma, mu_offset).

struct OuOptions {
  double dt = 0.01;
  double horizon = 30.0;
  double record_interval = 0.1;
  double initial_sd = 0.1;
  /// Divisor of the stationary-mean statistic over x_151..x_301 (151 terms).
  double s1_divisor = 150.0;
  std::size_t lf_points = 200;
};

/// Euler-Maruyama path recorded every record_interval: x_1 = X(0) ... X(horizon).
std::vector<double> ou_hf_sample(std::span<const double> theta, RngStream& rng, const OuOptions& options = {});
/// lf_points iid draws from N(mu, (sigma / (2.5 gamma))^2).
std::vector<double> ou_lf_sample(std::span<const double> theta, RngStream& rng, const OuOptions& options = {});

/// (S1, 10 sd(x_151:301), x_1 - S1, x_1 - x_21); requires 301 points.
std::vector<double> ou_hf_summary(std::span<const double> trajectory, double s1_divisor = 150.0);
/// (mean, 10 sd) of the LF points.
std::vector<double> ou_lf_summary(std::span<const double> points);
/// Sample standard deviation (n - 1 divisor).
double sample_sd(std::span<const double> values);

class OuHfSimulator final : public Simulator {
 public:
  explicit OuHfSimulator(OuOptions options = {}) : options_(options) {}
  [[nodiscard]] std::vector<double> summarize(std::span<const double> raw) const override;
  /// (1/4) ||S(x) - S(y)||^2
  [[nodiscard]] double discrepancy(std::span<const double> summary, std::span<const double> observed) const override;

 protected:
  std::vector<double> do_sample(std::span<const double> theta, RngStream& rng) const override;

 private:
  OuOptions options_;
};

class OuLfSimulator final : public Simulator {
 public:
  explicit OuLfSimulator(OuOptions options = {}) : options_(options) {}
  [[nodiscard]] std::vector<double> summarize(std::span<const double> raw) const override;
  /// (1/2) ||S~(x~) - S_{1,2}(y)||^2
  [[nodiscard]] double discrepancy(std::span<const double> summary, std::span<const double> observed) const override;

 protected:
  std::vector<double> do_sample(std::span<const double> theta, RngStream& rng) const override;

 private:
  OuOptions options_;
};

// ---------------------------------------------------------------------------
// Kuramoto network, theta = (K, omega0, gamma). Raw output is R on the time
// grid followed by the unwrapped phase Phi on the same grid.

struct KuramotoOptions {
  std::size_t oscillators = 32;
  double dt = 0.1;
  double horizon = 20.0;
  /// Window [lo, hi] whose mean of R_obs defines the long-term level for T_1/2.
  double long_term_lo = 10.0;
  double long_term_hi = 20.0;

  [[nodiscard]] std::size_t steps() const noexcept;
};

/// location + scale * tan(pi (u - 1/2)). Throws NonPositiveScale.
double cauchy_sample(double location, double scale, RngStream& rng);
double cauchy_from_uniform(double location, double scale, double u);

std::vector<double> kuramoto_hf_sample(std::span<const double> theta, RngStream& rng,
                                       const KuramotoOptions& options = {});
std::vector<double> kuramoto_lf_sample(std::span<const double> theta, const KuramotoOptions& options = {});

/// Grid index of the earliest time R_obs reaches the midpoint between R_obs(0)
/// and its mean over the long-term window.
std::size_t kuramoto_half_time_index(std::span<const double> r_obs, const KuramotoOptions& options = {});

/// ((1/T int R dt)^2, (Phi(T) - Phi(0)) / T, R(T_1/2)); trapezoid quadrature.
std::vector<double> kuramoto_summary(std::span<const double> raw, std::size_t half_time_index,
                                     const KuramotoOptions& options = {});

class KuramotoSimulator final : public Simulator {
 public:
  KuramotoSimulator(Fidelity fidelity, std::size_t half_time_index, KuramotoOptions options = {})
      : fidelity_(fidelity), half_time_index_(half_time_index), options_(options) {}
  [[nodiscard]] std::vector<double> summarize(std::span<const double> raw) const override;
  /// ||S - S_obs||^2
  [[nodiscard]] double discrepancy(std::span<const double> summary, std::span<const double> observed) const override;

 protected:
  std::vector<double> do_sample(std::span<const double> theta, RngStream& rng) const override;

 private:
  Fidelity fidelity_;
  std::size_t half_time_index_;
  KuramotoOptions options_;
};

}  // namespace mfabc
