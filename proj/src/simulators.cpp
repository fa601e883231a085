#include "mfabc/simulators.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

#include "mfabc/errors.hpp"
#include "mfabc/integrators.hpp"

namespace mfabc {

namespace {

void require_length(std::span<const double> values, std::size_t expected, const char* what) {
  if (values.size() != expected) {
    throw LengthMismatch(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                         std::to_string(values.size()));
  }
}

double squared_norm_diff(std::span<const double> a, std::span<const double> b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

std::size_t grid_steps(double horizon, double dt) {
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

}  // namespace

std::vector<double> FidelityPair::hf_distances(std::span<const double> theta, const RngStream& item,
                                               std::size_t n) const {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    RngStream rng = item.child(StreamTag::kHfSim, k);
    out[k] = hf->distance(theta, rng, observed_hf_summary);
  }
  return out;
}

std::vector<double> FidelityPair::lf_distances(std::span<const double> theta, const RngStream& item,
                                               std::size_t n) const {
  const StreamTag tag = common_random_numbers ? StreamTag::kHfSim : StreamTag::kLfSim;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    RngStream rng = item.child(tag, k);
    out[k] = lf->distance(theta, rng, observed_lf_summary);
  }
  return out;
}

// --- toy -------------------------------------------------------------------

double toy_hf_mean(double theta) noexcept {
  return 4.0 * theta * theta + 0.3 * std::cos(5.0 * std::numbers::pi * theta);
}

double toy_lf_mean(double theta) noexcept { return 4.0 * theta * theta; }

double toy_window(double eps, ToyDistance distance) noexcept {
  return distance == ToyDistance::kAbsolute ? eps : std::sqrt(eps);
}

double toy_hf_sample(double theta, RngStream& rng) { return rng.normal(toy_hf_mean(theta), kToyNoiseSd); }

double toy_lf_sample(double theta, RngStream& rng) { return rng.normal(toy_lf_mean(theta), kToyNoiseSd); }

std::vector<double> ToySimulator::do_sample(std::span<const double> theta, RngStream& rng) const {
  require_length(theta, 1, "ToySimulator");
  return {fidelity_ == Fidelity::kHigh ? toy_hf_sample(theta[0], rng) : toy_lf_sample(theta[0], rng)};
}

std::vector<double> ToySimulator::summarize(std::span<const double> raw) const {
  require_length(raw, 1, "ToySimulator::summarize");
  return {raw[0]};
}

double ToySimulator::discrepancy(std::span<const double> summary, std::span<const double> observed) const {
  require_length(summary, 1, "ToySimulator::discrepancy");
  require_length(observed, 1, "ToySimulator::discrepancy");
  const double d = summary[0] - observed[0];
  return distance_ == ToyDistance::kAbsolute ? std::abs(d) : d * d;
}

// --- Ornstein-Uhlenbeck ----------------------------------------------------

std::vector<double> ou_hf_sample(std::span<const double> theta, RngStream& rng, const OuOptions& options) {
  require_length(theta, 4, "ou_hf_sample");
  const double mu = theta[0];
  const double sigma = theta[1];
  const double gamma = theta[2];
  const double offset = theta[3];
  const std::size_t steps = grid_steps(options.horizon, options.dt);
  const std::size_t stride = grid_steps(options.record_interval, options.dt);
  const double diffusion = sigma * std::sqrt(options.dt);

  std::vector<double> path;
  path.reserve(steps / stride + 1);
  double x = rng.normal(mu + offset, options.initial_sd);
  path.push_back(x);
  for (std::size_t s = 1; s <= steps; ++s) {
    x += gamma * (mu - x) * options.dt + diffusion * rng.normal(0.0, 1.0);
    if (s % stride == 0) {
      path.push_back(x);
    }
  }
  return path;
}

std::vector<double> ou_lf_sample(std::span<const double> theta, RngStream& rng, const OuOptions& options) {
  require_length(theta, 4, "ou_lf_sample");
  const double sd = theta[1] / (2.5 * theta[2]);
  std::vector<double> out(options.lf_points);
  for (auto& v : out) {
    v = rng.normal(theta[0], sd);
  }
  return out;
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) {
    throw LengthMismatch("sample_sd: need at least two values");
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / (n - 1.0));
}

std::vector<double> ou_hf_summary(std::span<const double> trajectory, double s1_divisor) {
  require_length(trajectory, 301, "ou_hf_summary");
  // x_151..x_301 in one-based indexing
  const auto tail = trajectory.subspan(150);
  const double s1 = std::accumulate(tail.begin(), tail.end(), 0.0) / s1_divisor;
  const double s2 = 10.0 * sample_sd(tail);
  return {s1, s2, trajectory[0] - s1, trajectory[0] - trajectory[20]};
}

std::vector<double> ou_lf_summary(std::span<const double> points) {
  if (points.empty()) {
    throw LengthMismatch("ou_lf_summary: empty input");
  }
  const double mean = std::accumulate(points.begin(), points.end(), 0.0) / static_cast<double>(points.size());
  return {mean, 10.0 * sample_sd(points)};
}

std::vector<double> OuHfSimulator::do_sample(std::span<const double> theta, RngStream& rng) const {
  return ou_hf_sample(theta, rng, options_);
}

std::vector<double> OuHfSimulator::summarize(std::span<const double> raw) const {
  return ou_hf_summary(raw, options_.s1_divisor);
}

double OuHfSimulator::discrepancy(std::span<const double> summary, std::span<const double> observed) const {
  require_length(summary, 4, "OuHfSimulator::discrepancy");
  require_length(observed, 4, "OuHfSimulator::discrepancy");
  return 0.25 * squared_norm_diff(summary, observed, 4);
}

std::vector<double> OuLfSimulator::do_sample(std::span<const double> theta, RngStream& rng) const {
  return ou_lf_sample(theta, rng, options_);
}

std::vector<double> OuLfSimulator::summarize(std::span<const double> raw) const {
  require_length(raw, options_.lf_points, "OuLfSimulator::summarize");
  return ou_lf_summary(raw);
}

double OuLfSimulator::discrepancy(std::span<const double> summary, std::span<const double> observed) const {
  require_length(summary, 2, "OuLfSimulator::discrepancy");
  if (observed.size() < 2) {
    throw LengthMismatch("OuLfSimulator::discrepancy: observed summary needs two components");
  }
  return 0.5 * squared_norm_diff(summary, observed, 2);
}

// --- Kuramoto --------------------------------------------------------------

std::size_t KuramotoOptions::steps() const noexcept { return grid_steps(horizon, dt); }

double cauchy_from_uniform(double location, double scale, double u) {
  if (!(scale > 0.0)) {
    throw NonPositiveScale("cauchy: scale must be positive, got " + std::to_string(scale));
  }
  return location + scale * std::tan(std::numbers::pi * (u - 0.5));
}

double cauchy_sample(double location, double scale, RngStream& rng) {
  return cauchy_from_uniform(location, scale, rng.uniform());
}

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

std::vector<double> kuramoto_hf_sample(std::span<const double> theta, RngStream& rng,
                                       const KuramotoOptions& options) {
  require_length(theta, 3, "kuramoto_hf_sample");
  const double coupling = theta[0];
  const std::size_t m = options.oscillators;
  std::vector<double> omega(m);
  for (auto& w : omega) {
    w = cauchy_sample(theta[1], theta[2], rng);
  }

  // Mean-field form: (K/M) sum_j sin(phi_j - phi_i) = K (Zy cos phi_i - Zx sin phi_i).
  std::vector<double> sines(m);
  std::vector<double> cosines(m);
  auto order_parameter = [&](const std::vector<double>& phi) {
    double zx = 0.0;
    double zy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sines[i] = std::sin(phi[i]);
      cosines[i] = std::cos(phi[i]);
      zx += cosines[i];
      zy += sines[i];
    }
    return std::complex<double>(zx / static_cast<double>(m), zy / static_cast<double>(m));
  };
  auto rhs = [&](double, const std::vector<double>& phi) {
    const auto z = order_parameter(phi);
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = omega[i] + coupling * (z.imag() * cosines[i] - z.real() * sines[i]);
    }
    return d;
  };

  const std::size_t steps = options.steps();
  std::vector<double> out(2 * (steps + 1));
  std::vector<double> phi(m, 0.0);
  auto z = order_parameter(phi);
  double last_arg = std::arg(z);
  out[0] = std::abs(z);
  out[steps + 1] = last_arg;
  for (std::size_t s = 1; s <= steps; ++s) {
    rk4_step(rhs, static_cast<double>(s - 1) * options.dt, options.dt, phi);
    z = order_parameter(phi);
    const double arg = std::arg(z);
    out[s] = std::abs(z);
    out[steps + 1 + s] = out[steps + s] + wrap_angle(arg - last_arg);
    last_arg = arg;
  }
  return out;
}

std::vector<double> kuramoto_lf_sample(std::span<const double> theta, const KuramotoOptions& options) {
  require_length(theta, 3, "kuramoto_lf_sample");
  const double coupling = theta[0];
  const double omega0 = theta[1];
  const double gamma = theta[2];
  auto rhs = [&](double, const std::vector<double>& y) {
    const double r = y[0];
    return std::vector<double>{(0.5 * coupling - gamma) * r - 0.5 * coupling * r * r * r, omega0};
  };
  const std::size_t steps = options.steps();
  std::vector<double> out(2 * (steps + 1));
  std::vector<double> y{1.0, 0.0};
  out[0] = y[0];
  out[steps + 1] = y[1];
  for (std::size_t s = 1; s <= steps; ++s) {
    euler_step(rhs, static_cast<double>(s - 1) * options.dt, options.dt, y);
    out[s] = y[0];
    out[steps + 1 + s] = y[1];
  }
  return out;
}

std::size_t kuramoto_half_time_index(std::span<const double> r_obs, const KuramotoOptions& options) {
  const std::size_t n = options.steps() + 1;
  require_length(r_obs, n, "kuramoto_half_time_index");
  const auto lo = static_cast<std::size_t>(std::ceil(options.long_term_lo / options.dt - 1e-9));
  const auto hi = std::min(n - 1, static_cast<std::size_t>(std::floor(options.long_term_hi / options.dt + 1e-9)));
  if (lo > hi) {
    throw Error("kuramoto_half_time_index: empty long-term window");
  }
  double level = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) {
    level += r_obs[k];
  }
  level /= static_cast<double>(hi - lo + 1);
  const double midpoint = 0.5 * (r_obs[0] + level);
  const bool falling = r_obs[0] >= level;
  for (std::size_t k = 0; k < n; ++k) {
    if (falling ? r_obs[k] <= midpoint : r_obs[k] >= midpoint) {
      return k;
    }
  }
  return n - 1;
}

std::vector<double> kuramoto_summary(std::span<const double> raw, std::size_t half_time_index,
                                     const KuramotoOptions& options) {
  const std::size_t n = options.steps() + 1;
  require_length(raw, 2 * n, "kuramoto_summary");
  if (half_time_index >= n) {
    throw LengthMismatch("kuramoto_summary: half-time index outside the grid");
  }
  const auto r = raw.first(n);
  const auto phase = raw.subspan(n);
  double integral = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    integral += 0.5 * options.dt * (r[k - 1] + r[k]);
  }
  const double mean_r = integral / options.horizon;
  return {mean_r * mean_r, (phase[n - 1] - phase[0]) / options.horizon, r[half_time_index]};
}

std::vector<double> KuramotoSimulator::do_sample(std::span<const double> theta, RngStream& rng) const {
  return fidelity_ == Fidelity::kHigh ? kuramoto_hf_sample(theta, rng, options_) : kuramoto_lf_sample(theta, options_);
}

std::vector<double> KuramotoSimulator::summarize(std::span<const double> raw) const {
  return kuramoto_summary(raw, half_time_index_, options_);
}

double KuramotoSimulator::discrepancy(std::span<const double> summary, std::span<const double> observed) const {
  require_length(summary, 3, "KuramotoSimulator::discrepancy");
  require_length(observed, 3, "KuramotoSimulator::discrepancy");
  return squared_norm_diff(summary, observed, 3);
}

}  // namespace mfabc
