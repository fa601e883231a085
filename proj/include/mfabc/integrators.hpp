#pragma once

#include <cstddef>
#include <vector>

namespace mfabc {

/// One explicit Euler step of y' = f(t, y) in place.
template <class Rhs, class State = std::vector<double>>
void euler_step(Rhs&& rhs, double t, double dt, State& y) {
  State dy = rhs(t, y);
  for (std::size_t j = 0; j < y.size(); ++j) {
    y[j] += dt * dy[j];
  }
}

/// One classical fourth-order Runge-Kutta step of y' = f(t, y) in place.
template <class Rhs, class State = std::vector<double>>
void rk4_step(Rhs&& rhs, double t, double dt, State& y) {
  const std::size_t n = y.size();
  State tmp(y);
  const State k1 = rhs(t, y);
  for (std::size_t j = 0; j < n; ++j) {
    tmp[j] = y[j] + 0.5 * dt * k1[j];
  }
  const State k2 = rhs(t + 0.5 * dt, tmp);
  for (std::size_t j = 0; j < n; ++j) {
    tmp[j] = y[j] + 0.5 * dt * k2[j];
  }
  const State k3 = rhs(t + 0.5 * dt, tmp);
  for (std::size_t j = 0; j < n; ++j) {
    tmp[j] = y[j] + dt * k3[j];
  }
  const State k4 = rhs(t + dt, tmp);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
}

}  // namespace mfabc
