#pragma once

// Shared basics: chart-space linear algebra aliases, derivative providers,
// central-difference stencils, error types, and a deterministic parallel map.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace anoflow {

inline constexpr double two_pi() { return 2.0 * std::numbers::pi; }

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Degenerate volume forms, missing derivative providers, frame normalization.
struct FieldError : Error {
  using Error::Error;
};
// Bad model parameters, degenerate bicontact intersections.
struct ModelError : Error {
  using Error::Error;
};
// Orbit closure failures, zero-speed points, degenerate lines.
struct DynamicsError : Error {
  using Error::Error;
};
// Degenerate contact forms, ill-conditioned frame decompositions.
struct ContactError : Error {
  using Error::Error;
};
// CLI / config rejection.
struct ConfigError : Error {
  using Error::Error;
};

// Derivative provider carried by every field: closed-form derivatives when
// available, otherwise central differences of the stated order with step h.
enum class DerivMode { exact, fd2, fd4 };

struct DerivSpec {
  DerivMode mode = DerivMode::fd4;
  double step = 1e-4;
};

// Central difference of f: double -> double | Vec3 at 0, at the requested
// order.  (exact mode never reaches here; treat it as the order-4 stencil.)
template <class F>
auto central_diff(const F& f, const DerivSpec& d) -> decltype(f(0.0)) {
  const double h = d.step;
  if (d.mode == DerivMode::fd2) return (f(h) - f(-h)) / (2.0 * h);
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

namespace detail {

inline Vec3 fd_gradient(const std::function<double(const Vec3&)>& f,
                        const Vec3& p, const DerivSpec& d) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    g[a] = central_diff(
        [&](double h) {
          Vec3 q = p;
          q[a] += h;
          return f(q);
        },
        d);
  }
  return g;
}

// Column j holds the derivative of f along axis j: J(i,j) = d f_i / d x_j.
inline Mat3 fd_jacobian(const std::function<Vec3(const Vec3&)>& f,
                        const Vec3& p, const DerivSpec& d) {
  Mat3 J;
  for (int a = 0; a < 3; ++a) {
    J.col(a) = central_diff(
        [&](double h) -> Vec3 {
          Vec3 q = p;
          q[a] += h;
          return f(q);
        },
        d);
  }
  return J;
}

// Derived fields: exact stays exact only when the caller rebuilt a
// closed-form provider; otherwise fall back to differencing, never
// overstating the order (any fd2 parent demotes the result to fd2).
inline DerivSpec merge_spec(const DerivSpec& a, const DerivSpec& b,
                            bool exact_available) {
  DerivSpec r;
  const double h = std::min(a.step, b.step);
  if (exact_available && a.mode == DerivMode::exact &&
      b.mode == DerivMode::exact) {
    r.mode = DerivMode::exact;
  } else if (a.mode == DerivMode::fd2 || b.mode == DerivMode::fd2) {
    r.mode = DerivMode::fd2;
  } else {
    r.mode = DerivMode::fd4;
  }
  r.step = h;
  return r;
}

// A quantity whose closed-form derivative would need second derivatives of
// its inputs (ext_d of a derived form, brackets): difference its own output.
inline DerivSpec demote_spec(const DerivSpec& a) {
  DerivSpec r = a;
  if (r.mode == DerivMode::exact) r.mode = DerivMode::fd4;
  return r;
}

}  // namespace detail

// Deterministic parallel map over [0, n): results land by index, so the
// worker count never changes output bytes.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t nw =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(nw);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n && !failed.load(); i += nw) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline double mod1(double x) { return x - std::floor(x); }

// Distance on a unit-periodic axis.
inline double wrap_dist(double a, double b) {
  const double d = std::fabs(mod1(a) - mod1(b));
  return std::min(d, 1.0 - d);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

}  // namespace anoflow
