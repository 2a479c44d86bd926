#include "condiv/potential.hpp"

#include <cmath>

namespace condiv {
namespace bregman {

namespace {

constexpr double kPositivityTol = 1e-12;

bool strictly_positive(std::span<const double> x) {
  for (double v : x)
    if (!(v > kPositivityTol)) return false;
  return true;
}

}  // namespace

Potential squared_euclidean() {
  return Potential(
      "squared-euclidean",
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return 0.5 * s;
      },
      [](std::span<const double> x) {
        return std::vector<double>(x.begin(), x.end());
      },
      [](std::span<const double>) { return true; });
}

Potential negative_entropy() {
  return Potential(
      "negative-entropy",
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * std::log(v);
        return s;
      },
      [](std::span<const double> x) {
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = std::log(x[i]) + 1.0;
        return g;
      },
      strictly_positive);
}

Potential burg() {
  return Potential(
      "burg",
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s -= std::log(v);
        return s;
      },
      [](std::span<const double> x) {
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = -1.0 / x[i];
        return g;
      },
      strictly_positive);
}

Potential linear_combination(double a, const Potential& p, double b,
                             const Potential& q) {
  if (a < 0.0 || b < 0.0) {
    throw Error(ErrorKind::Value,
                "linear_combination: coefficients must be non-negative");
  }
  return Potential(
      p.name() + "+" + q.name(),
      [a, p, b, q](std::span<const double> x) {
        return a * p.value(x) + b * q.value(x);
      },
      [a, p, b, q](std::span<const double> x) {
        std::vector<double> g = p.gradient(x);
        std::vector<double> h = q.gradient(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = a * g[i] + b * h[i];
        return g;
      },
      [p, q](std::span<const double> x) {
        return p.in_domain(x) && q.in_domain(x);
      });
}

double bregman_divergence(const Potential& phi, std::span<const double> x,
                          std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Shape,
                "bregman_divergence: dimension mismatch " +
                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (!phi.in_domain(x) || !phi.in_domain(y)) {
    throw Error(ErrorKind::Domain,
                "bregman_divergence: point outside the domain of " +
                    phi.name());
  }
  const std::vector<double> grad_y = phi.gradient(y);
  double inner = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    inner += (x[i] - y[i]) * grad_y[i];
  return phi.value(x) - phi.value(y) - inner;
}

}  // namespace bregman
}  // namespace condiv
