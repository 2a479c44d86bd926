#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "condiv/error.hpp"

namespace condiv {
namespace bregman {

// Convex generating function of a vector Bregman divergence, with its
// gradient and domain predicate. Plain double math; none of this touches the
// autodiff tape.
class Potential {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  using GradientFn =
      std::function<std::vector<double>(std::span<const double>)>;
  using DomainFn = std::function<bool(std::span<const double>)>;

  Potential(std::string name, ValueFn value, GradientFn gradient,
            DomainFn domain)
      : name_(std::move(name)),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        domain_(std::move(domain)) {}

  const std::string& name() const { return name_; }
  double value(std::span<const double> x) const { return value_(x); }
  std::vector<double> gradient(std::span<const double> x) const {
    return gradient_(x);
  }
  bool in_domain(std::span<const double> x) const { return domain_(x); }

 private:
  std::string name_;
  ValueFn value_;
  GradientFn gradient_;
  DomainFn domain_;
};

// phi(x) = 1/2 sum x_i^2, domain all of R^d. Induces half the squared
// euclidean distance.
Potential squared_euclidean();

// phi(x) = sum x_i log x_i, domain x_i > 0. Induces the (generalized) KL
// divergence.
Potential negative_entropy();

// phi(x) = -sum log x_i, domain x_i > 0. Induces the Itakura-Saito distance.
Potential burg();

// a*p1 + b*q with a,b >= 0; Bregman divergences are linear in the potential.
Potential linear_combination(double a, const Potential& p, double b,
                             const Potential& q);

// D_phi(x, y) = phi(x) - phi(y) - <x - y, grad phi(y)>.
// Exactly zero when x == y; throws on dimension mismatch or domain
// violations.
double bregman_divergence(const Potential& phi, std::span<const double> x,
                          std::span<const double> y);

}  // namespace bregman
}  // namespace condiv
