#pragma once
#include <functional>
#include <vector>

namespace flatmc {

// unnormalized bump exp(-1/(1-t^2)) on (-1,1), 0 elsewhere
double mollifier_unnormalized(double t);

// the standard mollifier: unit integral, support (-1,1)
double mollifier(double t);

// d/dt mollifier(t)
double mollifier_deriv(double t);

// normalizer \int_{-1}^{1} exp(-1/(1-y^2)) dy, computed once and cached
double mollifier_normalizer();

// Adaptive Simpson on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// Cumulative integrals of the mollifier, precomputed on a dense grid over
// [-1,1] and interpolated with cubic Hermite (the exact derivative phi is
// known at the nodes, so the interpolant is accurate to ~1e-14).
//
//   cdf(t)      = \int_{-1}^{t} phi
//   first_mom(t)= \int_{-1}^{t} y phi(y) dy
//   ramp(a)     = \int_{-1}^{a} (a - y) phi(y) dy  = a*cdf(a) - first_mom(a)
class MollifierTable {
 public:
  static const MollifierTable& instance();

  double cdf(double t) const;
  double first_moment(double t) const;
  double ramp(double a) const;

 private:
  MollifierTable();
  int n_;
  double h_;
  std::vector<double> cdf_, mom_;
  double interp(const std::vector<double>& prefix, bool moment, double t) const;
};

}  // namespace flatmc
