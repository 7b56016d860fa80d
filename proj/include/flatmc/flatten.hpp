#pragma once
#include <memory>
#include <string>

#include "flatmc/density.hpp"
#include "flatmc/mollifier.hpp"
#include "flatmc/profiles.hpp"

namespace flatmc {

// The smooth flattening map T: mollified truncation at threshold M with
// band width 2 (c = 1). T(y) = M+1 for y <= M, T(y) = y for y >= M+2,
// and in between T is the mollifier convolution of the clipped identity
//   T0(y) = max(y, M+1).
struct FlattenSpec {
  double m_threshold = 0.0;  // M
  double c = 1.0;            // fixed by the construction
  double quad_tol = 1e-10;

  explicit FlattenSpec(double m_value = 0.0, double tol = 1e-10)
      : m_threshold(m_value), quad_tol(tol) {}
};

// T(y): exact branch values outside (M, M+2), prefix-integral closed form
// inside (equal to the convolution within ~1e-12; oracle-tested against
// adaptive quadrature at quad_tol).
double t_value(const FlattenSpec& spec, double y);

// (dT, d2T) = (Phi_phi(y-M-1), phi(y-M-1))
struct TDerivs {
  double first;
  double second;
};
TDerivs t_derivs(const FlattenSpec& spec, double y);

// Value and gradient of T o U at x. Gradient branches on U(x):
//   <= M: 0;  in (M, M+2): dT(U(x)) grad U(x);  >= M+2: grad U(x).
// Returns T(U(x)); grad may be nullptr.
double flattened_eval(const TargetDensity& target, const FlattenSpec& spec,
                      const double* x, double* grad);
double flattened_eval(const TargetDensity& target, const FlattenSpec& spec,
                      const Vec& x, Vec& grad);

// M selection rules:
//   "set": M = U(0) + L R^2 / 2
//   "a1" : M = U(0) + c_U + 2 L R^2
//   "bnn": M = u0 + c_U + L R^2  (caller passes u0 = chat + ln I)
double choose_M(const A1Profile& profile, double u0, const std::string& rule);

// TargetDensity view of T o U, usable with any sampler.
class FlattenedTarget : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  FlattenedTarget(const TargetDensity& target, FlattenSpec spec)
      : target_(target), spec_(spec) {}
  int dim() const override { return target_.dim(); }
  double eval(const double* x, double* grad) const override {
    return flattened_eval(target_, spec_, x, grad);
  }
  const FlattenSpec& spec() const { return spec_; }
  const TargetDensity& base() const { return target_; }

 private:
  const TargetDensity& target_;
  FlattenSpec spec_;
};

}  // namespace flatmc
