#include "flatmc/flatten.hpp"

#include <cmath>

#include "flatmc/errors.hpp"

namespace flatmc {

double t_value(const FlattenSpec& spec, double y) {
  const double M = spec.m_threshold;
  if (y <= M) return M + 1.0;
  if (y >= M + 2.0) return y;
  // T(y) = M+1 + \int_{-1}^{a} (a - v) phi(v) dv,  a = y - M - 1
  return M + 1.0 + MollifierTable::instance().ramp(y - M - 1.0);
}

TDerivs t_derivs(const FlattenSpec& spec, double y) {
  const double a = y - spec.m_threshold - 1.0;
  return {MollifierTable::instance().cdf(a), mollifier(a)};
}

double flattened_eval(const TargetDensity& target, const FlattenSpec& spec,
                      const double* x, double* grad) {
  const double M = spec.m_threshold;
  const int d = target.dim();
  if (!grad) return t_value(spec, target.eval(x, nullptr));
  double u = target.eval(x, grad);
  if (u <= M) {
    for (int i = 0; i < d; ++i) grad[i] = 0.0;
    return M + 1.0;
  }
  if (u >= M + 2.0) return u;  // grad already holds grad U bitwise
  double dt = MollifierTable::instance().cdf(u - M - 1.0);
  for (int i = 0; i < d; ++i) grad[i] *= dt;
  return M + 1.0 + MollifierTable::instance().ramp(u - M - 1.0);
}

double flattened_eval(const TargetDensity& target, const FlattenSpec& spec,
                      const Vec& x, Vec& grad) {
  if (static_cast<int>(x.size()) != target.dim())
    throw input_error("flattened_eval: dimension mismatch");
  grad.resize(target.dim());
  return flattened_eval(target, spec, x.data(), grad.data());
}

double choose_M(const A1Profile& profile, double u0, const std::string& rule) {
  profile.validate();
  if (!std::isfinite(u0)) throw input_error("choose_M: non-finite U(0)");
  const double L = profile.lip, R = profile.radius;
  if (rule == "set") return u0 + 0.5 * L * R * R;
  if (rule == "a1") return u0 + profile.c_u + 2.0 * L * R * R;
  if (rule == "bnn") return u0 + profile.c_u + L * R * R;
  throw input_error("choose_M: unknown rule '" + rule + "'");
}

}  // namespace flatmc
