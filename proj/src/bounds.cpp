#include "flatmc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatmc/errors.hpp"

namespace flatmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b))
double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

RhoBound finish(double log_formula, double c, const A1Profile& profile,
                double M, double chat, int d) {
  RhoBound out;
  out.d = d;
  out.c = c;
  out.chat = chat;
  out.m_threshold = M;
  out.profile = profile;
  double cap = 2.0 * std::exp(c);
  double formula =
      log_formula > 700.0 ? kInf : std::exp(log_formula);
  if (formula >= cap) {
    out.value = formula;
    out.regime = RhoBound::Regime::Formula;
  } else {
    out.value = cap;
    out.regime = RhoBound::Regime::Capped;
  }
  return out;
}

}  // namespace

double rbar(const A1Profile& profile, double M, double u_min) {
  profile.validate();
  if (M < u_min) throw input_error("rbar: M below the min-U lower bound");
  return profile.radius + std::sqrt(2.0 / profile.conv * (M - u_min));
}

RhoBound rho_bound_coco(const A1Profile& profile, double M, double u_min,
                        double c, int d) {
  profile.validate();
  if (d < 1) throw input_error("rho_bound_coco: d >= 1 required");
  if (!(c > 0.0)) throw input_error("rho_bound_coco: c > 0 required");
  const double rb = rbar(profile, M, u_min);
  const double L = profile.lip, m = profile.conv, cu = profile.c_u;

  if (d == 1) {
    double v = std::exp(2.0 * cu) / M_PI *
               (4.0 * (2.0 + std::exp(c)) * L * rb * rb +
                2.0 * std::sqrt(2.0) * (1.0 + std::exp(c)) * std::sqrt(L) * rb *
                    std::sqrt(L / m));
    double logv = v > 0.0 ? std::log(v) : -kInf;
    return finish(logv, c, profile, M, 1.0, d);
  }

  // first term: e^{2cU} (2+e^c) (L Rbar^2)^d / (2^{d-1} Gamma(d/2+1)^2)
  double log_t1 = -kInf;
  if (rb > 0.0)
    log_t1 = 2.0 * cu + std::log(2.0 + std::exp(c)) +
             d * std::log(L * rb * rb) - (d - 1) * std::log(2.0) -
             2.0 * std::lgamma(0.5 * d + 1.0);

  // second term: e^{2cU} (1+e^c) 2^d / sqrt(d(d-1)) * sum_{j=d}^{2d-1} r^j,
  // r = sqrt(L Rbar^2 (L/m) / (e (d-1)))
  double log_t2 = -kInf;
  if (rb > 0.0) {
    double q = L * rb * rb * (L / m) / (M_E * (d - 1));
    if (q >= 1.0) return finish(kInf, c, profile, M, 1.0, d);
    double logr = 0.5 * std::log(q);
    // geometric block r^d (1 - r^d) / (1 - r) in log domain
    double log_sum = d * logr + std::log1p(-std::exp(d * logr)) -
                     std::log1p(-std::exp(logr));
    log_t2 = 2.0 * cu + std::log(1.0 + std::exp(c)) + d * std::log(2.0) -
             0.5 * std::log(static_cast<double>(d) * (d - 1)) + log_sum;
  }
  return finish(log_add(log_t1, log_t2), c, profile, M, 1.0, d);
}

namespace {

double cocob_log_formula(double cu, double chat, double c, int d) {
  double log_t1 = 2.0 * cu + std::log(2.0 * (2.0 + std::exp(c))) - 1.0 -
                  2.0 * d * std::log(chat) - 0.5 * std::log(d * M_PI / 2.0);
  double ec2 = M_E * chat / 2.0;
  double log_t2 = 2.0 * cu + std::log(1.0 + std::exp(c)) - d * std::log(ec2) -
                  std::log1p(-2.0 / (M_E * chat)) -
                  0.5 * std::log(static_cast<double>(d) * (d - 1));
  return log_add(log_t1, log_t2);
}

}  // namespace

double cocob_value(double c_u, double chat, double c, int d) {
  if (d < 2) throw input_error("cocob_value: d >= 2 required");
  double lf = cocob_log_formula(c_u, chat, c, d);
  double formula = lf > 700.0 ? kInf : std::exp(lf);
  return std::max(2.0 * std::exp(c), formula);
}

RhoBound rho_bound_coco2(const A1Profile& profile, double chat, double c,
                         int d, double u0) {
  profile.validate();
  if (d == 1)
    throw unsupported_error("rho_bound_coco2: vacuous at d = 1");
  if (d < 2) throw input_error("rho_bound_coco2: d >= 2 required");
  TractabilityReport rep = check_tractability(profile, chat, d);
  if (!rep.satisfied)
    throw precondition_error(
        "rho_bound_coco2: tractability condition violated, margin = " +
        std::to_string(rep.margin));
  double M =
      u0 + profile.c_u + 2.0 * profile.lip * profile.radius * profile.radius;
  RhoBound out = finish(cocob_log_formula(profile.c_u, chat, c, d), c, profile,
                        M, chat, d);
  return out;
}

double mixture_condition_lhs(const GaussianMixture& gm) {
  double kap = 1.0, L = 0.0, a = 0.0;
  for (int i = 0; i < gm.components(); ++i) {
    kap = std::max(kap, gm.comp_l(i) / gm.comp_m(i));
    L = std::max(L, gm.comp_l(i));
    a = std::max(a, gm.weights()[i]);
  }
  const double R = gm.mean_radius();
  double inner = std::sqrt(2.0 * L) * R * kap +
                 std::sqrt(kap) * std::sqrt(4.0 * (1.0 - std::log(a)) +
                                            12.0 * L * R * R * kap * kap);
  return 4.0 * M_E * kap * inner * inner;
}

RhoBound rho_bound_mixture(const GaussianMixture& gm, double c) {
  const int d = gm.dim();
  double lhs = mixture_condition_lhs(gm);
  if (lhs > d - 1)
    throw precondition_error(
        "rho_bound_mixture: mixture condition violated, margin = " +
        std::to_string((d - 1) - lhs));
  double a = 0.0;
  for (int i = 0; i < gm.components(); ++i) a = std::max(a, gm.weights()[i]);
  double log_t1 = std::log(2.0) + 1.0 - 2.0 * std::log(a) +
                  std::log(2.0 + std::exp(c)) - 0.5 * std::log(d * M_PI / 2.0);
  double log_t2 = 2.0 - 2.0 * std::log(a) + std::log(1.0 + std::exp(c)) -
                  d * std::log(M_E / 2.0) - std::log1p(-2.0 / M_E) -
                  0.5 * std::log(static_cast<double>(d) * (d - 1));
  RhoBound out;
  double cap = 2.0 * std::exp(c);
  double formula = std::exp(log_add(log_t1, log_t2));
  out.d = d;
  out.c = c;
  out.chat = 1.0;
  if (formula >= cap) {
    out.value = formula;
    out.regime = RhoBound::Regime::Formula;
  } else {
    out.value = cap;
    out.regime = RhoBound::Regime::Capped;
  }
  return out;
}

SnisErrorBounds snis_error_bounds(double rho, std::uint64_t n) {
  if (!(rho >= 1.0)) throw input_error("snis_error_bounds: rho >= 1 required");
  if (n < 1) throw input_error("snis_error_bounds: N >= 1 required");
  double nn = static_cast<double>(n);
  return {12.0 * rho / nn, 4.0 * rho / nn};
}

SamplePlan sample_size_plan(double rho, double ebar, double eprime) {
  if (!(rho >= 1.0)) throw input_error("sample_size_plan: rho >= 1 required");
  if (!(ebar > 0.0) || ebar > 1.0)
    throw input_error("sample_size_plan: ebar in (0,1] required");
  if (!(eprime > 0.0)) throw input_error("sample_size_plan: eprime > 0 required");
  SamplePlan plan;
  plan.n = static_cast<std::uint64_t>(
      std::ceil(16.0 * rho / ((ebar * eprime) * (ebar * eprime))));
  plan.tv_budget = ebar / (4.0 * static_cast<double>(plan.n));
  plan.bias_bound = 2.0 * ebar + eprime;
  plan.mse_bound = 4.0 * ebar + eprime * eprime;
  return plan;
}

}  // namespace flatmc
