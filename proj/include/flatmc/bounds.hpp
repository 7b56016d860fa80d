#pragma once
#include <cstdint>
#include <string>

#include "flatmc/density.hpp"
#include "flatmc/profiles.hpp"

namespace flatmc {

// A computed chi-square constant rho with the regime that produced it.
// regime "capped" means the 2e^c branch of the max won; "formula" means the
// explicit expression did. A +infinity value is valid but vacuous.
struct RhoBound {
  double value = 0.0;
  enum class Regime { Capped, Formula } regime = Regime::Capped;
  // echo of the inputs
  int d = 0;
  double c = 1.0;
  double chat = 1.0;
  double m_threshold = 0.0;
  A1Profile profile;

  std::string regime_name() const {
    return regime == Regime::Capped ? "capped" : "formula";
  }
};

// Rbar = R + sqrt((2/m)(M - u_min)); u_min is a caller-supplied lower bound
// on min U.
double rbar(const A1Profile& profile, double M, double u_min);

// Explicit bound on rho under the A1 sandwich, any M >= u_min. d = 1 uses
// the special-case display. Gamma/power arithmetic in log domain; a
// geometric ratio >= 1 reports +infinity.
RhoBound rho_bound_coco(const A1Profile& profile, double M, double u_min,
                        double c, int d);

// The dimension-free refinement of the bound, with M fixed internally to
// U(0) + c_U + 2 L R^2 (the value itself does not depend on U(0); u0 only
// feeds the echoed threshold). Requires the tractability condition at
// (profile, chat, d) and d >= 2.
RhoBound rho_bound_coco2(const A1Profile& profile, double chat, double c,
                         int d, double u0 = 0.0);

// Raw value of the dimension-free display (no precondition gate): the max of
// 2 e^c and the two-term formula at (c_U, chat, c, d).
double cocob_value(double c_u, double chat, double c, int d);

// Mixture bound with a = max_j a_j, kappa = max_j L_j/m_j, L = max_j L_j;
// requires the mixture condition. On violation throws precondition_error
// carrying the margin in the message.
RhoBound rho_bound_mixture(const GaussianMixture& gm, double c);

// Left side of the mixture condition; satisfied iff <= d - 1.
double mixture_condition_lhs(const GaussianMixture& gm);

// (bias bound 12 rho / N, MSE bound 4 rho / N) for sup|phi| <= 1.
struct SnisErrorBounds {
  double bias;
  double mse;
};
SnisErrorBounds snis_error_bounds(double rho, std::uint64_t n);

// N = ceil(16 rho / (ebar eprime)^2), TV budget ebar/(4N), and the induced
// (bias, MSE) bounds (2 ebar + eprime, 4 ebar + eprime^2).
struct SamplePlan {
  std::uint64_t n;
  double tv_budget;
  double bias_bound;
  double mse_bound;
};
SamplePlan sample_size_plan(double rho, double ebar, double eprime);

}  // namespace flatmc
