#pragma once
#include <string>

#include "flatmc/bnn.hpp"
#include "flatmc/density.hpp"

namespace flatmc {

// Constants (c_U, R, L, m) sandwiching U - min U between a Gaussian-tail
// lower bound outside B_R and a quadratic upper bound, plus |grad U(0)|.
// The witness point x* only ever enters through x* in B_R, so it is not
// stored beyond the provenance note.
struct A1Profile {
  double c_u = 0.0;
  double radius = 0.0;  // R
  double lip = 0.0;     // L
  double conv = 0.0;    // m
  double grad0 = 0.0;   // |grad U(0)|
  std::string provenance;

  void validate() const;
};

struct DissipativityParams {
  double alpha = 0.0;  // > 0
  double beta = 0.0;   // >= 0
};

struct TractabilityReport {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  // sufficient condition sqrt(L) R (1 + L/m) <= sqrt(d-1)/5, meaningful
  // only when c_U = 0 and chat = 1
  bool sufficient_applicable = false;
  bool sufficient_satisfied = false;
  double sufficient_lhs = 0.0;
  double sufficient_rhs = 0.0;
};

// grad U(x) . x >= alpha |x|^2 - beta outside B_{sqrt(beta/alpha)} yields
// m = alpha, R = sqrt(beta/alpha); with an L-Lipschitz gradient, c_U = 0.
A1Profile a1_from_dissipativity(const DissipativityParams& p, double lipschitz,
                                double grad0 = 0.0);

// U strongly convex outside B_R with constant m_bar and grad U L_bar-Lipschitz:
// c_U = 0, R' = R(1 + L_bar/m_bar) + |grad U(0)|/m_bar, L = L_bar, m = m_bar/2.
A1Profile a1_from_convex_outside_ball(double R, double m_bar, double L_bar,
                                      double grad0);

// Mixture profile: lower part from dissipativity with alpha = min_i m_i / 2,
// beta = max_i L_i^2 R^2 / (2 m_i); upper part c_U = 1 - ln(a_i), L = 2 L_i
// with the free index i chosen to minimize the tractability left side,
// ties broken by largest a_i.
A1Profile a1_from_mixture(const GaussianMixture& gm);

// Heuristic global gradient-Lipschitz constant for a mixture: 3 s_k / 2 when
// the isotropic two-scale hypotheses hold, else max_i L_i (1 + max_i L_i (2R)^2).
double mixture_grad_lipschitz(const GaussianMixture& gm);

struct OutsideBallBounds {
  double radius;        // R: bounds hold outside B_R
  double conv_lower;    // s_k / 2
  double hessian_norm;  // 3 s_k / 2
};

// Isotropic mixture with a unique minimal precision s_k: strong convexity
// s_k/2 and Hessian norm bound 3 s_k/2 outside B_R, R = R* v s* v sqrt(beta/alpha).
OutsideBallBounds mixture_strong_outside_radius(const GaussianMixture& gm);

// Lhat = L_bar + 2 (|grad U(0)| + L_bar R + 2 L_bar sqrt((1 + c_U + 5 L R^2)/m))^2
// with L_bar taken from profile.lip unless overridden.
double flattened_smoothness(const A1Profile& profile, double l_bar = -1.0);

// (L/m) (sqrt(L) R + ((L/m)(4 c_U + 5 L R^2))^{1/2})^2 <= (d-1)/(e chat^2)
TractabilityReport check_tractability(const A1Profile& profile, double chat,
                                      int d);

// Profile for the regularized negative log-posterior of a BnnPosterior, with
// m = 2 (a1 ^ a2), L = 9 (a1 v a2) / 4 and the stated c_U, R.
A1Profile bnn_profile(const BnnPosterior& net);

struct BnnTractabilityReport {
  bool supported = false;  // requires alpha1 == alpha2 and beta = 1/K
  bool satisfied = false;
  double lhs = 0.0;
  double rhs = 0.0;  // d - 1
  double margin = 0.0;
  double ffnr_neurons = 0.0;  // 221 / alpha1 heuristic for uniform-width nets
};

// 9e ((3/2)(chat + ln(2I^2-2I)) + 3 alpha1^{-1/2} (m* sigma_max^2 + 1)^{1/2})^2 <= d-1
BnnTractabilityReport bnn_tractability(const BnnPosterior& net);

}  // namespace flatmc
