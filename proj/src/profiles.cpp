#include "flatmc/profiles.hpp"

#include <algorithm>
#include <cmath>

#include "flatmc/errors.hpp"

namespace flatmc {

void A1Profile::validate() const {
  if (!(lip >= conv) || !(conv > 0.0) || c_u < 0.0 || radius < 0.0 ||
      grad0 < 0.0 || !std::isfinite(lip) || !std::isfinite(c_u) ||
      !std::isfinite(radius))
    throw input_error("A1 profile invalid: need L >= m > 0, c_U, R, |grad U(0)| >= 0");
}

A1Profile a1_from_dissipativity(const DissipativityParams& p, double lipschitz,
                                double grad0) {
  if (!(p.alpha > 0.0) || p.beta < 0.0)
    throw input_error("dissipativity: alpha > 0, beta >= 0 required");
  if (lipschitz < p.alpha)
    throw input_error("dissipativity: Lipschitz constant below alpha");
  A1Profile out;
  out.conv = p.alpha;
  out.radius = std::sqrt(p.beta / p.alpha);
  out.c_u = 0.0;
  out.lip = lipschitz;
  out.grad0 = grad0;
  out.provenance = "dissipativity(alpha=" + std::to_string(p.alpha) +
                   ", beta=" + std::to_string(p.beta) + ")";
  out.validate();
  return out;
}

A1Profile a1_from_convex_outside_ball(double R, double m_bar, double L_bar,
                                      double grad0) {
  if (!(L_bar >= m_bar) || !(m_bar > 0.0) || R < 0.0 || grad0 < 0.0)
    throw input_error("convex-outside-ball: need L_bar >= m_bar > 0, R, grad0 >= 0");
  A1Profile out;
  out.c_u = 0.0;
  out.radius = R * (1.0 + L_bar / m_bar) + grad0 / m_bar;
  out.lip = L_bar;
  out.conv = 0.5 * m_bar;
  out.grad0 = grad0;
  out.provenance = "convex-outside-ball(R=" + std::to_string(R) + ")";
  out.validate();
  return out;
}

namespace {

double cocoa_lhs(double c_u, double radius, double lip, double conv) {
  double kap = lip / conv;
  double t = std::sqrt(lip) * radius +
             std::sqrt(kap * (4.0 * c_u + 5.0 * lip * radius * radius));
  return kap * t * t;
}

}  // namespace

A1Profile a1_from_mixture(const GaussianMixture& gm) {
  const int k = gm.components();
  double alpha = gm.comp_m(0), beta_num = 0.0;
  for (int i = 0; i < k; ++i) alpha = std::min(alpha, gm.comp_m(i));
  alpha *= 0.5;
  const double R = gm.mean_radius();
  for (int i = 0; i < k; ++i) {
    double li = gm.comp_l(i);
    beta_num = std::max(beta_num, li * R * R * (li / gm.comp_m(i)) / 2.0);
  }
  A1Profile base =
      a1_from_dissipativity({alpha, beta_num}, mixture_grad_lipschitz(gm));

  // free component index: minimize the tractability left side, ties by weight
  int best = 0;
  double best_lhs = 0.0;
  for (int i = 0; i < k; ++i) {
    double cu = 1.0 - std::log(gm.weights()[i]);
    double lhs = cocoa_lhs(cu, base.radius, 2.0 * gm.comp_l(i), alpha);
    if (i == 0 || lhs < best_lhs ||
        (lhs == best_lhs && gm.weights()[i] > gm.weights()[best])) {
      best = i;
      best_lhs = lhs;
    }
  }
  base.c_u = 1.0 - std::log(gm.weights()[best]);
  base.lip = 2.0 * gm.comp_l(best);
  Vec g;
  base.grad0 = 0.0;
  {
    Vec zero(gm.dim(), 0.0);
    gm.eval(zero, g);
    double s = 0.0;
    for (double v : g) s += v * v;
    base.grad0 = std::sqrt(s);
  }
  base.provenance += " + mixture-upper(i=" + std::to_string(best) + ")";
  base.validate();
  return base;
}

double mixture_grad_lipschitz(const GaussianMixture& gm) {
  if (gm.isotropic()) {
    try {
      return mixture_strong_outside_radius(gm).hessian_norm;
    } catch (const hypothesis_error&) {
      // fall through to the conservative bound
    }
  }
  double lmax = 0.0;
  for (int i = 0; i < gm.components(); ++i) lmax = std::max(lmax, gm.comp_l(i));
  double twoR = 2.0 * gm.mean_radius();
  return lmax * (1.0 + lmax * twoR * twoR);
}

OutsideBallBounds mixture_strong_outside_radius(const GaussianMixture& gm) {
  if (!gm.isotropic())
    throw hypothesis_error("two-scale bounds: isotropic mixture required");
  const int k = gm.components();
  if (k < 2)
    throw hypothesis_error("two-scale bounds: at least two components required");
  const auto& s = gm.iso_precisions();
  int kmin = 0;
  for (int i = 1; i < k; ++i)
    if (s[i] < s[kmin]) kmin = i;
  double sk = s[kmin];
  double sm = 0.0;
  bool have = false;
  for (int i = 0; i < k; ++i) {
    if (i == kmin) continue;
    if (s[i] <= sk)
      throw hypothesis_error("two-scale bounds: minimal precision not unique");
    if (!have || s[i] < sm) {
      sm = s[i];
      have = true;
    }
  }
  double shat = *std::max_element(s.begin(), s.end());
  const double R = gm.mean_radius();
  double xk = 0.0;
  {
    const auto& mu = gm.means()[kmin];
    double q = 0.0;
    for (double v : mu) q += v * v;
    xk = std::sqrt(q);
  }
  double ak = gm.weights()[kmin];
  double gap = sm - sk;

  double s_star =
      2.0 * std::sqrt(std::pow(sk * xk + 0.5 * (sk + sm) * R, 2) + 4.0 * gap) /
      gap;
  double cbig = 0.0;
  for (double c : {1.0, 2.0}) {
    double v = std::exp(sk / (2.0 * c) * std::pow(s_star + xk, 2) -
                        sm / (2.0 * c) * std::pow(s_star - R, 2)) *
               std::pow(s_star + R, 2) * (shat + 2.0 * shat * shat) /
               (ak * ak * sk);
    cbig = std::max(cbig, v);
  }
  cbig *= 2.0;
  double inner = std::pow(sk * xk + sm * R, 2) + 4.0 * gap * std::log(cbig);
  double r_star = 2.0 * std::sqrt(std::max(inner, 0.0)) / gap;

  double alpha = sk / 2.0;
  double beta = shat * R * R / 2.0;  // isotropic: L_i = m_i = s_i
  double r_diss = std::sqrt(beta / alpha);

  OutsideBallBounds out;
  out.radius = std::max({r_star, s_star, r_diss});
  out.conv_lower = sk / 2.0;
  out.hessian_norm = 1.5 * sk;
  return out;
}

double flattened_smoothness(const A1Profile& profile, double l_bar) {
  profile.validate();
  double lb = l_bar > 0.0 ? l_bar : profile.lip;
  double t = profile.grad0 + lb * profile.radius +
             2.0 * lb *
                 std::sqrt((1.0 + profile.c_u +
                            5.0 * profile.lip * profile.radius * profile.radius) /
                           profile.conv);
  return lb + 2.0 * t * t;
}

TractabilityReport check_tractability(const A1Profile& profile, double chat,
                                      int d) {
  profile.validate();
  if (chat < 1.0) throw input_error("tractability: chat >= 1 required");
  if (d < 1) throw input_error("tractability: d >= 1 required");
  TractabilityReport rep;
  rep.lhs = cocoa_lhs(profile.c_u, profile.radius, profile.lip, profile.conv);
  rep.rhs = (d - 1) / (M_E * chat * chat);
  rep.margin = rep.rhs - rep.lhs;
  rep.satisfied = rep.lhs <= rep.rhs;
  if (profile.c_u == 0.0 && chat == 1.0) {
    rep.sufficient_applicable = true;
    rep.sufficient_lhs = std::sqrt(profile.lip) * profile.radius *
                         (1.0 + profile.lip / profile.conv);
    rep.sufficient_rhs = 0.2 * std::sqrt(static_cast<double>(d - 1));
    rep.sufficient_satisfied = rep.sufficient_lhs <= rep.sufficient_rhs;
  }
  return rep;
}

A1Profile bnn_profile(const BnnPosterior& net) {
  if (!net.last_layer_injective())
    throw hypothesis_error(
        "bnn profile: J1/J2 not injective on free final-layer slots");
  const double a1 = net.alpha1(), a2 = net.alpha2();
  const double amin = std::min(a1, a2), amax = std::max(a1, a2);
  const double bk = net.beta_like() * net.data_count();
  const double smax = net.sigma_max();
  const double mstar = static_cast<double>(net.m_star());
  const double chat = net.c_hat_bias();
  const double I = static_cast<double>(net.classes());
  const double msig = mstar * smax * smax + 1.0;

  A1Profile out;
  out.conv = 2.0 * amin;
  out.lip = 2.25 * amax;
  out.c_u = bk * std::log(2.0 * (I - 1.0)) + 8.0 * bk * bk / amax * msig;
  out.radius = bk * std::sqrt(msig) / amin +
               std::sqrt(bk * bk * msig +
                         amin * bk * (chat + std::log(2.0 * I * I - 2.0 * I))) /
                   amin;
  Vec zero(net.dim(), 0.0), g;
  net.eval(zero, g);
  double s = 0.0;
  for (double v : g) s += v * v;
  out.grad0 = std::sqrt(s);
  out.provenance = "bnn(m*=" + std::to_string(net.m_star()) +
                   ", sigma_max=" + std::to_string(smax) + ", x*=0)";
  out.validate();
  return out;
}

BnnTractabilityReport bnn_tractability(const BnnPosterior& net) {
  BnnTractabilityReport rep;
  rep.ffnr_neurons = 221.0 / net.alpha1();
  double betaK = net.beta_like() * net.data_count();
  if (std::abs(net.alpha1() - net.alpha2()) >
          1e-12 * std::max(net.alpha1(), net.alpha2()) ||
      std::abs(betaK - 1.0) > 1e-9) {
    rep.supported = false;
    return rep;
  }
  rep.supported = true;
  double chat = net.c_hat_bias();
  double I = static_cast<double>(net.classes());
  double msig = net.m_star() * std::pow(net.sigma_max(), 2) + 1.0;
  double t = 1.5 * (chat + std::log(2.0 * I * I - 2.0 * I)) +
             3.0 * std::sqrt(msig / net.alpha1());
  rep.lhs = 9.0 * M_E * t * t;
  rep.rhs = static_cast<double>(net.dim() - 1);
  rep.margin = rep.rhs - rep.lhs;
  rep.satisfied = rep.lhs <= rep.rhs;
  return rep;
}

}  // namespace flatmc
