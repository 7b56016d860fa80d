#include "flatmc/adversarial.hpp"

#include <algorithm>
#include <cmath>

#include "flatmc/errors.hpp"
#include "flatmc/mollifier.hpp"
#include "flatmc/simd.hpp"

namespace flatmc {

double sewn_c0() {
  double s = (16.0 / 9.0) * std::sin(3.0 * M_PI / 16.0);
  return 1.0 / std::sqrt(s * s - 1.0 / 6.0);
}

namespace {

Vec unit_direction(const Vec& direction, int d) {
  if (static_cast<int>(direction.size()) != d)
    throw input_error("adversarial: direction dimension mismatch");
  double nrm = std::sqrt(simd::dot(direction.data(), direction.data(), d));
  if (!(nrm > 0.0)) throw input_error("adversarial: zero direction");
  Vec u(d);
  for (int i = 0; i < d; ++i) u[i] = direction[i] / nrm;
  return u;
}

}  // namespace

SewnBimodal::SewnBimodal(double m0, double l0, Vec direction, int d)
    : d_(d), m0_(m0), l0_(l0) {
  if (d <= 1) throw hypothesis_error("sewn bimodal: d > 1 required");
  if (!(m0 > 0.0) || !(l0 > 0.0))
    throw input_error("sewn bimodal: positive curvatures required");
  if (!(6.0 * std::exp(24.0 / d) * m0 < l0))
    throw hypothesis_error("sewn bimodal: need 6 e^{24/d} m0 < L0");
  kappa0_ = l0_ / m0_;
  c0_ = sewn_c0();
  Vec u = unit_direction(direction, d);
  double x0_norm = c0_ * std::sqrt(d * std::log(kappa0_) / l0_);
  x0_.resize(d);
  for (int i = 0; i < d; ++i) x0_[i] = x0_norm * u[i];
  double q = 1.0 / kappa0_;
  gamma_ = 1.0 / (1.0 - q);
  rd_ = x0_norm * std::sqrt(q * gamma_ * gamma_ + gamma_ / (c0_ * c0_));
  r0_ = rd_ / 8.0;
  center_.resize(d);
  for (int i = 0; i < d; ++i) center_[i] = gamma_ * x0_[i];
  lognorm1_ = 0.5 * d * std::log(2.0 * M_PI / m0_);
  lognorm2_ = 0.5 * d * std::log(2.0 * M_PI / l0_);
  // construction bracket for r_d / |x0|
  double lo = 1.0 / c0_, hi = gamma_ * std::sqrt(1.0 / 6.0 + 1.0 / (c0_ * c0_));
  double ratio = rd_ / x0_norm;
  if (ratio < lo * (1.0 - 1e-12) || ratio > hi * (1.0 + 1e-12))
    throw hypothesis_error("sewn bimodal: r_d bracket violated");
}

Vec SewnBimodal::sew_center() const { return center_; }

double SewnBimodal::blend(const double* x) const {
  double dist = std::sqrt(simd::sq_dist(x, center_.data(), d_));
  return MollifierTable::instance().cdf((dist - rd_) / r0_);
}

double SewnBimodal::f1_value(const double* x, double* grad) const {
  if (grad)
    for (int i = 0; i < d_; ++i) grad[i] = m0_ * x[i];
  return 0.5 * m0_ * simd::dot(x, x, d_) + lognorm1_;
}

double SewnBimodal::f2_value(const double* x, double* grad) const {
  if (grad)
    for (int i = 0; i < d_; ++i) grad[i] = l0_ * (x[i] - x0_[i]);
  return 0.5 * l0_ * simd::sq_dist(x, x0_.data(), d_) + lognorm2_;
}

double SewnBimodal::eval(const double* x, double* grad) const {
  double dist2 = simd::sq_dist(x, center_.data(), d_);
  double dist = std::sqrt(dist2);
  // outside the sewing annulus the branches are exact
  if (dist >= rd_ + r0_) return f1_value(x, grad);
  if (dist <= rd_ - r0_) return f2_value(x, grad);
  double f1 = f1_value(x, nullptr);
  double f2 = f2_value(x, nullptr);
  double arg = (dist - rd_) / r0_;
  double g = MollifierTable::instance().cdf(arg);
  if (grad) {
    double gp = mollifier(arg) / r0_;
    for (int i = 0; i < d_; ++i) {
      double rad = (x[i] - center_[i]) / dist;
      grad[i] = gp * rad * (f1 - f2) + g * m0_ * x[i] +
                (1.0 - g) * l0_ * (x[i] - x0_[i]);
    }
  }
  return g * f1 + (1.0 - g) * f2;
}

SewnBimodal build_f3(double m0, double l0, const Vec& direction, int d) {
  return SewnBimodal(m0, l0, direction, d);
}

double AngularTwoScale::cap_edge() {
  return (std::sqrt(3.0) + std::sqrt(2.0)) / 4.0;
}
double AngularTwoScale::flat_edge() { return std::sqrt(3.0) / 2.0; }

namespace {
const double kHShift = (3.0 * std::sqrt(3.0) + std::sqrt(2.0)) / 8.0;
const double kHScale = (std::sqrt(3.0) - std::sqrt(2.0)) / 8.0;
}  // namespace

AngularTwoScale::AngularTwoScale(double m1, double l1, Vec direction, int d)
    : d_(d), m1_(m1), l1_(l1) {
  if (d <= 2) throw hypothesis_error("angular two-scale: d > 2 required");
  if (!(m1 > 0.0) || !(16.0 * m1 <= l1))
    throw hypothesis_error("angular two-scale: need 16 m1 <= L1");
  z_ = unit_direction(direction, d);
}

double AngularTwoScale::heaviside(double t) const {
  return MollifierTable::instance().cdf((t - kHShift) / kHScale);
}

double AngularTwoScale::heaviside_deriv(double t) const {
  return mollifier((t - kHShift) / kHScale) / kHScale;
}

double AngularTwoScale::eval(const double* x, double* grad) const {
  double r2 = simd::dot(x, x, d_);
  double r = std::sqrt(r2);
  if (r < 1e-12) {
    if (grad)
      for (int i = 0; i < d_; ++i) grad[i] = 0.0;
    return 0.0;
  }
  double zx = simd::dot(z_.data(), x, d_);
  double t = zx / r;
  double hv = heaviside(t);
  double a = m1_ * hv + l1_ * (1.0 - hv);
  if (grad) {
    // ybar = r z - (z.x) x / r; grad = (m1-L1) H'(t) ybar / 2 + a x
    double hp = heaviside_deriv(t);
    double coef = 0.5 * (m1_ - l1_) * hp;
    for (int i = 0; i < d_; ++i) {
      double ybar = r * z_[i] - zx * x[i] / r;
      grad[i] = coef * ybar + a * x[i];
    }
  }
  return 0.5 * a * r2;
}

AngularTwoScale build_f4(double m1, double l1, const Vec& direction, int d) {
  return AngularTwoScale(m1, l1, direction, d);
}

namespace {

struct MeanSe {
  double mean;
  double se;
};

// mean and standard error of f over n proposal draws
template <typename Draw, typename F>
MeanSe mc_mean(std::size_t n, Draw&& draw, F&& f) {
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = f(draw());
    double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  double var = m2 / (n - 1);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

RatioEstimate f3_mass_ratio(const SewnBimodal& f3, std::size_t n_mc,
                            std::uint64_t seed) {
  const int d = f3.dim();
  if (d > 32)
    throw unsupported_error("f3 mass ratio: d <= 32 for Monte Carlo accuracy");
  if (n_mc < 100) throw input_error("f3 mass ratio: n_mc too small");
  const Vec& x0 = f3.x0();
  const Vec center = f3.sew_center();
  const double rin = f3.inner_radius();
  const double sd2 = 1.0 / std::sqrt(f3.l0());
  const double sd1 = 1.0 / std::sqrt(f3.m0());

  // numerator: inside the inner ball f3 = f2 exactly, and e^{-f2} is the
  // normalized N(x0, L0^{-1} I) density, so the integral is a ball probability
  CounterRng rng_n(seed, 0x6633206e756d75ull);
  Vec p(d);
  MeanSe num = mc_mean(
      n_mc,
      [&]() -> const Vec& {
        for (int i = 0; i < d; ++i) p[i] = x0[i] + sd2 * rng_n.normal();
        return p;
      },
      [&](const Vec& q) {
        return simd::sq_dist(q.data(), center.data(), d) < rin * rin ? 1.0
                                                                     : 0.0;
      });

  // denominator: total mass by IS against the equal-weight two-Gaussian mix
  CounterRng rng_d(seed, 0x66332064656e6full);
  const double logn1 = -0.5 * d * std::log(2.0 * M_PI * sd1 * sd1);
  const double logn2 = -0.5 * d * std::log(2.0 * M_PI * sd2 * sd2);
  Vec zero(d, 0.0);
  MeanSe den = mc_mean(
      n_mc,
      [&]() -> const Vec& {
        bool first = rng_d.uniform() < 0.5;
        double sd = first ? sd1 : sd2;
        const Vec& mu = first ? zero : x0;
        for (int i = 0; i < d; ++i) p[i] = mu[i] + sd * rng_d.normal();
        return p;
      },
      [&](const Vec& q) {
        double lq1 =
            logn1 - 0.5 * f3.m0() * simd::dot(q.data(), q.data(), d);
        double lq2 =
            logn2 - 0.5 * f3.l0() * simd::sq_dist(q.data(), x0.data(), d);
        double m = std::max(lq1, lq2);
        double logq =
            m + std::log(0.5 * std::exp(lq1 - m) + 0.5 * std::exp(lq2 - m));
        return std::exp(-f3.eval(q.data(), nullptr) - logq);
      });

  RatioEstimate out;
  out.numerator = num.mean;
  out.denominator = den.mean;
  out.ratio = num.mean / den.mean;
  out.se = out.ratio * std::sqrt(std::pow(num.se / num.mean, 2) +
                                 std::pow(den.se / den.mean, 2));
  if (out.se / out.ratio > 0.1)
    throw numerical_error("f3 mass ratio: relative SE above 0.1, increase n_mc");
  return out;
}

RatioEstimate f4_cap_mass(const AngularTwoScale& f4, std::size_t n_mc,
                          std::uint64_t seed) {
  const int d = f4.dim();
  if (d > 32)
    throw unsupported_error("f4 cap mass: d <= 32 for Monte Carlo accuracy");
  if (n_mc < 100) throw input_error("f4 cap mass: n_mc too small");
  const double edge = AngularTwoScale::cap_edge();
  const Vec& z = f4.z();
  const double sd_m = 1.0 / std::sqrt(f4.m1());
  const double sd_l = 1.0 / std::sqrt(f4.l1());
  Vec p(d);

  // cap integral with the m1-precision Gaussian as proposal
  CounterRng rng_c(seed, 0x66342063617071ull);
  const double logn_m = -0.5 * d * std::log(2.0 * M_PI * sd_m * sd_m);
  MeanSe cap = mc_mean(
      n_mc,
      [&]() -> const Vec& {
        for (int i = 0; i < d; ++i) p[i] = sd_m * rng_c.normal();
        return p;
      },
      [&](const Vec& q) {
        double r = std::sqrt(simd::dot(q.data(), q.data(), d));
        if (r < 1e-12) return 0.0;
        double t = simd::dot(z.data(), q.data(), d) / r;
        if (t < edge) return 0.0;
        double logq = logn_m - 0.5 * f4.m1() * r * r;
        return std::exp(-f4.eval(q.data(), nullptr) - logq);
      });

  // complement: H = 0 there, so f4 = L1 |x|^2/2 and the L1-precision
  // Gaussian is exact up to the indicator
  CounterRng rng_o(seed, 0x663420636f6d70ull);
  const double logn_l = -0.5 * d * std::log(2.0 * M_PI * sd_l * sd_l);
  MeanSe comp = mc_mean(
      n_mc,
      [&]() -> const Vec& {
        for (int i = 0; i < d; ++i) p[i] = sd_l * rng_o.normal();
        return p;
      },
      [&](const Vec& q) {
        double r = std::sqrt(simd::dot(q.data(), q.data(), d));
        if (r < 1e-12) return 0.0;
        double t = simd::dot(z.data(), q.data(), d) / r;
        if (t >= edge) return 0.0;
        double logq = logn_l - 0.5 * f4.l1() * r * r;
        return std::exp(-f4.eval(q.data(), nullptr) - logq);
      });

  double a = cap.mean, b = comp.mean, tot = a + b;
  RatioEstimate out;
  out.numerator = a;
  out.denominator = tot;
  out.ratio = a / tot;
  // delta method for A/(A+B) with independent A, B
  out.se = std::sqrt(std::pow(b * cap.se, 2) + std::pow(a * comp.se, 2)) /
           (tot * tot);
  if (out.se / out.ratio > 0.1)
    throw numerical_error("f4 cap mass: relative SE above 0.1, increase n_mc");
  return out;
}

double probe_smoothness(const TargetDensity& target,
                        const RegionSampler& region, int n_points,
                        SmoothnessMode mode, std::uint64_t seed) {
  const int d = target.dim();
  CounterRng rng(seed, 0x70726f6265736dull);
  Vec gp(d), gm(d), v(d), xp(d), xm(d);
  double worst = 0.0;
  if (mode == SmoothnessMode::HessianNorm) {
    for (int pt = 0; pt < n_points; ++pt) {
      Vec x = region(rng);
      double scale = 1.0 + std::sqrt(simd::dot(x.data(), x.data(), d));
      double eps = 1e-5 * scale;
      for (int i = 0; i < d; ++i) v[i] = rng.normal();
      double nv = std::sqrt(simd::dot(v.data(), v.data(), d));
      for (int i = 0; i < d; ++i) v[i] /= nv;
      double lambda = 0.0;
      for (int it = 0; it < 30; ++it) {
        for (int i = 0; i < d; ++i) {
          xp[i] = x[i] + eps * v[i];
          xm[i] = x[i] - eps * v[i];
        }
        target.eval(xp.data(), gp.data());
        target.eval(xm.data(), gm.data());
        for (int i = 0; i < d; ++i) v[i] = (gp[i] - gm[i]) / (2.0 * eps);
        lambda = std::sqrt(simd::dot(v.data(), v.data(), d));
        if (lambda < 1e-14) break;
        for (int i = 0; i < d; ++i) v[i] /= lambda;
      }
      worst = std::max(worst, lambda);
    }
  } else {
    for (int pt = 0; pt < n_points; ++pt) {
      Vec x = region(rng);
      double scale = 1.0 + std::sqrt(simd::dot(x.data(), x.data(), d));
      // log-uniform pair separation from 1e-4 to 1e-1 of the point scale
      double delta = scale * std::pow(10.0, -4.0 + 3.0 * rng.uniform());
      for (int i = 0; i < d; ++i) v[i] = rng.normal();
      double nv = std::sqrt(simd::dot(v.data(), v.data(), d));
      for (int i = 0; i < d; ++i) {
        xp[i] = x[i];
        xm[i] = x[i] + delta * v[i] / nv;
      }
      target.eval(xp.data(), gp.data());
      target.eval(xm.data(), gm.data());
      double diff = std::sqrt(simd::sq_dist(gp.data(), gm.data(), d));
      worst = std::max(worst, diff / delta);
    }
  }
  return worst;
}

double packing_lower_bound(int d, double angle) {
  if (d < 3) throw input_error("packing bound: d >= 3 required");
  if (!(angle > 0.0) || !(angle < M_PI / 2.0))
    throw input_error("packing bound: angle in (0, pi/2) required");
  double logv = std::log(static_cast<double>(d)) + 0.5 * std::log(2.0 * M_PI) -
                std::log(static_cast<double>(d - 1)) -
                0.5 * std::log(static_cast<double>(d + 2)) -
                std::log(3.0 * M_PI / 8.0) +
                (2.0 - d) * std::log(std::sin(angle));
  return std::exp(logv);
}

double intractability_threshold(int d, double theta_norm, Construction which) {
  if (theta_norm < 1.0)
    throw input_error("intractability threshold: |theta| >= 1 required");
  double angle, coef;
  if (which == Construction::Comp) {
    angle = 3.0 * M_PI / 8.0;
    coef = 5.0;
  } else {
    angle = 2.0 * std::acos(AngularTwoScale::cap_edge());
    coef = 3.0;
  }
  double log_rhs = -d * std::log(std::sin(angle)) - std::log(coef) -
                   std::log(theta_norm) - 0.5 * std::log(d + 2.0);
  double rhs = (log_rhs > 700.0 ? std::exp(700.0) : std::exp(log_rhs)) - 1.0;
  if (rhs <= 0.0) return 0.0;
  double n = std::ceil(rhs) - 1.0;
  return n < 0.0 ? 0.0 : n;
}

ModeHitResult mode_hit_experiment(const ModeHitConfig& cfg) {
  if (cfg.d < 8) throw input_error("mode hit: d >= 8 required");
  if (cfg.trials < 1) throw input_error("mode hit: trials >= 1 required");
  double l0 = cfg.l0 > 0.0 ? cfg.l0 : 1.25 * 6.0 * std::exp(24.0 / cfg.d) * cfg.m0;
  double h = cfg.step > 0.0 ? cfg.step : 1.0 / (2.0 * 396.0 * l0);
  CounterRng master(cfg.seed, 0x6d6f646568697400ull);
  int outer_hits = 0, inner_hits = 0;
  Vec dir(cfg.d), x(cfg.d), g(cfg.d);
  for (int t = 0; t < cfg.trials; ++t) {
    CounterRng rng = master.fork(t);
    for (int i = 0; i < cfg.d; ++i) dir[i] = rng.normal();
    SewnBimodal f3(cfg.m0, l0, dir, cfg.d);
    const Vec center = f3.sew_center();
    const double rin = f3.inner_radius(), rout = f3.outer_radius();
    bool outer = false, inner = false;
    auto visit = [&](const Vec& p) {
      double dist2 = simd::sq_dist(p.data(), center.data(), cfg.d);
      if (dist2 < rout * rout) outer = true;
      if (dist2 < rin * rin) inner = true;
    };
    std::fill(x.begin(), x.end(), 0.0);
    visit(x);
    if (cfg.kind == ModeHitConfig::Kind::JumpToCenter) {
      visit(center);
    } else if (cfg.kind == ModeHitConfig::Kind::Ula) {
      double noise = std::sqrt(2.0 * h);
      for (long it = 0; it < cfg.steps && !(outer && inner); ++it) {
        f3.eval(x.data(), g.data());
        for (int i = 0; i < cfg.d; ++i)
          x[i] += -h * g[i] + noise * rng.normal();
        visit(x);
      }
    }
    if (outer) ++outer_hits;
    if (inner) ++inner_hits;
  }
  auto rate_se = [&](int hits) {
    double r = static_cast<double>(hits) / cfg.trials;
    return std::pair<double, double>(
        r, std::sqrt(r * (1.0 - r) / cfg.trials));
  };
  auto [orate, ose] = rate_se(outer_hits);
  auto [irate, ise] = rate_se(inner_hits);
  return {orate, ose, irate, ise};
}

}  // namespace flatmc
