#pragma once
#include <cstdint>
#include <functional>

#include "flatmc/density.hpp"
#include "flatmc/rng.hpp"

namespace flatmc {

// Two Gaussians with curvatures m0 < L0 sewn smoothly along the sphere
// where their negative logdensities cross:
//   f1 = (m0/2)|x|^2 + (d/2) ln(2pi/m0),  f2 = (L0/2)|x-x0|^2 + (d/2) ln(2pi/L0),
//   f3 = g f1 + (1-g) f2,
// with |x0| = c0 sqrt(d ln k0 / L0) and the blend g a mollifier CDF of the
// distance to the sewing sphere of radius r_d around gamma x0.
class SewnBimodal : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  SewnBimodal(double m0, double l0, Vec direction, int d);

  int dim() const override { return d_; }
  double eval(const double* x, double* grad) const override;

  double m0() const { return m0_; }
  double l0() const { return l0_; }
  double kappa0() const { return kappa0_; }
  double c0() const { return c0_; }
  double gamma() const { return gamma_; }
  double r_d() const { return rd_; }
  double r_0() const { return r0_; }
  const Vec& x0() const { return x0_; }
  Vec sew_center() const;  // gamma x0
  double inner_radius() const { return rd_ - r0_; }
  double outer_radius() const { return rd_ + r0_; }

  // blend value g(x) in [0,1]
  double blend(const double* x) const;

  // the two component negative logdensities; eval() returns these bitwise on
  // the pure branches
  double f1_value(const double* x, double* grad) const;
  double f2_value(const double* x, double* grad) const;

 private:
  int d_;
  double m0_, l0_, kappa0_, c0_, gamma_, rd_, r0_;
  Vec x0_, center_;
  double lognorm1_, lognorm2_;
};

// constant c0 = [((16/9) sin(3pi/16))^2 - 1/6]^{-1/2}
double sewn_c0();

SewnBimodal build_f3(double m0, double l0, const Vec& direction, int d);

// Curvature switches between m1 (inside the cap around z) and L1 (outside)
// as a smoothed function of the angle cosine t = z.x/|x|:
//   f4 = (m1 H(t) + L1 (1 - H(t))) |x|^2 / 2,  f4(0) = 0,
// H a mollifier CDF with edges at (sqrt3+sqrt2)/4 and sqrt3/2.
class AngularTwoScale : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  AngularTwoScale(double m1, double l1, Vec direction, int d);

  int dim() const override { return d_; }
  double eval(const double* x, double* grad) const override;

  double m1() const { return m1_; }
  double l1() const { return l1_; }
  double kappa1() const { return l1_ / m1_; }
  const Vec& z() const { return z_; }
  static double cap_edge();   // (sqrt3+sqrt2)/4
  static double flat_edge();  // sqrt3/2
  double heaviside(double t) const;        // H(t)
  double heaviside_deriv(double t) const;  // dH(t)

 private:
  int d_;
  double m1_, l1_;
  Vec z_;
};

AngularTwoScale build_f4(double m1, double l1, const Vec& direction, int d);

struct RatioEstimate {
  double ratio;
  double se;
  double numerator;
  double denominator;
};

// Mass inside B_{r_d - r_0}(gamma x0) over total mass, by importance Monte
// Carlo with component-matched Gaussian proposals.
RatioEstimate f3_mass_ratio(const SewnBimodal& f3, std::size_t n_mc,
                            std::uint64_t seed);

// Mass of the cap {z.x/|x| >= (sqrt3+sqrt2)/4} over total mass.
RatioEstimate f4_cap_mass(const AngularTwoScale& f4, std::size_t n_mc,
                          std::uint64_t seed);

enum class SmoothnessMode { HessianNorm, GradLipschitz };

using RegionSampler = std::function<Vec(CounterRng&)>;

// HessianNorm: max over probe points of the finite-difference Hessian
// operator norm (power iteration on Hessian-vector products).
// GradLipschitz: max over sampled pairs of |grad f(x) - grad f(y)| / |x-y|.
double probe_smoothness(const TargetDensity& target,
                        const RegionSampler& region, int n_points,
                        SmoothnessMode mode, std::uint64_t seed);

// log-domain evaluation of
//   d sqrt(2pi) ((d-1) sqrt(d+2))^{-1} (3pi/8)^{-1} (sin angle)^{2-d}
double packing_lower_bound(int d, double angle);

enum class Construction { Comp, Comp2 };

// Largest integer N with N < sin(angle)^{-d} / (coef |theta| sqrt(d+2)) - 1,
// coef = 5 (Comp, angle 3pi/8) or 3 (Comp2, angle 2 acos((sqrt3+sqrt2)/4));
// 0 if none.
double intractability_threshold(int d, double theta_norm, Construction which);

struct ModeHitConfig {
  int d = 8;
  double m0 = 1.0;
  double l0 = 0.0;  // 0: auto 1.25 * 6 e^{24/d} m0
  long steps = 10000;
  double step = 0.0;  // 0: auto 1/(2 * 396 L0)
  int trials = 50;
  std::uint64_t seed = 1;
  enum class Kind { Ula, Stationary, JumpToCenter } kind = Kind::Ula;
};

struct ModeHitResult {
  double outer_rate, outer_se;  // entered int(B_{r_d+r_0}(gamma x0))
  double inner_rate, inner_se;  // entered int(B_{r_d-r_0}(gamma x0))
};

// Per trial, a hidden uniformly random mode direction is drawn, the sampler
// runs on f3 from the origin, and entry into the hidden balls is recorded.
ModeHitResult mode_hit_experiment(const ModeHitConfig& cfg);

}  // namespace flatmc
