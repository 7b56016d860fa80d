#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flatmc/errors.hpp"
#include "flatmc/estimator.hpp"
#include "flatmc/samplers.hpp"
#include "oracles.hpp"

using namespace flatmc;

TEST_CASE("log weights are nonnegative and bounded by the band") {
  GaussianMixture gm({0.5, 0.5}, {{-1.0}, {1.0}}, {1.0, 5.0});
  double m_thr = gm.u(Vec{1.0}) + 1.0;
  FlattenSpec spec(m_thr);
  CounterRng rng(3);
  double umin_grid = 1e300;
  for (int i = 0; i < 2000; ++i) {
    Vec x{-6.0 + 12.0 * i / 1999.0};
    umin_grid = std::min(umin_grid, gm.u(x));
  }
  for (int i = 0; i < 500; ++i) {
    Vec x{4.0 * rng.normal()};
    double lw = log_weight(gm, spec, x);
    CHECK(lw >= 0.0);
    CHECK(lw <= m_thr + 1.0 - umin_grid + 1e-9);
  }
}

TEST_CASE("snis: self-normalization and no-flattening limits") {
  GaussianMixture gm({1.0}, {{0.0}}, {1.0});
  auto samples = sample_mixture_iid(gm, 5000, 11);
  FlattenSpec flat_spec(2.0);
  auto ones = snis(samples, gm, flat_spec, [](const Vec&) { return 1.0; });
  CHECK(ones.estimate == 1.0);
  CHECK(ones.ess > 0.0);
  CHECK(ones.ess <= static_cast<double>(samples.size()));

  // M + 2 <= min U: T o U = U, all weights 1, estimate = plain mean
  FlattenSpec none(-5.0);
  auto res = snis(samples, gm, none, phi_coordinate(0));
  double mean = 0.0;
  for (const auto& x : samples) mean += x[0];
  mean /= samples.size();
  CHECK(res.estimate == doctest::Approx(mean).epsilon(1e-14));
  CHECK(res.ess == doctest::Approx(static_cast<double>(samples.size())));
  CHECK(res.max_log_weight == 0.0);
}

TEST_CASE("snis estimate stays within the sample range of phi") {
  GaussianMixture gm({0.5, 0.5}, {{-2.0}, {2.0}}, {1.0, 4.0});
  FlattenSpec spec(gm.u(Vec{-2.0}) + 0.7);
  auto samples = sample_mixture_iid(gm, 2000, 5);
  auto phi = phi_bump(Vec{2.0}, 1.5);
  auto res = snis(samples, gm, spec, phi);
  double lo = 1e300, hi = -1e300;
  for (const auto& x : samples) {
    lo = std::min(lo, phi(x));
    hi = std::max(hi, phi(x));
  }
  CHECK(res.estimate >= lo);
  CHECK(res.estimate <= hi);
}

TEST_CASE("snis on exact flattened draws matches the quadrature truth") {
  GaussianMixture gm({0.45, 0.55}, {{-1.3}, {1.1}}, {2.0, 7.0});
  double m_thr = std::min(gm.u(Vec{-1.3}), gm.u(Vec{1.1})) + 0.8;
  FlattenSpec spec(m_thr);
  GaussianMixture env({0.5, 0.5}, {{-1.3}, {1.1}}, {0.8, 2.0});
  auto draws = rejection_sample_flattened(gm, spec, env, 60000, 23);
  auto phi = phi_bump(Vec{1.1}, 0.9);
  auto res = snis(draws, gm, spec, phi);
  double truth = quadrature_mean(gm, phi, Vec{-9.0}, Vec{9.0}, {40001});
  std::vector<double> pv(draws.size()), lw(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    pv[i] = phi(draws[i]);
    lw[i] = log_weight(gm, spec, draws[i]);
  }
  double se = snis_bootstrap_se(pv, lw, 200, 99);
  CHECK(std::abs(res.estimate - truth) <= 3.0 * se);
}

TEST_CASE("shift invariance: U + a and M + a leave estimates unchanged") {
  GaussianMixture gm({0.5, 0.5}, {{-1.0}, {1.0}}, {2.0, 3.0});
  const double shift = 7.25;
  class Shifted : public TargetDensity {
   public:
    using TargetDensity::eval;
    using TargetDensity::u;
    Shifted(const TargetDensity& base, double a) : base_(base), a_(a) {}
    int dim() const override { return base_.dim(); }
    double eval(const double* x, double* g) const override {
      return base_.eval(x, g) + a_;
    }

   private:
    const TargetDensity& base_;
    double a_;
  };
  Shifted shifted(gm, shift);
  double m_thr = gm.u(Vec{-1.0}) + 0.5;
  FlattenSpec spec(m_thr), spec_shift(m_thr + shift);
  auto samples = sample_mixture_iid(gm, 3000, 77);
  auto phi = phi_coordinate(0);
  auto a = snis(samples, gm, spec, phi);
  auto b = snis(samples, shifted, spec_shift, phi);
  // (U + a) - (M + a) rounds differently from U - M in floating point, so
  // exact bit equality is unattainable; the cancellation leaves ~1 ulp
  CHECK(a.estimate == doctest::Approx(b.estimate).epsilon(1e-12));
  CHECK(a.ess == doctest::Approx(b.ess).epsilon(1e-12));
}

TEST_CASE("empirical rho basics") {
  std::vector<double> equal(64, 3.5);
  CHECK(empirical_rho(equal) == doctest::Approx(1.0).epsilon(1e-14));
  GaussianMixture gm({1.0}, {{0.0}}, {1.0});
  FlattenSpec none(-9.0);
  auto samples = sample_mixture_iid(gm, 1000, 2);
  CHECK(empirical_rho(samples, gm, none) == doctest::Approx(1.0));
}

TEST_CASE("empirical rho agrees with quadrature rho on exact draws") {
  GaussianMixture gm({0.5, 0.5}, {{-1.0}, {1.2}}, {2.0, 5.0});
  double m_thr = std::min(gm.u(Vec{-1.0}), gm.u(Vec{1.2})) + 1.0;
  FlattenSpec spec(m_thr);
  double rho_q = quadrature_rho(gm, spec, Vec{-9.0}, Vec{9.0}, {40001});
  GaussianMixture env({0.5, 0.5}, {{-1.0}, {1.2}}, {0.8, 1.6});
  auto draws = rejection_sample_flattened(gm, spec, env, 60000, 8);
  std::vector<double> lw(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i)
    lw[i] = log_weight(gm, spec, draws[i]);
  double rho_hat = empirical_rho(lw);
  // bootstrap SE of the plug-in rho
  CounterRng rng(55);
  std::vector<double> boot(200);
  for (auto& b : boot) {
    std::vector<double> sample(lw.size());
    for (std::size_t i = 0; i < lw.size(); ++i)
      sample[i] = lw[rng.below(lw.size())];
    b = empirical_rho(sample);
  }
  auto ms = oracle::mean_se(boot);
  CHECK(std::abs(rho_hat - rho_q) <= 3.0 * std::max(ms.sd, 1e-4));
}

TEST_CASE("quadrature rho properties") {
  GaussianMixture gm({1.0}, {{0.0}}, {1.0});
  FlattenSpec none(-9.0);
  double r = quadrature_rho(gm, none, Vec{-9.0}, Vec{9.0}, {20001});
  CHECK(r == doctest::Approx(1.0).epsilon(1e-8));

  // flatten the bottom band of a gaussian: grid refinement agreement
  FlattenSpec spec(0.0);
  double r1 = quadrature_rho(gm, spec, Vec{-10.0}, Vec{10.0}, {20001});
  double r2 = quadrature_rho(gm, spec, Vec{-10.0}, Vec{10.0}, {40001});
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-6));
  CHECK(r1 >= 1.0 - 1e-6);

  // 2-d case with a box check
  GaussianMixture gm2({0.5, 0.5}, {{-0.8, 0.0}, {0.8, 0.2}}, {1.5, 3.0});
  FlattenSpec spec2(gm2.u(Vec{-0.8, 0.0}) + 1.0);
  double r2d = quadrature_rho(gm2, spec2, Vec{-8.0, -8.0}, Vec{8.0, 8.0},
                              {801, 801});
  CHECK(r2d >= 1.0 - 1e-6);
  CHECK_THROWS_AS(quadrature_rho(gm2, spec2, Vec{-1.0, -1.0}, Vec{1.0, 1.0},
                                 {101, 101}),
                  input_error);
  GaussianMixture gm3({1.0}, {Vec(3, 0.0)}, {1.0});
  CHECK_THROWS_AS(quadrature_rho(gm3, none, Vec(3, -5.0), Vec(3, 5.0),
                                 {51, 51, 51}),
                  unsupported_error);
}

TEST_CASE("ess behavior") {
  std::vector<double> equal(10, 0.0);
  CHECK(ess(equal) == doctest::Approx(10.0));
  std::vector<double> dominant{0.0, -800.0, -900.0, -1000.0};
  CHECK(ess(dominant) == doctest::Approx(1.0));
  CounterRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> lw(100);
    for (auto& v : lw) v = 3.0 * rng.normal();
    double e = ess(lw);
    CHECK(e > 0.0);
    CHECK(e <= 100.0 + 1e-9);
  }
}

TEST_CASE("test function builders") {
  auto c1 = phi_coordinate(1);
  CHECK(c1(Vec{3.0, 4.0}) == 4.0);
  auto bump = phi_bump(Vec{0.0, 0.0}, 2.0);
  CHECK(bump(Vec{0.0, 0.0}) == doctest::Approx(1.0));
  CHECK(bump(Vec{2.0, 0.0}) == 0.0);
  CHECK(bump(Vec{5.0, 5.0}) == 0.0);
  CHECK(bump(Vec{1.0, 0.0}) > 0.0);
  CHECK(bump(Vec{1.0, 0.0}) < 1.0);
  auto aff = phi_affine(Vec{2.0, -1.0}, 0.5);
  CHECK(aff(Vec{1.0, 1.0}) == doctest::Approx(1.5));
}
