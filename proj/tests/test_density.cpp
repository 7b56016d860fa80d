#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "flatmc/density.hpp"
#include "flatmc/errors.hpp"
#include "oracles.hpp"

using namespace flatmc;

TEST_CASE("single-component mixture is a quadratic") {
  GaussianMixture gm({1.0}, {{0.0, 0.0}}, {2.5});
  Vec g;
  double u0 = gm.eval(Vec{0.0, 0.0}, g);
  CHECK(u0 == doctest::Approx(0.0));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  Vec x{1.0, -2.0};
  double u = gm.eval(x, g);
  CHECK(u == doctest::Approx(0.5 * 2.5 * 5.0));
  CHECK(g[0] == doctest::Approx(2.5 * 1.0));
  CHECK(g[1] == doctest::Approx(2.5 * -2.0));
}

TEST_CASE("symmetric two-component mixture has zero gradient at center") {
  GaussianMixture gm({0.5, 0.5}, {{1.0, 0.5}, {-1.0, -0.5}}, {2.0, 2.0});
  Vec g;
  gm.eval(Vec{0.0, 0.0}, g);
  CHECK(std::abs(g[0]) < 1e-14);
  CHECK(std::abs(g[1]) < 1e-14);
}

TEST_CASE("mixture gradient matches finite differences") {
  CounterRng rng(42);
  GaussianMixture gm({0.3, 0.7}, {{0.5, -1.0, 2.0}, {-0.5, 1.5, 0.0}},
                     {1.0, 3.0});
  for (int i = 0; i < 20; ++i) {
    Vec x{3.0 * rng.normal(), 3.0 * rng.normal(), 3.0 * rng.normal()};
    Vec g;
    gm.eval(x, g);
    auto fd = oracle::fd_gradient([&](const Vec& p) { return gm.u(p); }, x);
    CHECK(oracle::rel_err_vec(g, fd) < 1e-6);
  }
}

TEST_CASE("full-covariance mixture gradient and eigen-extremes") {
  Eigen::MatrixXd s1(2, 2), s2(2, 2);
  s1 << 2.0, 0.5, 0.5, 1.0;
  s2 << 3.0, -0.4, -0.4, 2.0;
  auto gm = GaussianMixture::full({0.4, 0.6}, {{1.0, 0.0}, {-1.0, 0.5}}, {s1, s2});
  CHECK(gm.comp_m(0) == doctest::Approx(oracle::eig_extremes(s1).first));
  CHECK(gm.comp_l(1) == doctest::Approx(oracle::eig_extremes(s2).second));
  CounterRng rng(5);
  for (int i = 0; i < 100; ++i) {
    Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
    Vec g;
    gm.eval(x, g);
    auto fd = oracle::fd_gradient([&](const Vec& p) { return gm.u(p); }, x);
    CHECK(oracle::rel_err_vec(g, fd) < 1e-5);
  }
}

TEST_CASE("evaluation invariant under component reordering") {
  GaussianMixture a({0.3, 0.7}, {{1.0}, {-2.0}}, {1.0, 4.0});
  GaussianMixture b({0.7, 0.3}, {{-2.0}, {1.0}}, {4.0, 1.0});
  CounterRng rng(8);
  for (int i = 0; i < 50; ++i) {
    Vec x{5.0 * rng.normal()};
    Vec ga, gb;
    double ua = a.eval(x, ga), ub = b.eval(x, gb);
    CHECK(ua == doctest::Approx(ub).epsilon(1e-14));
    CHECK(ga[0] == doctest::Approx(gb[0]).epsilon(1e-13));
  }
}

TEST_CASE("well-separated components stay finite") {
  // |x1 - x2| = 100 / sqrt(min s)
  double smin = 0.25;
  GaussianMixture gm({0.5, 0.5}, {{0.0}, {100.0 / std::sqrt(smin)}},
                     {smin, 9.0});
  for (double x : {-50.0, 0.0, 100.0, 200.0, 350.0}) {
    Vec g;
    double u = gm.eval(Vec{x}, g);
    CHECK(std::isfinite(u));
    CHECK(std::isfinite(g[0]));
  }
}

TEST_CASE("invalid mixtures are rejected") {
  CHECK_THROWS_AS(GaussianMixture({0.5, 0.6}, {{0.0}, {1.0}}, {1.0, 1.0}),
                  input_error);
  CHECK_THROWS_AS(GaussianMixture({1.0}, {{0.0}}, {-1.0}), input_error);
  GaussianMixture gm({1.0}, {{0.0}}, {1.0});
  CHECK_THROWS_AS(gm.u(Vec{0.0, 1.0}), input_error);
}

TEST_CASE("iid sampler: law of large numbers and determinism") {
  GaussianMixture gm({1.0}, {{0.0, 0.0, 0.0}}, {1.0});
  const std::size_t n = 100000;
  auto s1 = sample_mixture_iid(gm, n, 99);
  auto s2 = sample_mixture_iid(gm, n, 99);
  CHECK(s1 == s2);
  for (int j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (const auto& x : s1) mean += x[j];
    mean /= n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("degenerate weights put all draws on one component") {
  GaussianMixture gm({1.0 - 1e-15, 1e-15}, {{0.0}, {1000.0}}, {1.0, 1.0});
  auto s = sample_mixture_iid(gm, 2000, 3);
  for (const auto& x : s) CHECK(std::abs(x[0]) < 100.0);
}

TEST_CASE("component masses carry the gaussian normalizers") {
  // e^{-U} = sum a_i exp(-s_i |x - x_i|^2 / 2): the mass of component i is
  // proportional to a_i s_i^{-d/2}
  GaussianMixture gm({0.4, 0.6}, {{-1.5}, {2.0}}, {1.0, 3.0});
  auto m = gm.component_masses();
  double w0 = 0.4, w1 = 0.6 / std::sqrt(3.0);
  CHECK(m[0] == doctest::Approx(w0 / (w0 + w1)).epsilon(1e-12));
  CHECK(m[1] == doctest::Approx(w1 / (w0 + w1)).epsilon(1e-12));
  // log_pdf integrates to one against the same convention
  const int grid = 40001;
  double lo = -12.0, hi = 12.0, h = (hi - lo) / (grid - 1);
  double z = 0.0;
  for (int i = 0; i < grid; ++i) {
    double w = (i == 0 || i == grid - 1) ? 0.5 : 1.0;
    z += w * h * std::exp(gm.log_pdf(Vec{lo + i * h}));
  }
  CHECK(z == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("iid sampler matches the e^{-U} quadrature cdf in 1d") {
  GaussianMixture gm({0.4, 0.6}, {{-1.5}, {2.0}}, {1.0, 3.0});
  const std::size_t n = 100000;
  auto s = sample_mixture_iid(gm, n, 17);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = s[i][0];
  std::sort(xs.begin(), xs.end());
  // quadrature cdf of e^{-U} itself, independent of log_pdf
  const int grid = 20001;
  double lo = -9.0, hi = 9.0, h = (hi - lo) / (grid - 1);
  std::vector<double> dens(grid), cdf(grid, 0.0);
  for (int i = 0; i < grid; ++i)
    dens[i] = std::exp(-gm.u(Vec{lo + i * h}));
  for (int i = 1; i < grid; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
  for (auto& c : cdf) c /= cdf.back();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; i += 97) {
    double x = xs[i];
    int k = static_cast<int>((x - lo) / h);
    k = std::clamp(k, 0, grid - 1);
    double emp = static_cast<double>(i) / n;
    worst = std::max(worst, std::abs(emp - cdf[k]));
  }
  CHECK(worst <= 0.01);
}

TEST_CASE("full-covariance sampling hits the right covariance") {
  Eigen::MatrixXd s1(2, 2);
  s1 << 2.0, 0.7, 0.7, 1.0;
  auto gm = GaussianMixture::full({1.0}, {{0.5, -0.5}}, {s1});
  auto draws = gm.sample_iid(200000, 5);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& x : draws) mean += Eigen::Vector2d(x[0], x[1]);
  mean /= static_cast<double>(draws.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& x : draws) {
    Eigen::Vector2d v(x[0] - mean[0], x[1] - mean[1]);
    cov += v * v.transpose();
  }
  cov /= static_cast<double>(draws.size());
  Eigen::Matrix2d want = s1.inverse();
  CHECK((cov - want).norm() < 0.02);
}

TEST_CASE("quadratic density gradient matches finite differences") {
  QuadraticDensity quad(4, 1.7, 0.3);
  CounterRng rng(2);
  for (int i = 0; i < 100; ++i) {
    Vec x{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    Vec g;
    quad.eval(x, g);
    auto fd = oracle::fd_gradient([&](const Vec& p) { return quad.u(p); }, x);
    CHECK(oracle::rel_err_vec(g, fd) < 1e-5);
  }
}

TEST_CASE("concurrent evaluation is safe") {
  GaussianMixture gm({0.5, 0.5}, {{1.0, 0.0}, {-1.0, 0.0}}, {1.0, 2.0});
  Vec ref_g;
  double ref = gm.eval(Vec{0.3, 0.4}, ref_g);
  std::vector<double> got(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      Vec g;
      for (int i = 0; i < 1000; ++i) got[t] = gm.eval(Vec{0.3, 0.4}, g);
    });
  for (auto& th : threads) th.join();
  for (double v : got) CHECK(v == ref);
}
