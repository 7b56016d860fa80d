#include "flatmc/estimator.hpp"

#include <cmath>

#include "flatmc/errors.hpp"
#include "flatmc/rng.hpp"
#include "flatmc/simd.hpp"

namespace flatmc {

double log_weight(const TargetDensity& target, const FlattenSpec& spec,
                  const Vec& x) {
  double u = target.u(x);
  return t_value(spec, u) - u;
}

SnisResult snis(const std::vector<Vec>& samples, const TargetDensity& target,
                const FlattenSpec& spec, const TestFn& phi) {
  if (samples.empty()) throw input_error("snis: empty sample");
  const std::size_t n = samples.size();
  std::vector<double> lw(n), pv(n);
  for (std::size_t i = 0; i < n; ++i) {
    lw[i] = log_weight(target, spec, samples[i]);
    pv[i] = phi(samples[i]);
  }
  double lmax = simd::reduce_max(lw.data(), n);
  double wsum = 0.0, wphisum = 0.0, w2sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = std::exp(lw[i] - lmax);
    wsum += w;
    w2sum += w * w;
    wphisum += w * pv[i];
  }
  if (wsum <= 0.0) throw numerical_error("snis: all weights vanished");
  SnisResult res;
  res.estimate = wphisum / wsum;
  res.ess = wsum * wsum / w2sum;
  res.n = n;
  res.max_log_weight = lmax;
  res.weight_cv = std::sqrt(std::max(n / res.ess - 1.0, 0.0));
  return res;
}

double empirical_rho(const std::vector<double>& log_weights) {
  const std::size_t n = log_weights.size();
  if (n == 0) throw input_error("empirical_rho: empty sample");
  double lmax = simd::reduce_max(log_weights.data(), n);
  double s1 = 0.0, s2 = 0.0;
  for (double lw : log_weights) {
    double w = std::exp(lw - lmax);
    s1 += w;
    s2 += w * w;
  }
  return static_cast<double>(n) * s2 / (s1 * s1);
}

double empirical_rho(const std::vector<Vec>& samples,
                     const TargetDensity& target, const FlattenSpec& spec) {
  std::vector<double> lw(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    lw[i] = log_weight(target, spec, samples[i]);
  return empirical_rho(lw);
}

double ess(const std::vector<double>& log_weights) {
  const std::size_t n = log_weights.size();
  if (n == 0) throw input_error("ess: empty sample");
  double lmax = simd::reduce_max(log_weights.data(), n);
  double s1 = 0.0, s2 = 0.0;
  for (double lw : log_weights) {
    double w = std::exp(lw - lmax);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

namespace {

// iterate a tensor grid, calling f(point, trapezoid_weight)
template <typename F>
void tensor_grid(const Vec& lo, const Vec& hi, const std::vector<int>& grid,
                 F&& f) {
  const int d = static_cast<int>(lo.size());
  std::vector<int> idx(d, 0);
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = (hi[i] - lo[i]) / (grid[i] - 1);
  Vec p(d);
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      p[i] = lo[i] + h[i] * idx[i];
      w *= (idx[i] == 0 || idx[i] == grid[i] - 1) ? 0.5 * h[i] : h[i];
    }
    f(p, w);
    int i = 0;
    while (i < d && ++idx[i] == grid[i]) idx[i++] = 0;
    if (i == d) break;
  }
}

void check_quad_args(const TargetDensity& target, const Vec& lo, const Vec& hi,
                     const std::vector<int>& grid) {
  const int d = target.dim();
  if (d > 2) throw unsupported_error("quadrature: d <= 2 required");
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d ||
      static_cast<int>(grid.size()) != d)
    throw input_error("quadrature: box/grid dimension mismatch");
  for (int i = 0; i < d; ++i) {
    if (!(hi[i] > lo[i])) throw input_error("quadrature: empty box");
    if (grid[i] < 9) throw input_error("quadrature: grid too coarse");
  }
}

}  // namespace

double quadrature_rho(const TargetDensity& target, const FlattenSpec& spec,
                      const Vec& lo, const Vec& hi,
                      const std::vector<int>& grid) {
  check_quad_args(target, lo, hi, grid);
  const int d = target.dim();

  // pass 1: min U over the grid for a common shift
  double umin = 1e300;
  tensor_grid(lo, hi, grid, [&](const Vec& p, double) {
    umin = std::min(umin, target.eval(p.data(), nullptr));
  });

  double i_tu2u = 0.0, i_tu = 0.0, i_u = 0.0;
  double bmax_u = 0.0, bmax_tu2u = 0.0, max_u = 0.0, max_tu2u = 0.0;
  tensor_grid(lo, hi, grid, [&](const Vec& p, double w) {
    double u = target.eval(p.data(), nullptr) - umin;
    double t = t_value(spec, u + umin) - umin;
    double e_u = std::exp(-u);
    double e_tu = std::exp(-t);
    double e_tu2u = std::exp(t - 2.0 * u);
    i_u += w * e_u;
    i_tu += w * e_tu;
    i_tu2u += w * e_tu2u;
    max_u = std::max(max_u, e_u);
    max_tu2u = std::max(max_tu2u, e_tu2u);
    bool boundary = false;
    for (int i = 0; i < d; ++i)
      if (p[i] <= lo[i] || p[i] >= hi[i]) boundary = true;
    if (boundary) {
      bmax_u = std::max(bmax_u, e_u);
      bmax_tu2u = std::max(bmax_tu2u, e_tu2u);
    }
  });
  if (bmax_u > 1e-12 * max_u || bmax_tu2u > 1e-12 * max_tu2u)
    throw input_error("quadrature: box too small, boundary mass not negligible");
  return i_tu2u * i_tu / (i_u * i_u);
}

double quadrature_mean(const TargetDensity& target, const TestFn& phi,
                       const Vec& lo, const Vec& hi,
                       const std::vector<int>& grid) {
  check_quad_args(target, lo, hi, grid);
  double umin = 1e300;
  tensor_grid(lo, hi, grid, [&](const Vec& p, double) {
    umin = std::min(umin, target.eval(p.data(), nullptr));
  });
  double zn = 0.0, zphi = 0.0;
  tensor_grid(lo, hi, grid, [&](const Vec& p, double w) {
    double e = std::exp(-(target.eval(p.data(), nullptr) - umin));
    zn += w * e;
    zphi += w * e * phi(p);
  });
  return zphi / zn;
}

double snis_bootstrap_se(const std::vector<double>& phi_vals,
                         const std::vector<double>& log_weights, int resamples,
                         std::uint64_t seed) {
  const std::size_t n = phi_vals.size();
  if (n != log_weights.size() || n == 0)
    throw input_error("bootstrap: size mismatch or empty");
  double lmax = simd::reduce_max(log_weights.data(), n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(log_weights[i] - lmax);
  CounterRng rng(seed, 0x626f6f74ull);
  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < resamples; ++r) {
    double ws = 0.0, wps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = rng.below(n);
      ws += w[j];
      wps += w[j] * phi_vals[j];
    }
    double est = wps / ws;
    double delta = est - mean;
    mean += delta / (r + 1);
    m2 += delta * (est - mean);
  }
  return std::sqrt(m2 / (resamples - 1));
}

double snis_bootstrap_se_chains(const std::vector<double>& phi_vals,
                                const std::vector<double>& log_weights,
                                const std::vector<std::size_t>& chain_offsets,
                                int resamples, std::uint64_t seed) {
  const std::size_t n = phi_vals.size();
  const std::size_t c = chain_offsets.size();
  if (n != log_weights.size() || n == 0 || c == 0)
    throw input_error("bootstrap: size mismatch or empty");
  if (c == 1) return snis_bootstrap_se(phi_vals, log_weights, resamples, seed);
  double lmax = simd::reduce_max(log_weights.data(), n);
  // per-chain weight and weighted-phi sums
  std::vector<double> ws(c, 0.0), wps(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t lo = chain_offsets[k];
    std::size_t hi = k + 1 < c ? chain_offsets[k + 1] : n;
    for (std::size_t i = lo; i < hi; ++i) {
      double w = std::exp(log_weights[i] - lmax);
      ws[k] += w;
      wps[k] += w * phi_vals[i];
    }
  }
  CounterRng rng(seed, 0x626f6f74636861ull);
  double mean = 0.0, m2 = 0.0;
  for (int r = 0; r < resamples; ++r) {
    double wsum = 0.0, wpsum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      std::size_t j = rng.below(c);
      wsum += ws[j];
      wpsum += wps[j];
    }
    double est = wpsum / wsum;
    double delta = est - mean;
    mean += delta / (r + 1);
    m2 += delta * (est - mean);
  }
  return std::sqrt(m2 / (resamples - 1));
}

TestFn phi_coordinate(int index) {
  return [index](const Vec& x) { return x.at(index); };
}

TestFn phi_bump(Vec center, double width) {
  return [center = std::move(center), width](const Vec& x) {
    double r2 = simd::sq_dist(x.data(), center.data(), center.size()) /
                (width * width);
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
  };
}

TestFn phi_affine(Vec coeffs, double offset) {
  return [coeffs = std::move(coeffs), offset](const Vec& x) {
    return offset + simd::dot(coeffs.data(), x.data(), coeffs.size());
  };
}

}  // namespace flatmc
