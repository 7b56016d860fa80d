#include "flatmc/samplers.hpp"

#include <cmath>
#include <cstdio>

#include "flatmc/errors.hpp"
#include "flatmc/rng.hpp"
#include "flatmc/simd.hpp"

namespace flatmc {

void ChainConfig::validate() const {
  if (!(step > 0.0)) throw input_error("chain: step must be positive");
  if (steps <= burn_in) throw input_error("chain: steps must exceed burn_in");
  if (thin < 1) throw input_error("chain: thin must be >= 1");
}

namespace {

void warn_step(const ChainConfig& cfg) {
  static bool warned = false;
  if (!warned && cfg.max_stable_step > 0.0 && cfg.step > cfg.max_stable_step) {
    warned = true;
    std::fprintf(stderr,
                 "flatmc: warning: step %.3g exceeds recommended %.3g\n",
                 cfg.step, cfg.max_stable_step);
  }
}

bool finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

std::vector<Vec> run_ula(const TargetDensity& target, const ChainConfig& cfg) {
  cfg.validate();
  warn_step(cfg);
  const int d = target.dim();
  Vec x = cfg.init.empty() ? Vec(d, 0.0) : cfg.init;
  if (static_cast<int>(x.size()) != d)
    throw input_error("chain: init dimension mismatch");
  CounterRng rng(cfg.seed, 0x756c61ull);
  const double h = cfg.step, noise = std::sqrt(2.0 * h);
  Vec g(d);
  std::vector<Vec> out;
  out.reserve((cfg.steps - cfg.burn_in) / cfg.thin + 1);
  for (long it = 1; it <= cfg.steps; ++it) {
    target.eval(x.data(), g.data());
    simd::axpy(-h, g.data(), x.data(), d);
    for (int i = 0; i < d; ++i) x[i] += noise * rng.normal();
    if (!finite(x)) throw divergence_error("ula: non-finite state", it);
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0)
      out.push_back(x);
  }
  return out;
}

MalaResult run_mala(const TargetDensity& target, const ChainConfig& cfg) {
  cfg.validate();
  warn_step(cfg);
  const int d = target.dim();
  Vec x = cfg.init.empty() ? Vec(d, 0.0) : cfg.init;
  if (static_cast<int>(x.size()) != d)
    throw input_error("chain: init dimension mismatch");
  CounterRng rng(cfg.seed, 0x6d616c61ull);
  const double h = cfg.step, noise = std::sqrt(2.0 * h);
  Vec gx(d), gy(d), y(d), mean_xy(d), mean_yx(d);
  double ux = target.eval(x.data(), gx.data());
  long accepted = 0;
  MalaResult res;
  res.states.reserve((cfg.steps - cfg.burn_in) / cfg.thin + 1);
  for (long it = 1; it <= cfg.steps; ++it) {
    for (int i = 0; i < d; ++i) {
      mean_xy[i] = x[i] - h * gx[i];
      y[i] = mean_xy[i] + noise * rng.normal();
    }
    double uy = target.eval(y.data(), gy.data());
    for (int i = 0; i < d; ++i) mean_yx[i] = y[i] - h * gy[i];
    // log q(y, x) - log q(x, y) with q(a,b) ~ N(b; a - h grad(a), 2h I)
    double fwd = simd::sq_dist(y.data(), mean_xy.data(), d);
    double bwd = simd::sq_dist(x.data(), mean_yx.data(), d);
    double log_alpha = ux - uy + (fwd - bwd) / (4.0 * h);
    if (std::log(rng.uniform_pos()) < log_alpha) {
      x = y;
      gx = gy;
      ux = uy;
      ++accepted;
    }
    if (!finite(x)) throw divergence_error("mala: non-finite state", it);
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0)
      res.states.push_back(x);
  }
  res.acceptance_rate = static_cast<double>(accepted) / cfg.steps;
  return res;
}

std::vector<Vec> rejection_sample_flattened(const TargetDensity& target,
                                            const FlattenSpec& spec,
                                            const GaussianMixture& envelope,
                                            std::size_t n, std::uint64_t seed) {
  const int d = target.dim();
  if (d > 3)
    throw unsupported_error("rejection sampler: d <= 3 required");
  if (envelope.dim() != d)
    throw input_error("rejection sampler: envelope dimension mismatch");

  // probe the log-domination constant: max of -T(U) - log q over a grid
  // spanning the envelope, plus envelope draws; then a safety factor 2
  double widest = 0.0;
  for (int i = 0; i < envelope.components(); ++i)
    widest = std::max(widest, 1.0 / std::sqrt(envelope.comp_m(i)));
  double lo = 0.0, hi = 0.0;
  for (const auto& mu : envelope.means())
    for (double v : mu) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  lo -= 9.0 * widest;
  hi += 9.0 * widest;
  const int grid = d == 1 ? 4001 : (d == 2 ? 141 : 41);
  double log_c = -1e300;
  Vec p(d);
  std::vector<int> idx(d, 0);
  for (;;) {
    for (int i = 0; i < d; ++i)
      p[i] = lo + (hi - lo) * idx[i] / (grid - 1);
    double val = -flattened_eval(target, spec, p.data(), nullptr) -
                 envelope.log_pdf(p.data());
    if (val > log_c) log_c = val;
    int i = 0;
    while (i < d && ++idx[i] == grid) idx[i++] = 0;
    if (i == d) break;
  }
  CounterRng prng(seed, 0x70726f6265ull);
  auto probes = envelope.sample_iid(2000, prng.next_u64());
  for (const auto& q : probes) {
    double val = -flattened_eval(target, spec, q.data(), nullptr) -
                 envelope.log_pdf(q.data());
    if (val > log_c) log_c = val;
  }
  log_c += std::log(2.0);

  CounterRng rng(seed, 0x72656a65637400ull);
  std::vector<Vec> out;
  out.reserve(n);
  std::size_t proposals = 0;
  while (out.size() < n) {
    auto cand = envelope.sample_iid(1, rng.next_u64());
    ++proposals;
    const Vec& q = cand[0];
    double log_ratio = -flattened_eval(target, spec, q.data(), nullptr) -
                       envelope.log_pdf(q.data()) - log_c;
    if (std::log(rng.uniform_pos()) < log_ratio) out.push_back(q);
    if (proposals >= 20000 && out.size() < proposals / 10000)
      throw envelope_error("rejection sampler: acceptance rate below 1e-4");
  }
  return out;
}

}  // namespace flatmc
