#include "flatmc/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "flatmc/csv.hpp"
#include "flatmc/errors.hpp"
#include "flatmc/flatten.hpp"
#include "flatmc/samplers.hpp"

namespace flatmc {

namespace {

double norm2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

A1Profile profile_for(BuiltTarget& bt, const TargetConfig& cfg) {
  if (bt.mixture) return a1_from_mixture(*bt.mixture);
  if (bt.bnn) return bnn_profile(*bt.bnn);
  if (cfg.type == "f3") {
    auto* f3 = dynamic_cast<const SewnBimodal*>(bt.density.get());
    double R = 3.0 * std::sqrt(cfg.d * std::log(f3->kappa0()) / f3->l0());
    Vec zero(cfg.d, 0.0), g;
    f3->eval(zero, g);
    return a1_from_convex_outside_ball(R, f3->m0(), 396.0 * f3->l0(),
                                       norm2(g));
  }
  if (cfg.type == "f4") {
    auto* f4 = dynamic_cast<const AngularTwoScale*>(bt.density.get());
    return a1_from_dissipativity({f4->m1(), 0.0}, 686.0 * f4->l1(), 0.0);
  }
  // quadratic U = (m/2)|x|^2
  return a1_from_dissipativity({cfg.curvature, 0.0}, cfg.curvature, 0.0);
}

// L_bar for the flattened-smoothness constant: the two-scale outside-ball
// Hessian bound when available, else the profile's L.
double l_bar_for(BuiltTarget& bt, const A1Profile& profile) {
  if (bt.mixture && bt.mixture->isotropic()) {
    try {
      return mixture_strong_outside_radius(*bt.mixture).hessian_norm;
    } catch (const hypothesis_error&) {
    }
  }
  return profile.lip;
}

}  // namespace

DerivedSetup derive_setup(BuiltTarget& bt, const PipelineConfig& cfg) {
  DerivedSetup s;
  s.profile = profile_for(bt, cfg.target);
  s.u_min_lower = bt.u_min_lower;
  Vec zero(bt.ref().dim(), 0.0);
  s.u0 = bt.ref().u(zero);

  const std::string& rule = cfg.flatten.m_rule;
  if (rule == "override")
    s.m_threshold = cfg.flatten.m_override;
  else if (rule == "bnn" && bt.bnn)
    s.m_threshold = choose_M(
        s.profile, bt.bnn->c_hat_bias() + std::log(bt.bnn->classes()), "bnn");
  else
    s.m_threshold = choose_M(s.profile, s.u0, rule);

  const int d = bt.ref().dim();
  if (bt.mixture) {
    s.condition_kind = "qcn";
    s.condition_lhs = mixture_condition_lhs(*bt.mixture);
    s.condition_rhs = static_cast<double>(d - 1);
    s.condition_met = s.condition_lhs <= s.condition_rhs;
    if (s.condition_met) {
      s.rho = rho_bound_mixture(*bt.mixture, 1.0);
    } else {
      s.rho = rho_bound_coco(s.profile, s.m_threshold, s.u_min_lower, 1.0, d);
    }
  } else {
    s.condition_kind = "cocoa";
    TractabilityReport rep = check_tractability(s.profile, cfg.chat, d);
    s.condition_lhs = rep.lhs;
    s.condition_rhs = rep.rhs;
    s.condition_met = rep.satisfied;
    if (rep.satisfied && d >= 2)
      s.rho = rho_bound_coco2(s.profile, cfg.chat, 1.0, d, s.u0);
    else
      s.rho = rho_bound_coco(s.profile, s.m_threshold, s.u_min_lower, 1.0, d);
  }
  s.l_hat = flattened_smoothness(s.profile, l_bar_for(bt, s.profile));
  return s;
}

namespace {

std::vector<Vec> sample_flattened(const TargetDensity& flat,
                                  const SamplerConfig& scfg, double l_hat,
                                  std::uint64_t seed, double* acceptance,
                                  std::vector<std::size_t>* offsets,
                                  const std::vector<Vec>* inits) {
  ChainConfig cc;
  cc.step = scfg.step > 0.0 ? scfg.step : 1.0 / (2.0 * l_hat);
  cc.max_stable_step = l_hat > 0.0 ? 1.0 / l_hat : 0.0;
  cc.steps = scfg.steps;
  cc.burn_in = scfg.burn_in;
  cc.thin = scfg.thin;
  std::vector<Vec> states;
  for (int chain = 0; chain < std::max(scfg.chains, 1); ++chain) {
    if (inits && !inits->empty()) cc.init = (*inits)[chain % inits->size()];
    cc.seed = CounterRng(seed, chain).next_u64();
    if (offsets) offsets->push_back(states.size());
    if (scfg.algorithm == "ula") {
      auto part = run_ula(flat, cc);
      states.insert(states.end(), part.begin(), part.end());
    } else {
      auto res = run_mala(flat, cc);
      if (acceptance) *acceptance = res.acceptance_rate;
      states.insert(states.end(), res.states.begin(), res.states.end());
    }
  }
  return states;
}

}  // namespace

PipelineReport run_pipeline(const PipelineConfig& cfg) {
  BuiltTarget bt = build_target(cfg.target);
  PipelineReport rep;
  rep.setup = derive_setup(bt, cfg);
  const TargetDensity& target = bt.ref();
  const int d = target.dim();
  FlattenSpec spec(rep.setup.m_threshold, cfg.flatten.quad_tol);
  FlattenedTarget flat(target, spec);

  std::vector<std::pair<std::string, TestFn>> fns;
  for (const auto& f : cfg.functions) fns.emplace_back(f.name(), f.build(d));
  if (fns.empty())
    fns.emplace_back("coord0", phi_coordinate(0));

  std::vector<Vec> inits;
  if (cfg.sampler.init == "means" && bt.mixture)
    inits = bt.mixture->means();
  else if (cfg.sampler.init != "origin")
    throw input_error("sampler: unknown init '" + cfg.sampler.init + "'");

  CounterRng master(cfg.master_seed, 0x706970656c696eull);
  for (int r = 0; r < cfg.replications; ++r) {
    std::uint64_t rep_seed = master.next_u64();
    double acc = 0.0;
    std::vector<std::size_t> offsets;
    auto states = sample_flattened(flat, cfg.sampler, rep.setup.l_hat,
                                   rep_seed, &acc, &offsets, &inits);
    rep.acceptance_rate = acc;
    std::vector<double> lw(states.size());
    for (std::size_t i = 0; i < states.size(); ++i)
      lw[i] = log_weight(target, spec, states[i]);
    rep.rho_hat = empirical_rho(lw);
    for (const auto& [name, phi] : fns) {
      SnisResult res = snis(states, target, spec, phi);
      std::vector<double> pv(states.size());
      for (std::size_t i = 0; i < states.size(); ++i) pv[i] = phi(states[i]);
      double se = snis_bootstrap_se_chains(pv, lw, offsets, 200,
                                           rep_seed ^ 0xb00ull);
      rep.rows.push_back({rep_seed, d, rep.setup.m_threshold,
                          rep.setup.rho.value, rep.setup.condition_met, name,
                          res.ess, res.estimate, se});
    }
  }
  return rep;
}

void write_pipeline_csv(const PipelineReport& report, std::ostream& os) {
  CsvWriter w(os);
  w.field(std::string("seed"))
      .field(std::string("d"))
      .field(std::string("M"))
      .field(std::string("rho_bound"))
      .field(std::string("condition_met"))
      .field(std::string("phi"))
      .field(std::string("ess"))
      .field(std::string("estimate"))
      .field(std::string("se"));
  w.endrow();
  for (const auto& r : report.rows) {
    w.field(static_cast<unsigned long long>(r.seed))
        .field(r.d)
        .field(r.m_threshold)
        .field(r.rho_bound)
        .field(r.condition_met)
        .field(r.phi)
        .field(r.ess)
        .field(r.estimate)
        .field(r.se);
    w.endrow();
  }
}

namespace {

// nearest-mean visit fractions for a two-mode mixture
std::pair<double, double> visit_fractions(const std::vector<Vec>& states,
                                          const GaussianMixture& gm) {
  if (gm.components() < 2 || states.empty()) return {1.0, 0.0};
  std::size_t n0 = 0;
  for (const auto& s : states) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      d0 += (s[i] - gm.means()[0][i]) * (s[i] - gm.means()[0][i]);
      d1 += (s[i] - gm.means()[1][i]) * (s[i] - gm.means()[1][i]);
    }
    if (d0 <= d1) ++n0;
  }
  double f0 = static_cast<double>(n0) / states.size();
  return {f0, 1.0 - f0};
}

}  // namespace

CompareReport compare_direct_vs_tailmatch(const PipelineConfig& cfg) {
  BuiltTarget bt = build_target(cfg.target);
  if (!bt.mixture)
    throw unsupported_error("compare: mixture target required (oracle truth)");
  const GaussianMixture& gm = *bt.mixture;
  const int d = gm.dim();
  DerivedSetup setup = derive_setup(bt, cfg);
  FlattenSpec spec(setup.m_threshold, cfg.flatten.quad_tol);

  if (cfg.functions.empty())
    throw input_error("compare: a test function is required");
  TestFn phi = cfg.functions[0].build(d);

  // i.i.d.-mixture-oracle truth
  CompareReport rep;
  {
    // chunked to keep memory flat
    const std::size_t chunk = 65536, chunks = 16;
    double s = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
      auto part = gm.sample_iid(chunk, (cfg.master_seed ^ 0x6f7261636c65ull) + c);
      for (const auto& x : part) s += phi(x);
    }
    rep.truth = s / static_cast<double>(chunk * chunks);
  }
  long long budget = cfg.budget > 0 ? cfg.budget : 100000;
  rep.budget = budget;

  CounterRng master(cfg.master_seed, 0x636f6d70617265ull);
  int wins = 0;
  for (int r = 0; r < cfg.replications; ++r) {
    std::uint64_t seed = master.next_u64();
    CompareRow row;
    row.replication = r;
    row.seed = seed;
    row.truth = rep.truth;

    const long burn = std::min<long>(budget / 5, 20000);
    const double h = cfg.sampler.step > 0.0 ? cfg.sampler.step
                                            : 1.0 / (2.0 * setup.l_hat);
    long long direct_evals = 0, tail_evals = 0;
    {  // (a) direct MALA on U, estimate = ergodic average
      ChainConfig cc;
      cc.step = h;
      cc.steps = budget;
      cc.burn_in = burn;
      cc.thin = std::max<long>(1, (budget - burn) / 20000);
      cc.seed = CounterRng(seed, 1).next_u64();
      CountingDensity counted(gm);
      auto res = run_mala(counted, cc);
      direct_evals = counted.count();
      double s = 0.0;
      for (const auto& x : res.states) s += phi(x);
      row.direct_estimate = s / res.states.size();
      row.direct_abs_error = std::abs(row.direct_estimate - rep.truth);
      auto [f0, f1] = visit_fractions(res.states, gm);
      row.direct_mode0_frac = f0;
      row.direct_mode1_frac = f1;
    }
    {  // (b) tail-matching: parallel chains on T o U + weight pass on the
      // retained states; chain steps plus weight evaluations match the budget
      const int chains = std::max(cfg.sampler.chains, 1);
      long retained = std::min<long>(20000, std::max<long>(1000, budget / 6));
      long per_chain = (budget - retained) / chains;
      ChainConfig cc;
      cc.step = h;
      cc.steps = per_chain;
      cc.burn_in = per_chain / 5;
      cc.thin = std::max<long>(
          1, (per_chain - cc.burn_in) * chains / retained);
      CountingDensity counted(gm);
      FlattenedTarget flat(counted, spec);
      std::vector<Vec> states;
      for (int c = 0; c < chains; ++c) {
        cc.seed = CounterRng(seed, 2 + c).next_u64();
        auto res = run_mala(flat, cc);
        states.insert(states.end(), res.states.begin(), res.states.end());
      }
      SnisResult est = snis(states, counted, spec, phi);
      tail_evals = counted.count();
      row.tail_estimate = est.estimate;
      row.tail_abs_error = std::abs(est.estimate - rep.truth);
      row.tail_ess = est.ess;
      auto [f0, f1] = visit_fractions(states, gm);
      row.tail_mode0_frac = f0;
      row.tail_mode1_frac = f1;
    }
    if (tail_evals > direct_evals + budget / 100)
      std::fprintf(stderr, "compare: budget skew tail=%lld direct=%lld\n",
                   tail_evals, direct_evals);
    row.tail_wins = row.tail_abs_error <= row.direct_abs_error;
    if (row.tail_wins) ++wins;
    rep.rows.push_back(row);
  }
  rep.tail_win_fraction =
      static_cast<double>(wins) / std::max(cfg.replications, 1);
  return rep;
}

void write_compare_csv(const CompareReport& report, std::ostream& os) {
  CsvWriter w(os);
  w.field(std::string("replication"))
      .field(std::string("seed"))
      .field(std::string("truth"))
      .field(std::string("direct_estimate"))
      .field(std::string("direct_abs_error"))
      .field(std::string("direct_mode0_frac"))
      .field(std::string("direct_mode1_frac"))
      .field(std::string("tail_estimate"))
      .field(std::string("tail_abs_error"))
      .field(std::string("tail_mode0_frac"))
      .field(std::string("tail_mode1_frac"))
      .field(std::string("tail_ess"))
      .field(std::string("tail_wins"));
  w.endrow();
  for (const auto& r : report.rows) {
    w.field(r.replication)
        .field(static_cast<unsigned long long>(r.seed))
        .field(r.truth)
        .field(r.direct_estimate)
        .field(r.direct_abs_error)
        .field(r.direct_mode0_frac)
        .field(r.direct_mode1_frac)
        .field(r.tail_estimate)
        .field(r.tail_abs_error)
        .field(r.tail_mode0_frac)
        .field(r.tail_mode1_frac)
        .field(r.tail_ess)
        .field(r.tail_wins);
    w.endrow();
  }
}

}  // namespace flatmc
