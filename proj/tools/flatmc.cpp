#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "flatmc/simd.hpp"

#include "flatmc/adversarial.hpp"
#include "flatmc/bounds.hpp"
#include "flatmc/csv.hpp"
#include "flatmc/errors.hpp"
#include "flatmc/pipeline.hpp"
#include "flatmc/samplers.hpp"

using namespace flatmc;

namespace {

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw input_error("cannot open output file '" + path + "'");
  return file;
}

void cmd_profile(const std::string& config_path, bool csv_only) {
  PipelineConfig cfg = load_config(config_path);
  BuiltTarget bt = build_target(cfg.target);
  DerivedSetup s = derive_setup(bt, cfg);
  if (!csv_only) {
    std::printf("%-12s %s\n", "field", "value");
    std::printf("%-12s %s\n", "c_U", fmt_double(s.profile.c_u).c_str());
    std::printf("%-12s %s\n", "R", fmt_double(s.profile.radius).c_str());
    std::printf("%-12s %s\n", "L", fmt_double(s.profile.lip).c_str());
    std::printf("%-12s %s\n", "m", fmt_double(s.profile.conv).c_str());
    std::printf("%-12s %s\n", "grad0", fmt_double(s.profile.grad0).c_str());
    std::printf("%-12s %s\n", "U(0)", fmt_double(s.u0).c_str());
    std::printf("%-12s %s\n", "M", fmt_double(s.m_threshold).c_str());
    std::printf("%-12s %s\n", "Lhat", fmt_double(s.l_hat).c_str());
    std::printf("%-12s %s\n", "condition", s.condition_kind.c_str());
    std::printf("%-12s %s\n", "lhs", fmt_double(s.condition_lhs).c_str());
    std::printf("%-12s %s\n", "rhs", fmt_double(s.condition_rhs).c_str());
    std::printf("%-12s %s\n", "met", s.condition_met ? "true" : "false");
    std::printf("%-12s %s\n", "provenance", s.profile.provenance.c_str());
  }
  CsvWriter w(std::cout);
  w.field(std::string("c_U")).field(std::string("R")).field(std::string("L"))
      .field(std::string("m")).field(std::string("grad0"))
      .field(std::string("U0")).field(std::string("M"))
      .field(std::string("Lhat")).field(std::string("condition"))
      .field(std::string("lhs")).field(std::string("rhs"))
      .field(std::string("met"));
  w.endrow();
  w.field(s.profile.c_u).field(s.profile.radius).field(s.profile.lip)
      .field(s.profile.conv).field(s.profile.grad0).field(s.u0)
      .field(s.m_threshold).field(s.l_hat).field(s.condition_kind)
      .field(s.condition_lhs).field(s.condition_rhs).field(s.condition_met);
  w.endrow();
}

void cmd_bounds(const std::string& config_path, const std::string& out_path) {
  PipelineConfig cfg = load_config(config_path);
  BuiltTarget bt = build_target(cfg.target);
  DerivedSetup s = derive_setup(bt, cfg);
  SamplePlan plan = sample_size_plan(s.rho.value, 0.1, 0.1);
  std::ofstream file;
  std::ostream& os = open_out(file, out_path);
  CsvWriter w(os);
  w.field(std::string("d")).field(std::string("c")).field(std::string("chat"))
      .field(std::string("condition_lhs")).field(std::string("condition_rhs"))
      .field(std::string("rho_bound")).field(std::string("regime"))
      .field(std::string("N_plan")).field(std::string("tv_budget"));
  w.endrow();
  w.field(bt.ref().dim()).field(s.rho.c).field(s.rho.chat)
      .field(s.condition_lhs).field(s.condition_rhs).field(s.rho.value)
      .field(s.rho.regime_name())
      .field(static_cast<unsigned long long>(plan.n)).field(plan.tv_budget);
  w.endrow();
}

void cmd_sample(const std::string& config_path, const std::string& out_path,
                long steps, long burn_in, long thin, double step,
                std::uint64_t seed, int chains, bool binary) {
  PipelineConfig cfg = load_config(config_path);
  if (steps > 0) cfg.sampler.steps = steps;
  if (burn_in >= 0) cfg.sampler.burn_in = burn_in;
  if (thin > 0) cfg.sampler.thin = thin;
  if (step > 0) cfg.sampler.step = step;
  if (chains > 0) cfg.sampler.chains = chains;
  if (seed) cfg.sampler.seed = seed;

  BuiltTarget bt = build_target(cfg.target);
  DerivedSetup s = derive_setup(bt, cfg);
  FlattenSpec spec(s.m_threshold, cfg.flatten.quad_tol);
  FlattenedTarget flat(bt.ref(), spec);
  ChainConfig cc;
  cc.step = cfg.sampler.step > 0 ? cfg.sampler.step : 1.0 / (2.0 * s.l_hat);
  cc.max_stable_step = s.l_hat > 0 ? 1.0 / s.l_hat : 0.0;
  cc.steps = cfg.sampler.steps;
  cc.burn_in = cfg.sampler.burn_in;
  cc.thin = cfg.sampler.thin;

  std::vector<Vec> states;
  for (int chain = 0; chain < std::max(cfg.sampler.chains, 1); ++chain) {
    cc.seed = CounterRng(cfg.sampler.seed, chain).next_u64();
    if (cfg.sampler.algorithm == "ula") {
      auto part = run_ula(flat, cc);
      states.insert(states.end(), part.begin(), part.end());
    } else {
      auto res = run_mala(flat, cc);
      states.insert(states.end(), res.states.begin(), res.states.end());
      std::fprintf(stderr, "chain %d acceptance %.3f\n", chain,
                   res.acceptance_rate);
    }
  }
  const int d = bt.ref().dim();
  if (binary) {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw input_error("cannot open '" + out_path + "'");
    std::uint64_t header[2] = {static_cast<std::uint64_t>(states.size()),
                               static_cast<std::uint64_t>(d)};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    for (const auto& x : states)
      os.write(reinterpret_cast<const char*>(x.data()),
               static_cast<std::streamsize>(sizeof(double) * x.size()));
  } else {
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    CsvWriter w(os);
    for (int i = 0; i < d; ++i) w.field("x_" + std::to_string(i + 1));
    w.endrow();
    for (const auto& x : states) {
      for (double v : x) w.field(v);
      w.endrow();
    }
  }
}

std::vector<Vec> read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open trace '" + path + "'");
  // binary traces start with the 16-byte header; CSV with a header row
  char magic[4] = {};
  in.read(magic, 4);
  in.seekg(0);
  std::vector<Vec> states;
  if (magic[0] == 'x' || magic[0] == '"') {
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Vec row;
      std::size_t pos = 0;
      while (pos < line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        row.push_back(std::stod(line.substr(pos, comma - pos)));
        pos = comma + 1;
      }
      states.push_back(std::move(row));
    }
  } else {
    std::uint64_t header[2];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    states.assign(header[0], Vec(header[1]));
    for (auto& x : states)
      in.read(reinterpret_cast<char*>(x.data()),
              static_cast<std::streamsize>(sizeof(double) * x.size()));
  }
  return states;
}

void cmd_estimate(const std::string& config_path, const std::string& trace_path,
                  const std::string& out_path) {
  PipelineConfig cfg = load_config(config_path);
  BuiltTarget bt = build_target(cfg.target);
  DerivedSetup s = derive_setup(bt, cfg);
  FlattenSpec spec(s.m_threshold, cfg.flatten.quad_tol);
  auto states = read_trace(trace_path);
  if (states.empty()) throw input_error("estimate: empty trace");
  std::ofstream file;
  std::ostream& os = open_out(file, out_path);
  CsvWriter w(os);
  w.field(std::string("phi")).field(std::string("estimate"))
      .field(std::string("ess")).field(std::string("rho_hat"))
      .field(std::string("n"));
  w.endrow();
  double rho_hat = empirical_rho(states, bt.ref(), spec);
  std::vector<TestFnConfig> fns = cfg.functions;
  if (fns.empty()) {
    TestFnConfig c;
    c.type = "coordinate_mean";
    fns.push_back(c);
  }
  for (const auto& f : fns) {
    SnisResult res = snis(states, bt.ref(), spec, f.build(bt.ref().dim()));
    w.field(f.name()).field(res.estimate).field(res.ess).field(rho_hat)
        .field(static_cast<unsigned long long>(res.n));
    w.endrow();
  }
}

void cmd_adversarial(const std::string& family, int d, double kappa,
                     const std::string& check, std::size_t n_mc,
                     std::uint64_t seed, int trials, long steps,
                     const std::string& out_path) {
  std::ofstream file;
  std::ostream& os = open_out(file, out_path);
  CsvWriter w(os);
  CounterRng rng(seed, 0x616476ull);
  Vec dir(d);
  for (auto& v : dir) v = rng.normal();

  if (check == "threshold") {
    Construction which =
        family == "f4" ? Construction::Comp2 : Construction::Comp;
    double n = intractability_threshold(d, 1.0, which);
    double angle = which == Construction::Comp
                       ? 3.0 * M_PI / 8.0
                       : 2.0 * std::acos(AngularTwoScale::cap_edge());
    w.field(std::string("family")).field(std::string("d"))
        .field(std::string("threshold_N")).field(std::string("packing_bound"));
    w.endrow();
    w.field(family).field(d).field(n).field(packing_lower_bound(d, angle));
    w.endrow();
    return;
  }
  if (family == "f3") {
    double m0 = 1.0;
    double l0 = kappa > 0 ? kappa * m0 : 1.25 * 6.0 * std::exp(24.0 / d) * m0;
    SewnBimodal f3(m0, l0, dir, d);
    if (check == "mass") {
      auto r = f3_mass_ratio(f3, n_mc, seed);
      w.field(std::string("family")).field(std::string("check"))
          .field(std::string("d")).field(std::string("ratio"))
          .field(std::string("se"));
      w.endrow();
      w.field(std::string("f3")).field(std::string("mass")).field(d)
          .field(r.ratio).field(r.se);
      w.endrow();
    } else if (check == "smoothness") {
      Vec center = f3.sew_center();
      double rd = f3.r_d(), r0 = f3.r_0();
      RegionSampler region = [&, center, rd, r0, d](CounterRng& g) {
        Vec x(d);
        // 80% of probes in the sewing annulus, rest near the two modes
        if (g.uniform() < 0.8) {
          for (auto& v : x) v = g.normal();
          double nrm = std::sqrt(simd::dot(x.data(), x.data(), d));
          double rad = rd - r0 + 2.0 * r0 * g.uniform();
          for (int i = 0; i < d; ++i) x[i] = center[i] + rad * x[i] / nrm;
        } else {
          double sd = 1.0 / std::sqrt(f3.m0());
          for (auto& v : x) v = sd * g.normal();
        }
        return x;
      };
      double h = probe_smoothness(f3, region, static_cast<int>(n_mc),
                                  SmoothnessMode::HessianNorm, seed);
      w.field(std::string("family")).field(std::string("check"))
          .field(std::string("d")).field(std::string("hessian_norm"))
          .field(std::string("bound_396_L0"));
      w.endrow();
      w.field(std::string("f3")).field(std::string("smoothness")).field(d)
          .field(h).field(396.0 * l0);
      w.endrow();
    } else if (check == "modehit") {
      ModeHitConfig mc;
      mc.d = d;
      mc.m0 = m0;
      mc.l0 = l0;
      mc.trials = trials;
      mc.steps = steps;
      mc.seed = seed;
      auto r = mode_hit_experiment(mc);
      w.field(std::string("family")).field(std::string("check"))
          .field(std::string("d")).field(std::string("outer_rate"))
          .field(std::string("outer_se")).field(std::string("inner_rate"))
          .field(std::string("inner_se"));
      w.endrow();
      w.field(std::string("f3")).field(std::string("modehit")).field(d)
          .field(r.outer_rate).field(r.outer_se).field(r.inner_rate)
          .field(r.inner_se);
      w.endrow();
    } else {
      throw input_error("adversarial: unknown check '" + check + "'");
    }
  } else if (family == "f4") {
    double m1 = 1.0;
    double l1 = kappa > 0 ? kappa * m1 : 16.0 * m1;
    AngularTwoScale f4(m1, l1, dir, d);
    if (check == "mass") {
      auto r = f4_cap_mass(f4, n_mc, seed);
      w.field(std::string("family")).field(std::string("check"))
          .field(std::string("d")).field(std::string("ratio"))
          .field(std::string("se"));
      w.endrow();
      w.field(std::string("f4")).field(std::string("mass")).field(d)
          .field(r.ratio).field(r.se);
      w.endrow();
    } else if (check == "smoothness") {
      const Vec z = f4.z();
      RegionSampler region = [z, d](CounterRng& g) {
        Vec x(d);
        for (auto& v : x) v = g.normal();
        if (g.uniform() < 0.8) {
          // pull the angle into the transition cone
          double zx = simd::dot(z.data(), x.data(), d);
          double t_lo = AngularTwoScale::cap_edge();
          double t_hi = AngularTwoScale::flat_edge();
          double t = t_lo + (t_hi - t_lo) * g.uniform();
          Vec perp(d);
          double pn = 0.0;
          for (int i = 0; i < d; ++i) {
            perp[i] = x[i] - zx * z[i];
            pn += perp[i] * perp[i];
          }
          pn = std::sqrt(pn);
          double radius = 0.5 + 2.0 * g.uniform();
          for (int i = 0; i < d; ++i)
            x[i] = radius * (t * z[i] +
                             std::sqrt(std::max(1.0 - t * t, 0.0)) * perp[i] / pn);
        }
        return x;
      };
      double lip = probe_smoothness(f4, region, static_cast<int>(n_mc),
                                    SmoothnessMode::GradLipschitz, seed);
      w.field(std::string("family")).field(std::string("check"))
          .field(std::string("d")).field(std::string("grad_lipschitz"))
          .field(std::string("bound_686_L1"));
      w.endrow();
      w.field(std::string("f4")).field(std::string("smoothness")).field(d)
          .field(lip).field(686.0 * l1);
      w.endrow();
    } else {
      throw input_error("adversarial: unknown check '" + check + "'");
    }
  } else {
    throw input_error("adversarial: unknown family '" + family + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tail-matching importance sampling for nonlogconcave targets"};
  app.require_subcommand(1);

  std::string config_path, out_path, trace_path;
  bool csv_only = false, binary = false;

  auto* profile = app.add_subcommand("profile", "derived constants and condition margins");
  profile->add_option("--config", config_path)->required();
  profile->add_flag("--csv", csv_only, "CSV row only");

  auto* bounds = app.add_subcommand("bounds", "rho bound and sample-size plan");
  bounds->add_option("--config", config_path)->required();
  bounds->add_option("--out", out_path);

  long steps = 0, burn_in = -1, thin = 0;
  double step = 0.0;
  std::uint64_t seed = 0;
  int chains = 0;
  auto* sample = app.add_subcommand("sample", "run chains on the flattened proposal");
  sample->add_option("--config", config_path)->required();
  sample->add_option("--out", out_path)->required();
  sample->add_option("--steps", steps);
  sample->add_option("--burn-in", burn_in);
  sample->add_option("--thin", thin);
  sample->add_option("--step", step);
  sample->add_option("--seed", seed);
  sample->add_option("--chains", chains);
  sample->add_flag("--binary", binary, "raw doubles with a count/dim header");

  auto* estimate = app.add_subcommand("estimate", "importance estimates from a trace");
  estimate->add_option("--config", config_path)->required();
  estimate->add_option("--trace", trace_path)->required();
  estimate->add_option("--out", out_path);

  std::string family = "f3", check = "mass";
  int adv_d = 8, trials = 50;
  double kappa = 0.0;
  std::size_t n_mc = 100000;
  long adv_steps = 10000;
  auto* adversarial = app.add_subcommand("adversarial", "counterexample checks");
  adversarial->add_option("--family", family)->check(CLI::IsMember({"f3", "f4"}));
  adversarial->add_option("--d", adv_d);
  adversarial->add_option("--kappa", kappa);
  adversarial->add_option("--check", check)
      ->check(CLI::IsMember({"mass", "smoothness", "threshold", "modehit"}));
  adversarial->add_option("--n-mc", n_mc);
  adversarial->add_option("--seed", seed);
  adversarial->add_option("--trials", trials);
  adversarial->add_option("--steps", adv_steps);
  adversarial->add_option("--out", out_path);

  auto* pipeline = app.add_subcommand("pipeline", "end-to-end tail-matching run");
  pipeline->add_option("--config", config_path)->required();
  pipeline->add_option("--out", out_path);

  auto* compare = app.add_subcommand("compare", "direct MALA vs tail-matching");
  compare->add_option("--config", config_path)->required();
  compare->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (profile->parsed()) cmd_profile(config_path, csv_only);
    if (bounds->parsed()) cmd_bounds(config_path, out_path);
    if (sample->parsed())
      cmd_sample(config_path, out_path, steps, burn_in, thin, step, seed,
                 chains, binary);
    if (estimate->parsed()) cmd_estimate(config_path, trace_path, out_path);
    if (adversarial->parsed())
      cmd_adversarial(family, adv_d, kappa, check, n_mc, seed ? seed : 1,
                      trials, adv_steps, out_path);
    if (pipeline->parsed()) {
      PipelineReport rep = run_pipeline(load_config(config_path));
      std::ofstream file;
      write_pipeline_csv(rep, open_out(file, out_path));
    }
    if (compare->parsed()) {
      CompareReport rep = compare_direct_vs_tailmatch(load_config(config_path));
      std::ofstream file;
      std::ostream& os = open_out(file, out_path);
      write_compare_csv(rep, os);
      std::fprintf(stderr, "tail-matching win fraction: %.3f (truth %.6g)\n",
                   rep.tail_win_fraction, rep.truth);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "flatmc: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
