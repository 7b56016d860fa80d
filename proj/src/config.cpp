#include "flatmc/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "flatmc/errors.hpp"

namespace flatmc {

using nlohmann::json;

namespace {

Vec to_vec(const json& j) {
  Vec v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

TargetConfig parse_target(const json& j) {
  TargetConfig t;
  t.type = j.value("type", "mixture");
  if (t.type == "mixture") {
    for (const auto& w : j.at("weights")) t.weights.push_back(w.get<double>());
    for (const auto& m : j.at("means")) t.means.push_back(to_vec(m));
    const auto& prec = j.at("precisions");
    if (!prec.empty() && prec[0].is_array()) {
      for (const auto& mat : prec) {
        std::vector<Vec> rows;
        for (const auto& row : mat) rows.push_back(to_vec(row));
        t.full_precisions.push_back(rows);
      }
    } else {
      for (const auto& s : prec) t.iso_precisions.push_back(s.get<double>());
    }
  } else if (t.type == "bnn") {
    for (const auto& l : j.at("layers")) t.layers.push_back(l.get<int>());
    t.alpha1 = j.value("alpha1", 1.0);
    t.alpha2 = j.value("alpha2", 1.0);
    t.beta = j.value("beta", 1.0);
    const auto& ds = j.at("dataset");
    if (ds.contains("x")) {
      for (const auto& r : ds.at("x")) t.dataset_x.push_back(to_vec(r));
      for (const auto& y : ds.at("y")) t.dataset_y.push_back(y.get<int>());
      t.dataset_n = static_cast<int>(t.dataset_y.size());
    } else {
      t.dataset_n = ds.at("n").get<int>();
      t.dataset_seed = ds.value("seed", 1);
    }
  } else if (t.type == "f3") {
    t.d = j.at("d").get<int>();
    t.m0 = j.value("m0", 1.0);
    t.l0 = j.value("L0", 0.0);
    t.direction_seed = j.value("direction_seed", 1);
  } else if (t.type == "f4") {
    t.d = j.at("d").get<int>();
    t.m1 = j.value("m1", 1.0);
    t.l1 = j.value("L1", 16.0 * t.m1);
    t.direction_seed = j.value("direction_seed", 1);
  } else if (t.type == "quadratic") {
    t.d = j.at("d").get<int>();
    t.curvature = j.value("curvature", 1.0);
  } else {
    throw input_error("config: unknown target type '" + t.type + "'");
  }
  return t;
}

std::string fmt_name(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string TestFnConfig::name() const {
  if (type == "coordinate_mean") return "coord" + std::to_string(index);
  if (type == "bump") return "bump_w" + fmt_name(width);
  return "affine";
}

TestFn TestFnConfig::build(int dim) const {
  if (type == "coordinate_mean") {
    if (index < 0 || index >= dim)
      throw input_error("test function: coordinate index out of range");
    return phi_coordinate(index);
  }
  if (type == "bump") {
    Vec c = center.empty() ? Vec(dim, 0.0) : center;
    if (static_cast<int>(c.size()) != dim)
      throw input_error("test function: bump center dimension mismatch");
    if (!(width > 0.0)) throw input_error("test function: bump width <= 0");
    return phi_bump(c, width);
  }
  if (type == "affine") {
    if (static_cast<int>(coeffs.size()) != dim)
      throw input_error("test function: affine coefficients dimension mismatch");
    return phi_affine(coeffs, offset);
  }
  throw input_error("test function: unknown type '" + type + "'");
}

PipelineConfig parse_config_text(const std::string& text) {
  json j = json::parse(text);
  PipelineConfig cfg;
  cfg.target = parse_target(j.at("target"));
  if (j.contains("flatten")) {
    const auto& f = j.at("flatten");
    cfg.flatten.m_rule = f.value("M_rule", "a1");
    cfg.flatten.m_override = f.value("M_override", 0.0);
    cfg.flatten.quad_tol = f.value("quad_tol", 1e-10);
  }
  if (j.contains("sampler")) {
    const auto& s = j.at("sampler");
    cfg.sampler.algorithm = s.value("algorithm", "mala");
    cfg.sampler.steps = s.value("steps", 20000L);
    cfg.sampler.burn_in = s.value("burn_in", 2000L);
    cfg.sampler.thin = s.value("thin", 10L);
    cfg.sampler.step = s.value("step", 0.0);
    cfg.sampler.chains = s.value("chains", 1);
    cfg.sampler.seed = s.value("seed", 1);
    cfg.sampler.init = s.value("init", std::string("origin"));
  }
  if (j.contains("estimator")) {
    for (const auto& f : j.at("estimator").at("functions")) {
      TestFnConfig t;
      t.type = f.at("type").get<std::string>();
      t.index = f.value("index", 0);
      if (f.contains("center")) t.center = to_vec(f.at("center"));
      t.width = f.value("width", 1.0);
      if (f.contains("coeffs")) t.coeffs = to_vec(f.at("coeffs"));
      t.offset = f.value("offset", 0.0);
      cfg.functions.push_back(std::move(t));
    }
  }
  cfg.replications = j.value("replications", 1);
  cfg.master_seed = j.value("master_seed", 1);
  cfg.out_path = j.value("out", "");
  cfg.budget = j.value("budget", 0LL);
  cfg.chat = j.value("chat", 1.0);
  if (cfg.replications < 1)
    throw input_error("config: replications must be >= 1");
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

BuiltTarget build_target(const TargetConfig& cfg) {
  BuiltTarget out;
  if (cfg.type == "mixture") {
    if (!cfg.full_precisions.empty()) {
      std::vector<Eigen::MatrixXd> mats;
      for (const auto& rows : cfg.full_precisions) {
        Eigen::MatrixXd m(rows.size(), rows[0].size());
        for (std::size_t r = 0; r < rows.size(); ++r)
          for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
        mats.push_back(m);
      }
      out.mixture = std::make_unique<GaussianMixture>(
          GaussianMixture::full(cfg.weights, cfg.means, mats));
    } else {
      out.mixture = std::make_unique<GaussianMixture>(cfg.weights, cfg.means,
                                                      cfg.iso_precisions);
    }
    out.u_min_lower = -1.0;  // the conservative end of 0 <= min U
  } else if (cfg.type == "bnn") {
    if (cfg.layers.size() < 2)
      throw input_error("config: bnn layers must include features and classes");
    std::vector<Vec> x = cfg.dataset_x;
    std::vector<int> y = cfg.dataset_y;
    if (x.empty())
      synth_dataset(cfg.dataset_n, cfg.layers.front(), cfg.layers.back(),
                    cfg.dataset_seed, x, y);
    std::vector<int> widths(cfg.layers.begin() + 1, cfg.layers.end() - 1);
    out.bnn = std::make_unique<BnnPosterior>(make_feedforward_bnn(
        cfg.layers.front(), widths, cfg.layers.back(), std::move(x),
        std::move(y), cfg.alpha1, cfg.alpha2, cfg.beta));
    out.u_min_lower = 0.0;
  } else if (cfg.type == "f3") {
    CounterRng rng(cfg.direction_seed, 0x646972ull);
    Vec dir(cfg.d);
    for (auto& v : dir) v = rng.normal();
    double l0 = cfg.l0 > 0.0
                    ? cfg.l0
                    : 1.25 * 6.0 * std::exp(24.0 / cfg.d) * cfg.m0;
    auto f3 = std::make_unique<SewnBimodal>(cfg.m0, l0, dir, cfg.d);
    out.u_min_lower =
        0.5 * cfg.d * std::log(2.0 * M_PI / std::max(cfg.m0, l0));
    out.density = std::move(f3);
  } else if (cfg.type == "f4") {
    CounterRng rng(cfg.direction_seed, 0x646972ull);
    Vec dir(cfg.d);
    for (auto& v : dir) v = rng.normal();
    out.density =
        std::make_unique<AngularTwoScale>(cfg.m1, cfg.l1, dir, cfg.d);
    out.u_min_lower = 0.0;
  } else if (cfg.type == "quadratic") {
    out.density = std::make_unique<QuadraticDensity>(cfg.d, cfg.curvature);
    out.u_min_lower = 0.0;
  } else {
    throw input_error("config: unknown target type '" + cfg.type + "'");
  }
  return out;
}

}  // namespace flatmc
