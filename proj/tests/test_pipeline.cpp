#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flatmc/errors.hpp"
#include "flatmc/pipeline.hpp"

using namespace flatmc;

namespace {

const char* kMixtureConfig = R"json({
  "target": {
    "type": "mixture",
    "weights": [0.5, 0.5],
    "means": [[-1.0, 0.0], [1.0, 0.0]],
    "precisions": [1.0, 3.0]
  },
  "flatten": {"M_rule": "a1"},
  "sampler": {"algorithm": "mala", "steps": 6000, "burn_in": 1000, "thin": 5, "seed": 4},
  "estimator": {"functions": [
    {"type": "coordinate_mean", "index": 0},
    {"type": "bump", "center": [1.0, 0.0], "width": 1.0}
  ]},
  "replications": 2,
  "master_seed": 11
})json";

}  // namespace

TEST_CASE("config parsing") {
  auto cfg = parse_config_text(kMixtureConfig);
  CHECK(cfg.target.type == "mixture");
  CHECK(cfg.target.weights.size() == 2);
  CHECK(cfg.sampler.steps == 6000);
  CHECK(cfg.functions.size() == 2);
  CHECK(cfg.replications == 2);
  CHECK_THROWS_AS(parse_config_text("{\"target\": {\"type\": \"wat\"}}"),
                  input_error);
}

TEST_CASE("full-covariance mixture config parses and derives") {
  const char* cfg_text = R"json({
    "target": {"type": "mixture", "weights": [0.5, 0.5],
               "means": [[0.3, 0.0], [-0.3, 0.1]],
               "precisions": [[[2.0, 0.4], [0.4, 1.0]],
                               [[1.5, -0.2], [-0.2, 2.5]]]},
    "flatten": {"M_rule": "a1"},
    "replications": 1
  })json";
  auto cfg = parse_config_text(cfg_text);
  BuiltTarget bt = build_target(cfg.target);
  REQUIRE(bt.mixture);
  CHECK_FALSE(bt.mixture->isotropic());
  auto setup = derive_setup(bt, cfg);
  CHECK(setup.profile.lip >= setup.profile.conv);
  CHECK_FALSE(std::isnan(setup.rho.value));
  CHECK(setup.rho.value >= 2.0 * M_E * (1.0 - 1e-12));
}

TEST_CASE("adversarial and quadratic targets derive profiles") {
  for (const char* text : {
           R"json({"target": {"type": "f3", "d": 10, "m0": 1.0}, "replications": 1})json",
           R"json({"target": {"type": "f4", "d": 8, "m1": 1.0, "L1": 16.0}, "replications": 1})json",
           R"json({"target": {"type": "quadratic", "d": 4, "curvature": 2.0}, "replications": 1})json"}) {
    auto cfg = parse_config_text(text);
    BuiltTarget bt = build_target(cfg.target);
    auto setup = derive_setup(bt, cfg);
    // far outside the tractable regime the bound is +inf (vacuous but valid)
    CHECK_FALSE(std::isnan(setup.rho.value));
    CHECK(setup.rho.value >= 2.0 * M_E * (1.0 - 1e-12));
    CHECK(setup.l_hat > 0.0);
  }
}

TEST_CASE("degenerate flattening reduces to plain mcmc averaging") {
  // single gaussian with R = 0 and the "set" rule: M = U(0), weights in the
  // band only; estimates equal the weighted mean which equals the plain mean
  // when all weights coincide
  const char* cfg_text = R"json({
    "target": {"type": "mixture", "weights": [1.0],
               "means": [[0.0]], "precisions": [1.0]},
    "flatten": {"M_rule": "set"},
    "sampler": {"algorithm": "mala", "steps": 30000, "burn_in": 3000, "thin": 3, "step": 0.2, "seed": 9},
    "estimator": {"functions": [{"type": "coordinate_mean", "index": 0}]},
    "replications": 1,
    "master_seed": 3
  })json";
  auto cfg = parse_config_text(cfg_text);
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.rows.size() == 1);
  // R = 0 profile: M = U(0) = 0; weights: all draws with U <= M have weight
  // e^{M+1-U}; the estimate must still land near the true mean 0
  CHECK(std::abs(rep.rows[0].estimate) < 0.1);
  CHECK(rep.rows[0].ess > 100.0);
}

TEST_CASE("pipeline is deterministic per master seed") {
  auto cfg = parse_config_text(kMixtureConfig);
  auto a = run_pipeline(cfg);
  auto b = run_pipeline(cfg);
  std::ostringstream sa, sb;
  write_pipeline_csv(a, sa);
  write_pipeline_csv(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(a.rows.size() == 4);  // 2 replications x 2 functions
}

TEST_CASE("pipeline rho bound matches the standalone derivation") {
  auto cfg = parse_config_text(kMixtureConfig);
  auto rep = run_pipeline(cfg);
  BuiltTarget bt = build_target(cfg.target);
  auto setup = derive_setup(bt, cfg);
  CHECK(rep.setup.rho.value == setup.rho.value);
  CHECK(rep.rows[0].rho_bound == setup.rho.value);
  CHECK(rep.setup.condition_met == setup.condition_met);
}

TEST_CASE("pipeline proceeds when the condition fails") {
  // d = 2 mixture cannot satisfy the mixture condition; must still run
  auto cfg = parse_config_text(kMixtureConfig);
  auto rep = run_pipeline(cfg);
  CHECK_FALSE(rep.setup.condition_met);
  CHECK(rep.rows.size() == 4);
  for (const auto& r : rep.rows) {
    CHECK_FALSE(r.condition_met);
    CHECK(std::isfinite(r.estimate));
    CHECK(r.ess > 0.0);
  }
}

TEST_CASE("pipeline csv output schema is stable") {
  auto cfg = parse_config_text(kMixtureConfig);
  auto rep = run_pipeline(cfg);
  std::ostringstream os;
  write_pipeline_csv(rep, os);
  std::string header = os.str().substr(0, os.str().find('\n'));
  CHECK(header == "seed,d,M,rho_bound,condition_met,phi,ess,estimate,se");
}

TEST_CASE("compare: unimodal target gives both methods the same answer") {
  const char* cfg_text = R"json({
    "target": {"type": "mixture", "weights": [1.0],
               "means": [[0.0]], "precisions": [1.0]},
    "flatten": {"M_rule": "a1"},
    "sampler": {"algorithm": "mala", "step": 0.2},
    "estimator": {"functions": [{"type": "bump", "center": [0.0], "width": 2.0}]},
    "replications": 3,
    "budget": 60000,
    "master_seed": 5
  })json";
  auto cfg = parse_config_text(cfg_text);
  auto rep = compare_direct_vs_tailmatch(cfg);
  REQUIRE(rep.rows.size() == 3);
  for (const auto& r : rep.rows) {
    // both estimates within a few combined standard errors of each other;
    // with budget 2e4 the errors are well under 0.05
    CHECK(std::abs(r.direct_estimate - r.tail_estimate) < 0.05);
  }
  // schema stability
  std::ostringstream os;
  write_compare_csv(rep, os);
  std::string header = os.str().substr(0, os.str().find('\n'));
  CHECK(header ==
        "replication,seed,truth,direct_estimate,direct_abs_error,"
        "direct_mode0_frac,direct_mode1_frac,tail_estimate,tail_abs_error,"
        "tail_mode0_frac,tail_mode1_frac,tail_ess,tail_wins");
}

TEST_CASE("bnn pipeline smoke") {
  const char* cfg_text = R"json({
    "target": {"type": "bnn", "layers": [2, 4, 2],
               "alpha1": 1.0, "alpha2": 1.0, "beta": 0.3333333333333333,
               "dataset": {"n": 3, "seed": 7}},
    "flatten": {"M_rule": "bnn"},
    "sampler": {"algorithm": "mala", "steps": 3000, "burn_in": 500, "thin": 5, "seed": 2},
    "estimator": {"functions": [{"type": "coordinate_mean", "index": 0}]},
    "replications": 1,
    "master_seed": 8
  })json";
  auto cfg = parse_config_text(cfg_text);
  auto rep = run_pipeline(cfg);
  REQUIRE(rep.rows.size() == 1);
  CHECK(std::isfinite(rep.rows[0].estimate));
  CHECK(rep.setup.condition_kind == "cocoa");
}
