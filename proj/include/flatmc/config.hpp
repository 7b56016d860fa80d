#pragma once
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flatmc/adversarial.hpp"
#include "flatmc/bnn.hpp"
#include "flatmc/density.hpp"
#include "flatmc/estimator.hpp"

namespace flatmc {

// Parsed experiment configuration; see README for the JSON schema.
struct TargetConfig {
  std::string type;  // "mixture" | "bnn" | "f3" | "f4" | "quadratic"
  // mixture
  std::vector<double> weights;
  std::vector<Vec> means;
  std::vector<double> iso_precisions;
  std::vector<std::vector<Vec>> full_precisions;
  // bnn
  std::vector<int> layers;  // p, hidden..., classes
  double alpha1 = 1.0, alpha2 = 1.0, beta = 1.0;
  int dataset_n = 0;
  std::uint64_t dataset_seed = 1;
  std::vector<Vec> dataset_x;
  std::vector<int> dataset_y;
  // adversarial
  int d = 2;
  double m0 = 1.0, l0 = 0.0, m1 = 1.0, l1 = 16.0;
  std::uint64_t direction_seed = 1;
  // quadratic
  double curvature = 1.0;
};

struct FlattenConfig {
  std::string m_rule = "a1";  // "set" | "a1" | "bnn" | "override"
  double m_override = 0.0;
  double quad_tol = 1e-10;
};

struct SamplerConfig {
  std::string algorithm = "mala";  // "mala" | "ula"
  long steps = 20000;
  long burn_in = 2000;
  long thin = 10;
  double step = 0.0;  // 0: auto 1/(2 Lhat)
  int chains = 1;
  std::uint64_t seed = 1;
  std::string init = "origin";  // "origin" | "means" (cycle mixture means)
};

struct TestFnConfig {
  std::string type;  // "coordinate_mean" | "bump" | "affine"
  int index = 0;
  Vec center;
  double width = 1.0;
  Vec coeffs;
  double offset = 0.0;

  std::string name() const;
  TestFn build(int dim) const;
};

struct PipelineConfig {
  TargetConfig target;
  FlattenConfig flatten;
  SamplerConfig sampler;
  std::vector<TestFnConfig> functions;
  int replications = 1;
  std::uint64_t master_seed = 1;
  std::string out_path;
  long long budget = 0;  // (U, grad U) evaluation budget for comparisons
  double chat = 1.0;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config_text(const std::string& json_text);

// Instantiated target with the pieces the pipeline needs.
struct BuiltTarget {
  std::unique_ptr<TargetDensity> density;
  std::unique_ptr<GaussianMixture> mixture;  // set when type == "mixture"
  std::unique_ptr<BnnPosterior> bnn;         // set when type == "bnn"
  double u_min_lower = 0.0;  // valid lower bound on min U
  TargetDensity& ref() { return mixture ? *mixture
                                        : (bnn ? static_cast<TargetDensity&>(*bnn)
                                               : *density); }
};

BuiltTarget build_target(const TargetConfig& cfg);

}  // namespace flatmc
