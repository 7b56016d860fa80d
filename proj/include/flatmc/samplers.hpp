#pragma once
#include <cstdint>
#include <vector>

#include "flatmc/density.hpp"
#include "flatmc/flatten.hpp"

namespace flatmc {

struct ChainConfig {
  double step = 0.0;        // Langevin step size h
  long steps = 0;           // total iterations
  long burn_in = 0;         // discarded prefix
  long thin = 1;            // keep every thin-th post-burn-in state
  std::uint64_t seed = 0;
  Vec init;                 // default: origin
  double max_stable_step = 0.0;  // if > 0: warn when step exceeds it

  void validate() const;
};

// Unadjusted Langevin: x <- x - h grad(x) + sqrt(2h) xi. Deterministic
// given (config, seed). Throws divergence_error on non-finite states.
std::vector<Vec> run_ula(const TargetDensity& target, const ChainConfig& cfg);

struct MalaResult {
  std::vector<Vec> states;
  double acceptance_rate = 0.0;
};

// Metropolis-adjusted Langevin with Gaussian proposal
// y = x - h grad(x) + sqrt(2h) xi and acceptance
// min(1, exp(U(x) - U(y) + q(y,x) - q(x,y))).
MalaResult run_mala(const TargetDensity& target, const ChainConfig& cfg);

// Exact draws from the flattened proposal via rejection against a Gaussian
// mixture envelope. The log-domination constant is measured on a probe
// grid (d <= 3) and doubled. Throws envelope_error if the acceptance rate
// stays below 1e-4.
std::vector<Vec> rejection_sample_flattened(const TargetDensity& target,
                                            const FlattenSpec& spec,
                                            const GaussianMixture& envelope,
                                            std::size_t n, std::uint64_t seed);

}  // namespace flatmc
