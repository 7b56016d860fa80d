#pragma once
#include <functional>
#include <string>
#include <vector>

#include "flatmc/density.hpp"
#include "flatmc/flatten.hpp"

namespace flatmc {

using TestFn = std::function<double(const Vec&)>;

// log importance weight T(U(x)) - U(x); always >= 0
double log_weight(const TargetDensity& target, const FlattenSpec& spec,
                  const Vec& x);

struct SnisResult {
  double estimate = 0.0;
  double ess = 0.0;
  std::size_t n = 0;
  double max_log_weight = 0.0;
  double weight_cv = 0.0;  // sd(w)/mean(w) = sqrt(n/ess - 1)
};

// Self-normalized importance sampling over proposal draws; all weight
// arithmetic in log domain with a single max subtraction.
SnisResult snis(const std::vector<Vec>& samples, const TargetDensity& target,
                const FlattenSpec& spec, const TestFn& phi);

// Monte Carlo plug-in of rho = pi(w^2) / pi(w)^2 from proposal samples.
double empirical_rho(const std::vector<Vec>& samples,
                     const TargetDensity& target, const FlattenSpec& spec);
double empirical_rho(const std::vector<double>& log_weights);

// Tensor-grid trapezoid evaluation of
//   rho = (int e^{T(U)-2U}) (int e^{-T(U)}) / (int e^{-U})^2
// for d <= 2. The box must hold essentially all mass: boundary integrand
// below 1e-12 of the maximum, else box error.
double quadrature_rho(const TargetDensity& target, const FlattenSpec& spec,
                      const Vec& lo, const Vec& hi,
                      const std::vector<int>& grid);

// Normalized target integral mu(phi) on the same grid (oracle use).
double quadrature_mean(const TargetDensity& target, const TestFn& phi,
                       const Vec& lo, const Vec& hi,
                       const std::vector<int>& grid);

// (sum w)^2 / sum w^2, log-stabilized
double ess(const std::vector<double>& log_weights);

// Bootstrap standard error of the SNIS estimate (resamples pairs (phi_i, w_i)).
double snis_bootstrap_se(const std::vector<double>& phi_vals,
                         const std::vector<double>& log_weights, int resamples,
                         std::uint64_t seed);

// Bootstrap over whole chains: offsets mark the start of each chain in the
// pooled arrays (chains are independent, states within one are not).
double snis_bootstrap_se_chains(const std::vector<double>& phi_vals,
                                const std::vector<double>& log_weights,
                                const std::vector<std::size_t>& chain_offsets,
                                int resamples, std::uint64_t seed);

// built-in test functions
TestFn phi_coordinate(int index);
// smooth bump: exp(1 - 1/(1 - |x-c|^2/w^2)) inside |x-c| < w, 0 outside
TestFn phi_bump(Vec center, double width);
TestFn phi_affine(Vec coeffs, double offset);

}  // namespace flatmc
