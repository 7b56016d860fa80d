#pragma once
#include <ostream>
#include <string>
#include <vector>

#include "flatmc/bounds.hpp"
#include "flatmc/config.hpp"
#include "flatmc/estimator.hpp"
#include "flatmc/profiles.hpp"

namespace flatmc {

// Profile + threshold + condition + rho bound derived from a config; shared
// between `pipeline` and the standalone `bounds`/`profile` subcommands so
// their reported numbers agree.
struct DerivedSetup {
  A1Profile profile;
  double u0 = 0.0;          // U(0), one evaluation at the origin
  double m_threshold = 0.0;
  bool condition_met = false;
  double condition_lhs = 0.0;
  double condition_rhs = 0.0;
  RhoBound rho;
  double l_hat = 0.0;       // flattened smoothness constant
  double u_min_lower = 0.0;
  std::string condition_kind;  // "cocoa" | "qcn"
};

DerivedSetup derive_setup(BuiltTarget& target, const PipelineConfig& cfg);

struct PipelineRow {
  std::uint64_t seed;
  int d;
  double m_threshold;
  double rho_bound;
  bool condition_met;
  std::string phi;
  double ess;
  double estimate;
  double se;
};

struct PipelineReport {
  DerivedSetup setup;
  std::vector<PipelineRow> rows;
  double acceptance_rate = 0.0;  // last replication (MALA only)
  double rho_hat = 0.0;          // empirical rho, last replication
};

// Full run: derive constants, choose M, check the condition, sample the
// flattened proposal, self-normalized importance estimates per test
// function and replication. Proceeds when the condition fails, flagging
// condition_met = false.
PipelineReport run_pipeline(const PipelineConfig& cfg);
void write_pipeline_csv(const PipelineReport& report, std::ostream& os);

struct CompareRow {
  int replication;
  std::uint64_t seed;
  double truth;
  double direct_estimate;
  double direct_abs_error;
  double direct_mode0_frac;
  double direct_mode1_frac;
  double tail_estimate;
  double tail_abs_error;
  double tail_mode0_frac;
  double tail_mode1_frac;
  double tail_ess;
  bool tail_wins;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double tail_win_fraction = 0.0;
  double truth = 0.0;
  long long budget = 0;
};

// Direct MALA on U versus the tail-matching pipeline at the same
// (U, grad U) evaluation budget; mixture targets only (the truth comes
// from the i.i.d. mixture oracle).
CompareReport compare_direct_vs_tailmatch(const PipelineConfig& cfg);
void write_compare_csv(const CompareReport& report, std::ostream& os);

}  // namespace flatmc
