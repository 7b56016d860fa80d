#pragma once
#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "flatmc/rng.hpp"

namespace flatmc {

using Vec = std::vector<double>;

// Unnormalized negative logdensity U with gradient. Implementations are
// immutable after construction and safe for concurrent evaluation.
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;
  virtual int dim() const = 0;

  // Returns U(x); if grad != nullptr, also writes the dim() entries of
  // grad U(x). x must point at dim() doubles.
  virtual double eval(const double* x, double* grad) const = 0;

  double u(const Vec& x) const { return eval(check(x), nullptr); }
  double eval(const Vec& x, Vec& grad) const {
    grad.resize(dim());
    return eval(check(x), grad.data());
  }

 private:
  const double* check(const Vec& x) const;
};

// Counts (U, grad U) pair evaluations of a wrapped target; used for the
// equal-budget comparisons.
class CountingDensity : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  explicit CountingDensity(const TargetDensity& inner) : inner_(inner) {}
  int dim() const override { return inner_.dim(); }
  double eval(const double* x, double* grad) const override {
    ++count_;
    return inner_.eval(x, grad);
  }
  long long count() const { return count_; }
  void reset() { count_ = 0; }

 private:
  const TargetDensity& inner_;
  mutable long long count_ = 0;
};

// U(x) = (m/2)|x|^2 + offset
class QuadraticDensity : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  QuadraticDensity(int d, double curvature, double offset = 0.0)
      : d_(d), m_(curvature), offset_(offset) {}
  int dim() const override { return d_; }
  double eval(const double* x, double* grad) const override;

 private:
  int d_;
  double m_, offset_;
};

// e^{-U(x)} = sum_i a_i exp(-(x-x_i)^T S_i (x-x_i)/2), isotropic S_i = s_i I
// or full symmetric positive definite S_i. Evaluation is log-sum-exp
// stabilized. Immutable after construction.
class GaussianMixture : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  // isotropic: precisions[i] = s_i
  GaussianMixture(std::vector<double> weights, std::vector<Vec> means,
                  std::vector<double> precisions);
  // full covariance structure via per-component precision matrices
  static GaussianMixture full(std::vector<double> weights,
                              std::vector<Vec> means,
                              std::vector<Eigen::MatrixXd> precisions);

  int dim() const override { return d_; }
  double eval(const double* x, double* grad) const override;

  // log of the normalized mixture density (for envelopes / oracles)
  double log_pdf(const double* x) const;
  double log_pdf(const Vec& x) const { return log_pdf(x.data()); }

  int components() const { return k_; }
  bool isotropic() const { return isotropic_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<double>& iso_precisions() const { return s_; }
  // per-component eigen-extremes of S_i
  double comp_m(int i) const { return m_[i]; }
  double comp_l(int i) const { return l_[i]; }
  // R = max_i |x_i|
  double mean_radius() const { return radius_; }

  // probability mass carried by each component under mu
  std::vector<double> component_masses() const;

  // exact i.i.d. draws from mu; deterministic given seed
  std::vector<Vec> sample_iid(std::size_t n, std::uint64_t seed) const;

 private:
  struct FullTag {};
  GaussianMixture(FullTag, std::vector<double> weights, std::vector<Vec> means,
                  std::vector<Eigen::MatrixXd> precisions);
  void finish_setup();
  int d_ = 0, k_ = 0;
  bool isotropic_ = true;
  std::vector<double> weights_, log_w_;
  std::vector<Vec> means_;
  std::vector<double> s_;                // isotropic precisions
  std::vector<Eigen::MatrixXd> smat_;    // full precisions
  std::vector<Eigen::LLT<Eigen::MatrixXd>> chol_;  // S_i = L L^T
  std::vector<double> m_, l_, log_det_half_;
  double radius_ = 0.0;
  double log_mass_total_ = 0.0;  // ln integral of e^{-U}
};

std::vector<Vec> sample_mixture_iid(const GaussianMixture& gm, std::size_t n,
                                    std::uint64_t seed);

}  // namespace flatmc
