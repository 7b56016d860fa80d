#include "flatmc/density.hpp"

#include <cmath>

#include "flatmc/errors.hpp"
#include "flatmc/simd.hpp"

namespace flatmc {

const double* TargetDensity::check(const Vec& x) const {
  if (static_cast<int>(x.size()) != dim())
    throw input_error("point dimension " + std::to_string(x.size()) +
                      " does not match density dimension " +
                      std::to_string(dim()));
  return x.data();
}

double QuadraticDensity::eval(const double* x, double* grad) const {
  double r2 = simd::dot(x, x, static_cast<std::size_t>(d_));
  if (grad)
    for (int i = 0; i < d_; ++i) grad[i] = m_ * x[i];
  return 0.5 * m_ * r2 + offset_;
}

GaussianMixture::GaussianMixture(std::vector<double> weights,
                                 std::vector<Vec> means,
                                 std::vector<double> precisions)
    : isotropic_(true),
      weights_(std::move(weights)),
      means_(std::move(means)),
      s_(std::move(precisions)) {
  k_ = static_cast<int>(weights_.size());
  if (k_ == 0 || means_.size() != weights_.size() ||
      s_.size() != weights_.size())
    throw input_error("mixture: weights/means/precisions size mismatch");
  d_ = static_cast<int>(means_[0].size());
  m_.resize(k_);
  l_.resize(k_);
  log_det_half_.resize(k_);
  for (int i = 0; i < k_; ++i) {
    if (s_[i] <= 0.0) throw input_error("mixture: precision must be positive");
    m_[i] = l_[i] = s_[i];
    log_det_half_[i] = 0.5 * d_ * std::log(s_[i]);
  }
  finish_setup();
}

GaussianMixture GaussianMixture::full(std::vector<double> weights,
                                      std::vector<Vec> means,
                                      std::vector<Eigen::MatrixXd> precisions) {
  return GaussianMixture(FullTag{}, std::move(weights), std::move(means),
                         std::move(precisions));
}

GaussianMixture::GaussianMixture(FullTag, std::vector<double> weights,
                                 std::vector<Vec> means,
                                 std::vector<Eigen::MatrixXd> precisions)
    : isotropic_(false),
      weights_(std::move(weights)),
      means_(std::move(means)),
      smat_(std::move(precisions)) {
  k_ = static_cast<int>(weights_.size());
  if (k_ == 0 || means_.size() != weights_.size() ||
      smat_.size() != weights_.size())
    throw input_error("mixture: weights/means/precisions size mismatch");
  d_ = static_cast<int>(means_[0].size());
  m_.resize(k_);
  l_.resize(k_);
  log_det_half_.resize(k_);
  chol_.reserve(k_);
  for (int i = 0; i < k_; ++i) {
    const auto& S = smat_[i];
    if (S.rows() != d_ || S.cols() != d_)
      throw input_error("mixture: precision matrix size mismatch");
    if (!S.isApprox(S.transpose(), 1e-12))
      throw input_error("mixture: precision matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    m_[i] = es.eigenvalues().minCoeff();
    l_[i] = es.eigenvalues().maxCoeff();
    if (m_[i] <= 0.0)
      throw input_error("mixture: precision matrix not positive definite");
    chol_.emplace_back(S);
    log_det_half_[i] = es.eigenvalues().array().log().sum() * 0.5;
  }
  finish_setup();
}

void GaussianMixture::finish_setup() {
  double wsum = 0.0;
  for (double w : weights_) {
    if (w <= 0.0) throw input_error("mixture: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw input_error("mixture: weights must sum to 1");
  log_w_.resize(k_);
  for (int i = 0; i < k_; ++i) {
    if (static_cast<int>(means_[i].size()) != d_)
      throw input_error("mixture: mean dimension mismatch");
    log_w_[i] = std::log(weights_[i]);
    double r = std::sqrt(simd::dot(means_[i].data(), means_[i].data(), d_));
    if (r > radius_) radius_ = r;
  }
  // ln Z = ln sum_i a_i (2 pi)^{d/2} det(S_i)^{-1/2}
  double mx = -1e300;
  std::vector<double> lm(k_);
  for (int i = 0; i < k_; ++i) {
    lm[i] = log_w_[i] + 0.5 * d_ * std::log(2.0 * M_PI) - log_det_half_[i];
    mx = std::max(mx, lm[i]);
  }
  double z = 0.0;
  for (int i = 0; i < k_; ++i) z += std::exp(lm[i] - mx);
  log_mass_total_ = mx + std::log(z);
}

double GaussianMixture::eval(const double* x, double* grad) const {
  // exponents e_i = ln a_i - (x-x_i)^T S_i (x-x_i)/2, stabilized by max
  thread_local std::vector<double> e;
  e.resize(k_);
  if (isotropic_) {
    for (int i = 0; i < k_; ++i) {
      double q = simd::sq_dist(x, means_[i].data(), d_);
      e[i] = log_w_[i] - 0.5 * s_[i] * q;
    }
  } else {
    for (int i = 0; i < k_; ++i) {
      Eigen::Map<const Eigen::VectorXd> xv(x, d_);
      Eigen::Map<const Eigen::VectorXd> mu(means_[i].data(), d_);
      Eigen::VectorXd dv = xv - mu;
      e[i] = log_w_[i] - 0.5 * dv.dot(smat_[i] * dv);
    }
  }
  double emax = simd::reduce_max(e.data(), k_);
  double z = 0.0;
  for (int i = 0; i < k_; ++i) {
    e[i] = std::exp(e[i] - emax);
    z += e[i];
  }
  double uval = -(emax + std::log(z));
  if (grad) {
    for (int i = 0; i < d_; ++i) grad[i] = 0.0;
    for (int i = 0; i < k_; ++i) {
      double w = e[i] / z;
      if (isotropic_) {
        double c = w * s_[i];
        for (int j = 0; j < d_; ++j) grad[j] += c * (x[j] - means_[i][j]);
      } else {
        Eigen::Map<const Eigen::VectorXd> xv(x, d_);
        Eigen::Map<const Eigen::VectorXd> mu(means_[i].data(), d_);
        Eigen::VectorXd g = smat_[i] * (xv - mu);
        for (int j = 0; j < d_; ++j) grad[j] += w * g[j];
      }
    }
  }
  return uval;
}

double GaussianMixture::log_pdf(const double* x) const {
  // normalized density of mu proportional to e^{-U}: the component masses
  // carry the Gaussian normalizers, m_i = a_i (2 pi)^{d/2} det(S_i)^{-1/2}
  return -eval(x, nullptr) - log_mass_total_;
}

std::vector<double> GaussianMixture::component_masses() const {
  std::vector<double> m(k_);
  double mx = -1e300;
  for (int i = 0; i < k_; ++i) {
    m[i] = log_w_[i] - log_det_half_[i];
    mx = std::max(mx, m[i]);
  }
  double z = 0.0;
  for (int i = 0; i < k_; ++i) {
    m[i] = std::exp(m[i] - mx);
    z += m[i];
  }
  for (auto& v : m) v /= z;
  return m;
}

std::vector<Vec> GaussianMixture::sample_iid(std::size_t n,
                                             std::uint64_t seed) const {
  CounterRng rng(seed, 0x6d69787475726549ull);
  std::vector<double> mass = component_masses();
  std::vector<double> cum(k_);
  double acc = 0.0;
  for (int i = 0; i < k_; ++i) {
    acc += mass[i];
    cum[i] = acc;
  }
  std::vector<Vec> out(n, Vec(d_));
  Eigen::VectorXd z(d_);
  for (std::size_t t = 0; t < n; ++t) {
    double u = rng.uniform();
    int c = 0;
    while (c + 1 < k_ && u > cum[c]) ++c;
    if (isotropic_) {
      double sd = 1.0 / std::sqrt(s_[c]);
      for (int j = 0; j < d_; ++j) out[t][j] = means_[c][j] + sd * rng.normal();
    } else {
      for (int j = 0; j < d_; ++j) z[j] = rng.normal();
      // S = L L^T, x = mu + L^{-T} z  ~  N(mu, S^{-1})
      Eigen::VectorXd y =
          chol_[c].matrixU().solve(z);  // U = L^T, solve U y = z
      for (int j = 0; j < d_; ++j) out[t][j] = means_[c][j] + y[j];
    }
  }
  return out;
}

std::vector<Vec> sample_mixture_iid(const GaussianMixture& gm, std::size_t n,
                                    std::uint64_t seed) {
  if (n < 1) throw input_error("sample_mixture_iid: n must be >= 1");
  return gm.sample_iid(n, seed);
}

}  // namespace flatmc
