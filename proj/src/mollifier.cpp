#include "flatmc/mollifier.hpp"

#include <cmath>

namespace flatmc {

double mollifier_unnormalized(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

double mollifier_normalizer() {
  static const double z = adaptive_simpson(
      [](double y) { return mollifier_unnormalized(y); }, -1.0, 1.0, 1e-14);
  return z;
}

double mollifier(double t) { return mollifier_unnormalized(t) / mollifier_normalizer(); }

double mollifier_deriv(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  double s = 1.0 - t * t;
  return mollifier(t) * (-2.0 * t / (s * s));
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double h = b - a;
  double left = h / 12.0 * (fa + 4.0 * flm + fm);
  double right = h / 12.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

MollifierTable::MollifierTable() : n_(8192), h_(2.0 / 8192) {
  cdf_.resize(n_ + 1);
  mom_.resize(n_ + 1);
  cdf_[0] = 0.0;
  mom_[0] = 0.0;
  // composite Simpson per subinterval; phi is smooth so the per-cell error
  // is far below the interpolation error
  for (int k = 0; k < n_; ++k) {
    double x0 = -1.0 + k * h_;
    double x1 = x0 + h_;
    double xm = 0.5 * (x0 + x1);
    double f0 = mollifier(x0), fm = mollifier(xm), f1 = mollifier(x1);
    cdf_[k + 1] = cdf_[k] + h_ / 6.0 * (f0 + 4.0 * fm + f1);
    mom_[k + 1] = mom_[k] + h_ / 6.0 * (x0 * f0 + 4.0 * xm * fm + x1 * f1);
  }
  // pin the endpoint identities exactly: total mass 1, zero first moment
  double total = cdf_[n_];
  for (auto& v : cdf_) v /= total;
  double drift = mom_[n_];
  for (int k = 0; k <= n_; ++k) mom_[k] -= drift * cdf_[k];
}

const MollifierTable& MollifierTable::instance() {
  static const MollifierTable t;
  return t;
}

double MollifierTable::interp(const std::vector<double>& prefix, bool moment,
                              double t) const {
  if (t <= -1.0) return prefix.front();
  if (t >= 1.0) return prefix.back();
  double u = (t + 1.0) / h_;
  int k = static_cast<int>(u);
  if (k >= n_) k = n_ - 1;
  double x0 = -1.0 + k * h_;
  double s = (t - x0) / h_;
  double y0 = prefix[k], y1 = prefix[k + 1];
  double d0 = mollifier(x0), d1 = mollifier(x0 + h_);
  if (moment) {
    d0 *= x0;
    d1 *= (x0 + h_);
  }
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y0 + h10 * h_ * d0 + h01 * y1 + h11 * h_ * d1;
}

double MollifierTable::cdf(double t) const {
  // Hermite interpolation can undershoot by ~1e-200 where the integrand is
  // flat to machine precision; pin to [0,1]
  double v = interp(cdf_, false, t);
  return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

double MollifierTable::first_moment(double t) const {
  return interp(mom_, true, t);
}

double MollifierTable::ramp(double a) const {
  if (a <= -1.0) return 0.0;
  if (a >= 1.0) return a;  // cdf = 1, first moment = 0
  return a * cdf(a) - first_moment(a);
}

}  // namespace flatmc
