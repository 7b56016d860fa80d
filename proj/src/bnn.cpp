#include "flatmc/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "flatmc/errors.hpp"

namespace flatmc {

BnnPosterior::BnnPosterior(Layout layout, std::vector<Vec> features,
                           std::vector<int> labels, double alpha1,
                           double alpha2, double beta_like, std::vector<int> j1,
                           std::vector<uint8_t> f1, std::vector<int> j2,
                           std::vector<uint8_t> f2,
                           std::vector<double> fixed_bias, int d1, int d2)
    : layout_(std::move(layout)),
      x_data_(std::move(features)),
      labels_(std::move(labels)),
      alpha1_(alpha1),
      alpha2_(alpha2),
      beta_(beta_like),
      j1_(std::move(j1)),
      j2_(std::move(j2)),
      f1_(std::move(f1)),
      f2_(std::move(f2)),
      c_fixed_(std::move(fixed_bias)),
      d1_(d1),
      d2_(d2) {
  const int lbar = depth();
  if (lbar < 1 || static_cast<int>(layout_.m.size()) != lbar + 1)
    throw input_error("bnn: layer size vectors inconsistent");
  if (layout_.m.back() < 2) throw input_error("bnn: need at least 2 classes");
  if (layout_.mhat.back() != layout_.m.back())
    throw input_error("bnn: final pre-activation width must equal classes");
  if (static_cast<int>(layout_.act.size()) != lbar - 1)
    throw input_error("bnn: need Lbar-1 hidden activations");
  if (alpha1_ <= 0 || alpha2_ <= 0 || beta_ <= 0)
    throw input_error("bnn: alpha1, alpha2, beta must be positive");
  if (d1_ < 1 || d2_ < 0) throw input_error("bnn: d1 >= 1, d2 >= 0 required");
  if (x_data_.size() != labels_.size() || x_data_.empty())
    throw input_error("bnn: dataset empty or sizes mismatched");
  for (std::size_t i = 0; i < x_data_.size(); ++i) {
    if (static_cast<int>(x_data_[i].size()) != layout_.m[0])
      throw input_error("bnn: feature dimension mismatch");
    if (labels_[i] < 0 || labels_[i] >= layout_.m.back())
      throw input_error("bnn: label out of range");
  }
  s_.assign(lbar + 1, 0);
  sp_.assign(lbar + 1, 0);
  cat_.assign(lbar + 1, 0);
  for (int l = 1; l <= lbar; ++l) {
    int cat = 0;
    for (int k = 0; k < l; ++k) cat += layout_.m[k];
    cat_[l] = cat;
    s_[l] = s_[l - 1] + layout_.mhat[l - 1] * cat;
    sp_[l] = sp_[l - 1] + layout_.mhat[l - 1];
  }
  if (static_cast<int>(f1_.size()) != s_[lbar] ||
      static_cast<int>(j1_.size()) != s_[lbar])
    throw input_error("bnn: F1/J1 must cover all weight slots");
  if (static_cast<int>(f2_.size()) != sp_[lbar] ||
      static_cast<int>(j2_.size()) != sp_[lbar] ||
      static_cast<int>(c_fixed_.size()) != sp_[lbar])
    throw input_error("bnn: F2/J2/c must cover all bias slots");
  for (int j = 0; j < s_[lbar]; ++j)
    if (f1_[j] && (j1_[j] < 0 || j1_[j] >= d1_))
      throw input_error("bnn: J1 index out of range");
  for (int j = 0; j < sp_[lbar]; ++j)
    if (f2_[j] && (j2_[j] < 0 || j2_[j] >= d2_))
      throw input_error("bnn: J2 index out of range");
}

namespace {
inline double act_forward(BnnPosterior::Act a, double v) {
  return a == BnnPosterior::Act::Tanh ? std::tanh(v) : (v > 0 ? v : 0.0);
}
inline double act_deriv(BnnPosterior::Act a, double pre, double post) {
  if (a == BnnPosterior::Act::Tanh) return 1.0 - post * post;
  (void)pre;
  return pre > 0 ? 1.0 : 0.0;
}
}  // namespace

double BnnPosterior::eval(const double* v, double* grad) const {
  const int lbar = depth();
  const int I = classes();
  const double* xbar = v;
  const double* ybar = v + d1_;

  double reg = 0.0;
  for (int i = 0; i < d1_; ++i) reg += xbar[i] * xbar[i];
  double u = alpha1_ * reg;
  reg = 0.0;
  for (int i = 0; i < d2_; ++i) reg += ybar[i] * ybar[i];
  u += alpha2_ * reg;
  if (grad) {
    for (int i = 0; i < d1_; ++i) grad[i] = 2.0 * alpha1_ * xbar[i];
    for (int i = 0; i < d2_; ++i) grad[d1_ + i] = 2.0 * alpha2_ * ybar[i];
  }

  // materialize weights/biases from the index maps (fixed weights are 0)
  std::vector<std::vector<double>> w(lbar), b(lbar);
  for (int l = 1; l <= lbar; ++l) {
    int rows = layout_.mhat[l - 1], cols = cat_[l];
    w[l - 1].assign(static_cast<std::size_t>(rows) * cols, 0.0);
    for (int r = 0; r < rows * cols; ++r) {
      int j = s_[l - 1] + r;
      if (f1_[j]) w[l - 1][r] = xbar[j1_[j]];
    }
    b[l - 1].assign(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      int j = sp_[l - 1] + r;
      b[l - 1][r] = f2_[j] ? ybar[j2_[j]] : c_fixed_[j];
    }
  }

  std::vector<std::vector<double>> z(lbar + 1), pre(lbar + 1), dz(lbar);
  std::vector<double> soft(I);
  const std::size_t K = x_data_.size();
  for (std::size_t idat = 0; idat < K; ++idat) {
    z[0] = x_data_[idat];
    // forward: zhat^{l-1} = (z^{l-1},...,z^{0}) concatenated in that order
    for (int l = 1; l <= lbar; ++l) {
      int rows = layout_.mhat[l - 1], cols = cat_[l];
      pre[l].assign(rows, 0.0);
      for (int r = 0; r < rows; ++r) {
        double acc = b[l - 1][r];
        const double* wrow = &w[l - 1][static_cast<std::size_t>(r) * cols];
        int off = 0;
        for (int k = l - 1; k >= 0; --k) {
          const auto& zk = z[k];
          for (std::size_t q = 0; q < zk.size(); ++q) acc += wrow[off + q] * zk[q];
          off += static_cast<int>(zk.size());
        }
        pre[l][r] = acc;
        if (!std::isfinite(acc))
          throw numerical_error("bnn: non-finite pre-activation; rescale data");
      }
      if (l < lbar) {
        z[l].resize(rows);
        for (int r = 0; r < rows; ++r)
          z[l][r] = act_forward(layout_.act[l - 1], pre[l][r]);
      }
    }
    // softmax cross-entropy, log-sum-exp stabilized
    double amax = pre[lbar][0];
    for (int r = 1; r < I; ++r) amax = std::max(amax, pre[lbar][r]);
    double zsum = 0.0;
    for (int r = 0; r < I; ++r) {
      soft[r] = std::exp(pre[lbar][r] - amax);
      zsum += soft[r];
    }
    int y = labels_[idat];
    u += beta_ * (std::log(zsum) + amax - pre[lbar][y]);
    if (!grad) continue;

    // backward
    for (int l = 0; l < lbar; ++l) dz[l].assign(layout_.m[l], 0.0);
    std::vector<double> da;
    for (int l = lbar; l >= 1; --l) {
      int rows = layout_.mhat[l - 1], cols = cat_[l];
      if (l == lbar) {
        da.assign(I, 0.0);
        for (int r = 0; r < I; ++r)
          da[r] = beta_ * (soft[r] / zsum - (r == y ? 1.0 : 0.0));
      } else {
        da.assign(rows, 0.0);
        for (int r = 0; r < rows; ++r)
          da[r] = dz[l][r] * act_deriv(layout_.act[l - 1], pre[l][r], z[l][r]);
      }
      for (int r = 0; r < rows; ++r) {
        double g = da[r];
        if (g == 0.0) continue;
        const double* wrow = &w[l - 1][static_cast<std::size_t>(r) * cols];
        int off = 0;
        for (int k = l - 1; k >= 0; --k) {
          const auto& zk = z[k];
          for (std::size_t q = 0; q < zk.size(); ++q) {
            int j = s_[l - 1] + r * cols + off + static_cast<int>(q);
            if (f1_[j]) grad[j1_[j]] += g * zk[q];
            if (k > 0) dz[k][q] += g * wrow[off + q];
          }
          off += static_cast<int>(zk.size());
        }
        int jb = sp_[l - 1] + r;
        if (f2_[jb]) grad[d1_ + j2_[jb]] += g;
      }
    }
  }
  if (!std::isfinite(u))
    throw numerical_error("bnn: non-finite posterior value; rescale data");
  return u;
}

int BnnPosterior::m_star() const {
  // Remark reading: count of free direct connections into the last layer
  const int lbar = depth();
  int rows = layout_.mhat[lbar - 1], cols = cat_[lbar];
  int best = 0;
  for (int r = 0; r < rows; ++r) {
    int cnt = 0;
    for (int c = 0; c < cols; ++c)
      if (f1_[s_[lbar - 1] + r * cols + c]) ++cnt;
    best = std::max(best, cnt);
  }
  return best;
}

double BnnPosterior::sigma_max() const {
  const int lbar = depth();
  int rows = layout_.mhat[lbar - 1], cols = cat_[lbar];
  // segments of the final concat, in order (z^{Lbar-1},...,z^{0})
  double smax = 0.0;
  int off = 0;
  for (int k = lbar - 1; k >= 0; --k) {
    int width = layout_.m[k];
    bool touched = false;
    for (int r = 0; r < rows && !touched; ++r)
      for (int c = 0; c < width; ++c)
        if (f1_[s_[lbar - 1] + r * cols + off + c]) {
          touched = true;
          break;
        }
    if (touched) {
      if (k == 0)
        throw hypothesis_error(
            "bnn: final layer reads raw inputs; activations unbounded");
      if (layout_.act[k - 1] == Act::Relu)
        throw hypothesis_error(
            "bnn: final layer fed by ReLU; activations unbounded");
      smax = std::max(smax, 1.0);  // tanh
    }
    off += width;
  }
  return smax;
}

double BnnPosterior::c_hat_bias() const {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t j = 0; j < f2_.size(); ++j) {
    if (!f2_[j]) {
      if (!any) {
        lo = hi = c_fixed_[j];
        any = true;
      } else {
        lo = std::min(lo, c_fixed_[j]);
        hi = std::max(hi, c_fixed_[j]);
      }
    }
  }
  return any ? hi - lo : 0.0;
}

bool BnnPosterior::last_layer_injective() const {
  const int lbar = depth();
  std::set<int> seen;
  for (int j = s_[lbar - 1]; j < s_[lbar]; ++j)
    if (f1_[j] && !seen.insert(j1_[j]).second) return false;
  seen.clear();
  for (int j = sp_[lbar - 1]; j < sp_[lbar]; ++j)
    if (f2_[j] && !seen.insert(j2_[j]).second) return false;
  return true;
}

BnnPosterior make_feedforward_bnn(int p, const std::vector<int>& widths,
                                  int classes, std::vector<Vec> features,
                                  std::vector<int> labels, double alpha1,
                                  double alpha2, double beta_like,
                                  BnnPosterior::Act hidden) {
  BnnPosterior::Layout lay;
  lay.m.push_back(p);
  for (int w : widths) lay.m.push_back(w);
  lay.m.push_back(classes);
  const int lbar = static_cast<int>(lay.m.size()) - 1;
  for (int l = 1; l <= lbar; ++l) lay.mhat.push_back(lay.m[l]);
  for (int l = 1; l < lbar; ++l) lay.act.push_back(hidden);

  std::vector<int> j1, j2;
  std::vector<uint8_t> f1, f2;
  int nvar1 = 0, nvar2 = 0;
  for (int l = 1; l <= lbar; ++l) {
    int rows = lay.mhat[l - 1];
    int cat = 0;
    for (int k = 0; k < l; ++k) cat += lay.m[k];
    for (int r = 0; r < rows; ++r) {
      // only the z^{l-1} segment (first m[l-1] columns) is connected
      for (int c = 0; c < cat; ++c) {
        bool adjacent = c < lay.m[l - 1];
        f1.push_back(adjacent ? 1 : 0);
        j1.push_back(adjacent ? nvar1++ : 0);
      }
    }
    for (int r = 0; r < rows; ++r) {
      f2.push_back(1);
      j2.push_back(nvar2++);
    }
  }
  std::vector<double> cfix(f2.size(), 0.0);
  return BnnPosterior(std::move(lay), std::move(features), std::move(labels),
                      alpha1, alpha2, beta_like, std::move(j1), std::move(f1),
                      std::move(j2), std::move(f2), std::move(cfix), nvar1,
                      nvar2);
}

void synth_dataset(int n, int p, int classes, std::uint64_t seed,
                   std::vector<Vec>& features, std::vector<int>& labels) {
  CounterRng rng(seed, 0x626e6e64617461ull);
  features.assign(n, Vec(p));
  labels.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) features[i][j] = rng.normal();
    labels[i] = static_cast<int>(rng.below(classes));
  }
}

}  // namespace flatmc
