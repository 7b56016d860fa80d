#pragma once
#include <cstdint>
#include <vector>

#include "flatmc/density.hpp"

namespace flatmc {

// Regularized negative log-posterior of a multi-class classification network,
//   U(xbar, ybar) = a1 |xbar|^2 + a2 |ybar|^2 + beta * cross-entropy,
// with a softmax final layer and full skip connectivity in the layer
// recursion: the affine map of layer l reads the concatenation
// (z^{l-1}, ..., z^{0}). Network structure (feedforward etc.) is imposed by
// the index maps: F1/F2 mark which flattened weight/bias slots are free,
// J1/J2 map free slots to sampling variables (weights fixed by F1 are 0,
// biases fixed by F2 take the constants c_fixed).
class BnnPosterior : public TargetDensity {
 public:
  using TargetDensity::eval;
  using TargetDensity::u;
  enum class Act { Tanh, Relu };

  struct Layout {
    std::vector<int> m;     // m[0] = p features, m[Lbar] = I classes
    std::vector<int> mhat;  // pre-activation widths, mhat[l], l = 1..Lbar
    std::vector<Act> act;   // hidden activations, act[l], l = 1..Lbar-1
  };

  BnnPosterior(Layout layout, std::vector<Vec> features,
               std::vector<int> labels, double alpha1, double alpha2,
               double beta_like, std::vector<int> j1, std::vector<uint8_t> f1,
               std::vector<int> j2, std::vector<uint8_t> f2,
               std::vector<double> fixed_bias, int d1, int d2);

  int dim() const override { return d1_ + d2_; }
  double eval(const double* x, double* grad) const override;

  int features() const { return layout_.m[0]; }
  int classes() const { return layout_.m.back(); }
  int depth() const { return static_cast<int>(layout_.mhat.size()); }  // Lbar
  int data_count() const { return static_cast<int>(labels_.size()); }
  int d1() const { return d1_; }
  int d2() const { return d2_; }
  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  double beta_like() const { return beta_; }

  // max over final-layer rows of the number of free direct connections
  int m_star() const;
  // bound on the activations feeding the final layer (1 for tanh);
  // throws hypothesis_error if some feeding activation is unbounded
  double sigma_max() const;
  // spread max c_j - min c_j over fixed bias slots (0 if none fixed)
  double c_hat_bias() const;
  // J1/J2 restricted to the free final-layer slots are injective
  bool last_layer_injective() const;

  const std::vector<int>& weight_offsets() const { return s_; }
  const std::vector<int>& bias_offsets() const { return sp_; }
  const std::vector<uint8_t>& f1() const { return f1_; }
  const std::vector<uint8_t>& f2() const { return f2_; }

 private:
  Layout layout_;
  std::vector<Vec> x_data_;
  std::vector<int> labels_;
  double alpha1_, alpha2_, beta_;
  std::vector<int> j1_, j2_;
  std::vector<uint8_t> f1_, f2_;
  std::vector<double> c_fixed_;
  int d1_, d2_;
  std::vector<int> s_, sp_;    // S_l, S'_l offsets, l = 0..Lbar
  std::vector<int> cat_;       // total concat width entering layer l
};

// Classical feedforward net: layer l connects only to layer l-1; all present
// weights and biases are free sampling variables. widths = (m_1,...,m_{Lbar-1}).
BnnPosterior make_feedforward_bnn(int p, const std::vector<int>& widths,
                                  int classes, std::vector<Vec> features,
                                  std::vector<int> labels, double alpha1,
                                  double alpha2, double beta_like,
                                  BnnPosterior::Act hidden = BnnPosterior::Act::Tanh);

// Synthetic classification data: standard normal features, uniform labels.
void synth_dataset(int n, int p, int classes, std::uint64_t seed,
                   std::vector<Vec>& features, std::vector<int>& labels);

}  // namespace flatmc
