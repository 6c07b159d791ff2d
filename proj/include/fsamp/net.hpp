#pragma once

#include "fsamp/geometry.hpp"
#include "fsamp/random.hpp"
#include "fsamp/targets.hpp"

#include <cstdint>
#include <vector>

namespace fsamp {

enum class Activation : std::uint32_t { kSiLU = 0, kTanh = 1 };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct ModelConfig {
  std::vector<int> hidden = {128, 128, 128, 128};
  Activation activation = Activation::kSiLU;
  int time_features = 8;
};

// Fixed-topology MLP drift u(x, t). The input is x concatenated with
// [sin(2^k pi t), cos(2^k pi t)] for k < time_features.
//
// Parameters live in one flat vector; layer l occupies W_l (column-major,
// fan_out x fan_in) followed by b_l.
class DriftModel {
 public:
  DriftModel() = default;
  // layer_dims = {data_dim, hidden..., output_dim}.
  DriftModel(std::vector<int> layer_dims, Activation activation, int time_features);

  static DriftModel create(int data_dim, int output_dim, const ModelConfig& cfg,
                           std::uint64_t seed);

  const std::vector<int>& layer_dims() const { return layer_dims_; }
  Activation activation() const { return activation_; }
  int time_features() const { return time_features_; }
  int input_dim() const { return layer_dims_.front(); }
  int output_dim() const { return layer_dims_.back(); }
  int num_layers() const { return static_cast<int>(layer_dims_.size()) - 1; }

  // fan-in of layer l, including the time features on layer 0.
  int fan_in(int layer) const;
  int fan_out(int layer) const { return layer_dims_[layer + 1]; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  // Uniform(+-1/sqrt(fan_in)) weights and biases; the final layer is zeroed.
  void initialize(std::uint64_t seed);

  // Columns are samples: x is input_dim x n, t has n entries.
  Mat forward(const Mat& x, const Vec& t) const;
  Vec forward(const Vec& x, double t) const;

  // Forward pass keeping activations, then the parameter gradient of
  // sum_j <grad_out.col(j), out.col(j)>.
  struct Tape {
    std::vector<Mat> pre;   // pre-activations per layer
    std::vector<Mat> post;  // layer inputs; post[0] is the augmented input
  };
  Mat forward(const Mat& x, const Vec& t, Tape& tape) const;
  Vec backward(const Tape& tape, const Mat& grad_out) const;

 private:
  Eigen::Map<const Mat> weight(int layer) const;
  Eigen::Map<const Vec> bias(int layer) const;
  Mat augment(const Mat& x, const Vec& t) const;

  std::vector<int> layer_dims_;
  Activation activation_ = Activation::kSiLU;
  int time_features_ = 0;
  std::vector<std::size_t> offsets_;
  Vec params_;
};

Mat time_features(const Vec& t, int count);

// Output constraint applied to the model prediction inside the loss and the
// sampler: none, tangent projection onto a manifold, or zero centre of mass.
struct OutputProjection {
  enum class Kind { kNone, kTangent, kZeroCom };
  Kind kind = Kind::kNone;
  ManifoldSpec manifold;
  ParticleLayout layout;

  static OutputProjection none() { return {}; }
  static OutputProjection tangent(const ManifoldSpec& spec);
  static OutputProjection zero_com(const ParticleLayout& layout);

  // Projects pred (column) at state x.
  Vec apply(const Vec& x, const Vec& pred) const;
  // Squared norm used by the loss (Sigma-norm for the tangent kind).
  double sq_norm(const Vec& v) const;
  // d(sq_norm(apply(x, pred) - target)) / d pred, given the residual.
  Vec residual_grad(const Vec& x, const Vec& residual) const;
};

struct FsBatch {
  Mat xt;       // data_dim x n
  Vec t;        // n
  Mat target;   // data_dim x n
};

struct LossAndGrad {
  double loss = 0.0;
  Vec grad;
};

// Mean over the batch of ||proj(pred) - target||^2 and its exact parameter
// gradient. Throws on non-finite inputs.
LossAndGrad fs_loss_and_grad(const DriftModel& model, const FsBatch& batch,
                             const OutputProjection& proj);

struct AdamState {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  Vec m;
  Vec v;

  explicit AdamState(std::size_t n = 0, double lr = 3e-4)
      : lr(lr), m(Vec::Zero(static_cast<Eigen::Index>(n))),
        v(Vec::Zero(static_cast<Eigen::Index>(n))) {}
};

void adam_step(AdamState& state, Vec& params, const Vec& grads);

}  // namespace fsamp
