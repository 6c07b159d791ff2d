#include "fsamp/net.hpp"

#include "fsamp/error.hpp"

#include <cmath>
#include <numbers>

namespace fsamp {

namespace {

Mat activate(Activation a, const Mat& z) {
  if (a == Activation::kTanh) return z.array().tanh().matrix();
  return (z.array() / (1.0 + (-z.array()).exp())).matrix();
}

Mat activate_grad(Activation a, const Mat& z) {
  if (a == Activation::kTanh) return (1.0 - z.array().tanh().square()).matrix();
  const auto s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

std::string to_string(Activation a) {
  return a == Activation::kTanh ? "tanh" : "silu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "silu") return Activation::kSiLU;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorCode::kInvalidArgument, "unknown activation: " + name);
}

Mat time_features(const Vec& t, int count) {
  Mat f(2 * count, t.size());
  for (int k = 0; k < count; ++k) {
    const double w = std::ldexp(std::numbers::pi, k);
    f.row(2 * k) = (w * t.array()).sin().matrix().transpose();
    f.row(2 * k + 1) = (w * t.array()).cos().matrix().transpose();
  }
  return f;
}

DriftModel::DriftModel(std::vector<int> layer_dims, Activation activation,
                       int time_features)
    : layer_dims_(std::move(layer_dims)),
      activation_(activation),
      time_features_(time_features) {
  if (layer_dims_.size() < 2 || time_features_ < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "DriftModel: need at least input and output dims");
  }
  for (int d : layer_dims_) {
    if (d < 1) throw Error(ErrorCode::kInvalidArgument, "DriftModel: layer dims must be >= 1");
  }
  std::size_t off = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(off);
    off += static_cast<std::size_t>(fan_out(l)) * (fan_in(l) + 1);
  }
  offsets_.push_back(off);
  params_ = Vec::Zero(static_cast<Eigen::Index>(off));
}

DriftModel DriftModel::create(int data_dim, int output_dim, const ModelConfig& cfg,
                              std::uint64_t seed) {
  std::vector<int> dims{data_dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(output_dim);
  DriftModel m(std::move(dims), cfg.activation, cfg.time_features);
  m.initialize(seed);
  return m;
}

int DriftModel::fan_in(int layer) const {
  return layer == 0 ? layer_dims_[0] + 2 * time_features_ : layer_dims_[layer];
}

void DriftModel::initialize(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x6d6f64656cULL);
  params_.setZero();
  for (int l = 0; l + 1 < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in(l)));
    std::uniform_real_distribution<double> u(-bound, bound);
    const std::size_t n = offsets_[l + 1] - offsets_[l];
    for (std::size_t i = 0; i < n; ++i) params_[static_cast<Eigen::Index>(offsets_[l] + i)] = u(rng);
  }
}

Eigen::Map<const Mat> DriftModel::weight(int layer) const {
  return {params_.data() + offsets_[layer], fan_out(layer), fan_in(layer)};
}

Eigen::Map<const Vec> DriftModel::bias(int layer) const {
  return {params_.data() + offsets_[layer] +
              static_cast<std::size_t>(fan_out(layer)) * fan_in(layer),
          fan_out(layer)};
}

Mat DriftModel::augment(const Mat& x, const Vec& t) const {
  if (x.rows() != input_dim() || x.cols() != t.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "DriftModel::forward: expected " + std::to_string(input_dim()) +
                    " x n input with n times");
  }
  Mat h(fan_in(0), x.cols());
  h.topRows(input_dim()) = x;
  if (time_features_ > 0) h.bottomRows(2 * time_features_) = fsamp::time_features(t, time_features_);
  return h;
}

Mat DriftModel::forward(const Mat& x, const Vec& t) const {
  Mat h = augment(x, t);
  for (int l = 0; l < num_layers(); ++l) {
    Mat z = weight(l) * h;
    z.colwise() += bias(l);
    h = (l + 1 < num_layers()) ? activate(activation_, z) : std::move(z);
  }
  return h;
}

Vec DriftModel::forward(const Vec& x, double t) const {
  Vec tv(1);
  tv[0] = t;
  return forward(Mat(x), tv).col(0);
}

Mat DriftModel::forward(const Mat& x, const Vec& t, Tape& tape) const {
  tape.pre.clear();
  tape.post.clear();
  tape.post.push_back(augment(x, t));
  for (int l = 0; l < num_layers(); ++l) {
    Mat z = weight(l) * tape.post.back();
    z.colwise() += bias(l);
    tape.pre.push_back(z);
    if (l + 1 < num_layers()) tape.post.push_back(activate(activation_, z));
  }
  return tape.pre.back();
}

Vec DriftModel::backward(const Tape& tape, const Mat& grad_out) const {
  Vec grad = Vec::Zero(params_.size());
  Mat g = grad_out;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const std::size_t w_size = static_cast<std::size_t>(fan_out(l)) * fan_in(l);
    Eigen::Map<Mat>(grad.data() + offsets_[l], fan_out(l), fan_in(l)) =
        g * tape.post[l].transpose();
    Eigen::Map<Vec>(grad.data() + offsets_[l] + w_size, fan_out(l)) = g.rowwise().sum();
    if (l > 0) {
      g = (weight(l).transpose() * g).cwiseProduct(activate_grad(activation_, tape.pre[l - 1]));
    }
  }
  return grad;
}

OutputProjection OutputProjection::tangent(const ManifoldSpec& spec) {
  OutputProjection p;
  p.kind = Kind::kTangent;
  p.manifold = spec;
  return p;
}

OutputProjection OutputProjection::zero_com(const ParticleLayout& layout) {
  OutputProjection p;
  p.kind = Kind::kZeroCom;
  p.layout = layout;
  return p;
}

Vec OutputProjection::apply(const Vec& x, const Vec& pred) const {
  switch (kind) {
    case Kind::kTangent:
      return project_tangent(manifold, x, pred);
    case Kind::kZeroCom:
      return zero_com_project(pred, layout);
    case Kind::kNone:
      break;
  }
  return pred;
}

double OutputProjection::sq_norm(const Vec& v) const {
  return kind == Kind::kTangent ? inner(manifold, v, v) : v.squaredNorm();
}

Vec OutputProjection::residual_grad(const Vec& x, const Vec& residual) const {
  switch (kind) {
    case Kind::kTangent:
      // d/dp <P r, P r>_S with P self-adjoint in S: 2 S P r
      return 2.0 * manifold.sigma_diag.cwiseProduct(project_tangent(manifold, x, residual));
    case Kind::kZeroCom:
      return 2.0 * zero_com_project(residual, layout);
    case Kind::kNone:
      break;
  }
  return 2.0 * residual;
}

LossAndGrad fs_loss_and_grad(const DriftModel& model, const FsBatch& batch,
                             const OutputProjection& proj) {
  const auto n = batch.xt.cols();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "fs_loss_and_grad: empty batch");
  if (batch.t.size() != n || batch.target.cols() != n ||
      batch.target.rows() != model.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "fs_loss_and_grad: batch shape mismatch");
  }
  if (!batch.xt.allFinite() || !batch.t.allFinite() || !batch.target.allFinite()) {
    throw Error(ErrorCode::kDivergence, "fs_loss_and_grad: non-finite values in batch");
  }
  DriftModel::Tape tape;
  const Mat pred = model.forward(batch.xt, batch.t, tape);
  Mat grad_out(pred.rows(), n);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vec x = batch.xt.col(j);
    const Vec r = proj.apply(x, pred.col(j)) - batch.target.col(j);
    loss += proj.sq_norm(r);
    grad_out.col(j) = inv_n * proj.residual_grad(x, r);
  }
  LossAndGrad out;
  out.loss = loss * inv_n;
  out.grad = model.backward(tape, grad_out);
  if (!std::isfinite(out.loss) || !out.grad.allFinite()) {
    throw Error(ErrorCode::kDivergence, "fs_loss_and_grad: non-finite loss or gradient");
  }
  return out;
}

void adam_step(AdamState& s, Vec& params, const Vec& grads) {
  if (params.size() != grads.size() || s.m.size() != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "adam_step: length mismatch");
  }
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grads;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  params.array() -= s.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + s.eps);
}

}  // namespace fsamp
