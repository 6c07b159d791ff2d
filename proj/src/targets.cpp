#include "fsamp/targets.hpp"

#include "fsamp/error.hpp"

#include <cmath>
#include <numbers>

namespace fsamp {

namespace {

void require_dim(const Vec& x, int dim, const char* op) {
  if (x.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": expected " + std::to_string(dim) +
                    " entries, got " + std::to_string(x.size()));
  }
}

double log_sum_exp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// log of the vMF normalizer on S^{p-1}.
double vmf_log_normalizer(int p, double kappa) {
  if (kappa < 1e-12) {
    // 1 / surface area of S^{p-1}
    const double half = 0.5 * p;
    return std::lgamma(half) - std::log(2.0) - half * std::log(std::numbers::pi);
  }
  if (p == 3) {
    const double log_sinh = kappa + std::log1p(-std::exp(-2.0 * kappa)) - std::log(2.0);
    return std::log(kappa) - std::log(4.0 * std::numbers::pi) - log_sinh;
  }
  const double nu = 0.5 * p - 1.0;
  return nu * std::log(kappa) - 0.5 * p * std::log(2.0 * std::numbers::pi) -
         std::log(std::cyl_bessel_i(nu, kappa));
}

Vec normalize_weights(const Vec& w, const char* what) {
  if (w.size() == 0 || (w.array() < 0.0).any() || !(w.sum() > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": weights must be non-negative with a positive sum");
  }
  return w / w.sum();
}

struct PairTerm {
  double energy = 0.0;
  double d_energy = 0.0;  // dE/dd
};

PairTerm dw_pair(const Dw4Params& p, double d) {
  const double u = d - p.d0;
  const double u2 = u * u;
  return {(p.a * u + p.b * u2 + p.c * u2 * u2) / p.tau,
          (p.a + 2.0 * p.b * u + 4.0 * p.c * u2 * u) / p.tau};
}

PairTerm lj_pair(const LjParams& p, double d) {
  const double floor = 1e-3 * p.rm;
  const bool clipped = d < floor;
  const double dd = clipped ? floor : d;
  const double s6 = std::pow(p.rm / dd, 6);
  const double s12 = s6 * s6;
  const double scale = p.eps / p.tau * (p.standard_sign ? -1.0 : 1.0);
  PairTerm out;
  out.energy = scale * (s6 - s12);
  // d/dd (rm/d)^k = -k (rm/d)^k / d
  out.d_energy = clipped ? 0.0 : scale * (-6.0 * s6 + 12.0 * s12) / dd;
  return out;
}

template <typename PairFn>
double pair_energy(const Vec& x, int n, int spatial, PairFn&& pair, Vec* grad) {
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec diff = x.segment(i * spatial, spatial) - x.segment(j * spatial, spatial);
      const double d = diff.norm();
      const PairTerm term = pair(d);
      e += term.energy;
      if (grad != nullptr && d > 0.0) {
        const Vec g = term.d_energy * diff / d;
        grad->segment(i * spatial, spatial) += g;
        grad->segment(j * spatial, spatial) -= g;
      }
    }
  }
  return e;
}

}  // namespace

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kGmm:
      return "gmm";
    case TargetKind::kDw4:
      return "dw4";
    case TargetKind::kLennardJones:
      return "lj";
    case TargetKind::kVmfMixture:
      return "vmf";
  }
  return "unknown";
}

TargetDensity TargetDensity::gmm(GmmParams params) {
  if (params.centers.rows() == 0 || params.centers.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "gmm: at least one center required");
  }
  if (params.weights.size() == 0) {
    params.weights = Vec::Ones(params.centers.rows());
  }
  if (params.weights.size() != params.centers.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "gmm: one weight per center required");
  }
  if (!(params.variance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gmm: variance must be > 0");
  }
  params.weights = normalize_weights(params.weights, "gmm");
  TargetDensity t;
  t.kind_ = TargetKind::kGmm;
  t.dim_ = static_cast<int>(params.centers.cols());
  t.params_ = std::move(params);
  return t;
}

TargetDensity TargetDensity::dw4(Dw4Params params) {
  if (params.n_particles < 2 || params.spatial < 1 || !(params.tau > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dw4: invalid parameters");
  }
  TargetDensity t;
  t.kind_ = TargetKind::kDw4;
  t.dim_ = params.n_particles * params.spatial;
  t.params_ = params;
  return t;
}

TargetDensity TargetDensity::lennard_jones(LjParams params) {
  if (params.n_particles < 2 || params.spatial < 1 || !(params.tau > 0.0) ||
      !(params.rm > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lj: invalid parameters");
  }
  TargetDensity t;
  t.kind_ = TargetKind::kLennardJones;
  t.dim_ = params.n_particles * params.spatial;
  t.params_ = params;
  return t;
}

TargetDensity TargetDensity::vmf_mixture(VmfMixtureParams params) {
  const auto k = params.mus.rows();
  if (k == 0 || params.mus.cols() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "vmf: at least one mean direction required");
  }
  if (params.kappas.size() == 1 && k > 1) {
    params.kappas = Vec::Constant(k, params.kappas[0]);
  }
  if (params.weights.size() == 0) params.weights = Vec::Ones(k);
  if (params.kappas.size() != k || params.weights.size() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "vmf: one kappa and weight per component");
  }
  if ((params.kappas.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "vmf: kappa must be >= 0");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(params.mus.row(i).norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "vmf: mean directions must be unit-norm");
    }
  }
  params.weights = normalize_weights(params.weights, "vmf");
  TargetDensity t;
  t.kind_ = TargetKind::kVmfMixture;
  t.dim_ = static_cast<int>(params.mus.cols());
  t.manifold_ = ManifoldSpec::sphere(t.dim_ - 1);
  t.params_ = std::move(params);
  return t;
}

std::optional<ParticleLayout> TargetDensity::particles() const {
  switch (kind_) {
    case TargetKind::kDw4:
      return ParticleLayout{dw4_params().n_particles, dw4_params().spatial};
    case TargetKind::kLennardJones:
      return ParticleLayout{lj_params().n_particles, lj_params().spatial};
    default:
      return std::nullopt;
  }
}

double TargetDensity::reward(const Vec& x) const {
  require_dim(x, dim_, "reward");
  switch (kind_) {
    case TargetKind::kGmm: {
      const auto& p = gmm_params();
      const auto k = p.centers.rows();
      Vec logs(k);
      const double log_norm = -0.5 * dim_ * std::log(2.0 * std::numbers::pi * p.variance);
      for (Eigen::Index i = 0; i < k; ++i) {
        logs[i] = std::log(p.weights[i]) + log_norm -
                  0.5 * (x - p.centers.row(i).transpose()).squaredNorm() / p.variance;
      }
      return log_sum_exp(logs);
    }
    case TargetKind::kDw4: {
      const auto& p = dw4_params();
      return -pair_energy(x, p.n_particles, p.spatial,
                          [&](double d) { return dw_pair(p, d); }, nullptr);
    }
    case TargetKind::kLennardJones: {
      const auto& p = lj_params();
      double e = pair_energy(x, p.n_particles, p.spatial,
                             [&](double d) { return lj_pair(p, d); }, nullptr);
      const Vec centered = zero_com_project(x, {p.n_particles, p.spatial});
      e += p.osc_c * 0.5 * centered.squaredNorm();
      return -e;
    }
    case TargetKind::kVmfMixture: {
      const auto& p = vmf_params();
      const auto k = p.mus.rows();
      Vec logs(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        logs[i] = std::log(p.weights[i]) + vmf_log_normalizer(dim_, p.kappas[i]) +
                  p.kappas[i] * p.mus.row(i).dot(x);
      }
      return log_sum_exp(logs);
    }
  }
  return 0.0;
}

Vec TargetDensity::score(const Vec& x) const {
  calls_->fetch_add(1);
  return score_uncounted(x);
}

Vec TargetDensity::score_uncounted(const Vec& x) const {
  require_dim(x, dim_, "score");
  switch (kind_) {
    case TargetKind::kGmm: {
      const auto& p = gmm_params();
      const auto k = p.centers.rows();
      Vec logs(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        logs[i] = std::log(p.weights[i]) -
                  0.5 * (x - p.centers.row(i).transpose()).squaredNorm() / p.variance;
      }
      const Vec resp = (logs.array() - log_sum_exp(logs)).exp();
      Vec g = Vec::Zero(dim_);
      for (Eigen::Index i = 0; i < k; ++i) {
        g += resp[i] * (p.centers.row(i).transpose() - x) / p.variance;
      }
      return g;
    }
    case TargetKind::kDw4: {
      const auto& p = dw4_params();
      Vec grad = Vec::Zero(dim_);
      pair_energy(x, p.n_particles, p.spatial, [&](double d) { return dw_pair(p, d); },
                  &grad);
      return -grad;
    }
    case TargetKind::kLennardJones: {
      const auto& p = lj_params();
      Vec grad = Vec::Zero(dim_);
      pair_energy(x, p.n_particles, p.spatial, [&](double d) { return lj_pair(p, d); },
                  &grad);
      grad += p.osc_c * zero_com_project(x, {p.n_particles, p.spatial});
      return -grad;
    }
    case TargetKind::kVmfMixture: {
      const auto& p = vmf_params();
      const auto k = p.mus.rows();
      Vec logs(k);
      for (Eigen::Index i = 0; i < k; ++i) {
        logs[i] = std::log(p.weights[i]) + vmf_log_normalizer(dim_, p.kappas[i]) +
                  p.kappas[i] * p.mus.row(i).dot(x);
      }
      const Vec resp = (logs.array() - log_sum_exp(logs)).exp();
      Vec g = Vec::Zero(dim_);
      for (Eigen::Index i = 0; i < k; ++i) {
        g += resp[i] * p.kappas[i] * p.mus.row(i).transpose();
      }
      return g;
    }
  }
  return Vec::Zero(dim_);
}

Vec clip_score(const Vec& g, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "clip_score: threshold must be > 0");
  }
  const double n = g.norm();
  if (n <= threshold) return g;
  return g * (threshold / n);
}

Vec zero_com_project(const Vec& positions, const ParticleLayout& layout) {
  if (layout.n_particles < 1 ||
      positions.size() != layout.n_particles * layout.spatial) {
    throw Error(ErrorCode::kDimensionMismatch, "zero_com_project: layout mismatch");
  }
  Eigen::Map<const Mat> m(positions.data(), layout.spatial, layout.n_particles);
  const Vec com = m.rowwise().mean();
  Vec out(positions.size());
  Eigen::Map<Mat> o(out.data(), layout.spatial, layout.n_particles);
  o = m.colwise() - com;
  return out;
}

}  // namespace fsamp
