#include "fsamp/oracles.hpp"

#include "fsamp/error.hpp"

#include <cmath>
#include <vector>

namespace fsamp {

namespace {

double beta_sample(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  return x / (x + y);
}

// One vMF draw about mu; mu must be unit-norm.
Vec vmf_draw(Rng& rng, const Vec& mu, double kappa) {
  const int p = static_cast<int>(mu.size());
  const double pm1 = p - 1.0;
  const double b = pm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + pm1 * pm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + pm1 * std::log(1.0 - x0 * x0);
  double w = 0.0;
  while (true) {
    const double z = beta_sample(rng, 0.5 * pm1, 0.5 * pm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = uniform01(rng);
    if (kappa * w + pm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }
  Vec v = standard_normal(rng, p);
  v -= v.dot(mu) * mu;
  v.normalize();
  Vec x = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
  return x / x.norm();
}

int pick_component(Rng& rng, const Vec& weights) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;
}

}  // namespace

Vec uniform_sphere_point(Rng& rng, int ambient_dim) {
  Vec z = standard_normal(rng, ambient_dim);
  double n = z.norm();
  while (n < 1e-12) {
    z = standard_normal(rng, ambient_dim);
    n = z.norm();
  }
  return z / n;
}

LangevinResult langevin_reference(const TargetDensity& target,
                                  const LangevinConfig& cfg) {
  if (target.manifold().has_value()) {
    throw Error(ErrorCode::kInvalidArgument,
                "langevin_reference: target must be Euclidean");
  }
  if (cfg.step_size < 0.0 || cfg.n_samples < 0 || cfg.n_steps < 0) {
    throw Error(ErrorCode::kInvalidArgument, "langevin_reference: invalid config");
  }
  const int burn_in = cfg.n_steps / 2;
  const int post = cfg.n_steps - burn_in;
  const int thin = cfg.thin > 0 ? cfg.thin : std::max(1, post);
  const int per_chain = std::max(1, post / thin);
  const int n_chains = (cfg.n_samples + per_chain - 1) / per_chain;
  const int dim = target.dim();
  const auto layout = target.particles();
  const double noise = std::sqrt(2.0 * cfg.step_size);

  std::vector<Vec> out;
  out.reserve(cfg.n_samples);
  LangevinResult result;
  for (int chain = 0; chain < n_chains; ++chain) {
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(chain));
    Vec x = cfg.init_std * standard_normal(rng, dim);
    std::vector<Vec> emitted;
    bool ok = true;
    for (int step = 1; step <= cfg.n_steps && ok; ++step) {
      if (cfg.step_size > 0.0) {
        x += cfg.step_size * target.score_uncounted(x) + noise * standard_normal(rng, dim);
        if (!x.allFinite()) ok = false;
      }
      if (ok && step > burn_in && (step - burn_in) % thin == 0 &&
          static_cast<int>(emitted.size()) < per_chain) {
        emitted.push_back(x);
      }
    }
    if (cfg.n_steps == 0) emitted.push_back(x);
    if (!ok) {
      ++result.diverged_chains;
      continue;
    }
    for (auto& e : emitted) {
      if (static_cast<int>(out.size()) >= cfg.n_samples) break;
      out.push_back(layout ? zero_com_project(e, *layout) : e);
    }
  }
  result.samples.resize(static_cast<Eigen::Index>(out.size()), dim);
  for (std::size_t i = 0; i < out.size(); ++i) {
    result.samples.row(static_cast<Eigen::Index>(i)) = out[i].transpose();
  }
  return result;
}

Mat vmf_sample_oracle(const Vec& mu, double kappa, int n, std::uint64_t seed) {
  if (std::abs(mu.norm() - 1.0) > 1e-9 || kappa < 0.0 || n < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "vmf_sample_oracle: mu must be unit-norm and kappa >= 0");
  }
  Rng rng = make_rng(seed, 0);
  Mat out(n, mu.size());
  for (int i = 0; i < n; ++i) out.row(i) = vmf_draw(rng, mu, kappa).transpose();
  return out;
}

Mat exact_mixture_samples(const TargetDensity& target, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  Mat out(n, target.dim());
  switch (target.kind()) {
    case TargetKind::kGmm: {
      const auto& p = target.gmm_params();
      const double sd = std::sqrt(p.variance);
      for (int i = 0; i < n; ++i) {
        const int k = pick_component(rng, p.weights);
        out.row(i) = p.centers.row(k) + sd * standard_normal(rng, target.dim()).transpose();
      }
      return out;
    }
    case TargetKind::kVmfMixture: {
      const auto& p = target.vmf_params();
      for (int i = 0; i < n; ++i) {
        const int k = pick_component(rng, p.weights);
        out.row(i) = vmf_draw(rng, p.mus.row(k).transpose(), p.kappas[k]).transpose();
      }
      return out;
    }
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "exact_mixture_samples: no exact sampler for " + to_string(target.kind()));
  }
}

}  // namespace fsamp
