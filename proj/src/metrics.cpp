#include "fsamp/metrics.hpp"

#include "fsamp/error.hpp"

#include <algorithm>
#include <cmath>

namespace fsamp {

namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw Error(ErrorCode::kEmptyInput, std::string(what) + ": empty input");
}

int bin_index(double x, Range1d r, int bins) {
  if (!(x >= r.lo && x <= r.hi)) return -1;
  const int k = static_cast<int>(std::floor((x - r.lo) / (r.hi - r.lo) * bins));
  return std::min(k, bins - 1);
}

void check_hist_args(int bins, Range1d r) {
  if (bins < 2) throw Error(ErrorCode::kInvalidArgument, "histogram: bins must be >= 2");
  if (!(r.hi > r.lo)) throw Error(ErrorCode::kInvalidArgument, "histogram: empty range");
}

Vec normalize_hist(Vec h) {
  h.array() += kHistSmoothing;
  return h / h.sum();
}

double kl(const Vec& p, const Vec& q) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) acc += p[i] * std::log(p[i] / q[i]);
  return acc;
}

Mat as_points(const Vec& x, const ParticleLayout& layout) {
  Mat p(layout.n_particles, layout.spatial);
  for (int i = 0; i < layout.n_particles; ++i) {
    p.row(i) = x.segment(i * layout.spatial, layout.spatial).transpose();
  }
  p.rowwise() -= p.colwise().mean();
  return p;
}

// Starts are built from the principal frames of both clouds, so rotating or
// relabelling either input permutes the start set without changing it.
// Frame sign and ordering ambiguities are absorbed by the finite groups:
// dihedral of order 32 in 2-D, signed permutations in 3-D.
std::vector<Mat> rotation_starts(const Mat& x, const Mat& y) {
  const int d = static_cast<int>(x.cols());
  Eigen::SelfAdjointEigenSolver<Mat> ex(x.transpose() * x), ey(y.transpose() * y);
  const Mat fx = ex.eigenvectors(), fy = ey.eigenvectors();
  std::vector<Mat> group;
  if (d == 2) {
    for (int k = 0; k < 16; ++k) {
      const double a = k * M_PI / 8;
      Mat r(2, 2);
      r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      group.push_back(r);
      group.push_back(r * Vec(Eigen::Vector2d(1.0, -1.0)).asDiagonal());
    }
  } else {
    int perm[3] = {0, 1, 2};
    do {
      for (int mask = 0; mask < 8; ++mask) {
        Mat r = Mat::Zero(3, 3);
        for (int k = 0; k < 3; ++k) r(k, perm[k]) = (mask >> k) & 1 ? -1.0 : 1.0;
        group.push_back(r);
      }
    } while (std::next_permutation(perm, perm + 3));
  }
  std::vector<Mat> starts;
  for (const Mat& g : group) {
    const Mat r = fx * g * fy.transpose();
    if (r.determinant() > 0) starts.push_back(r);
  }
  return starts;
}

}  // namespace

double w2_1d(std::vector<double> a, std::vector<double> b) {
  require_nonempty(a.size(), "w2_1d");
  require_nonempty(b.size(), "w2_1d");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  double u = 0.0, acc = 0.0;
  while (i < n && j < m) {
    // Next breakpoint of either quantile function, compared exactly.
    const bool a_first = (i + 1) * m <= (j + 1) * n;
    const bool b_first = (j + 1) * n <= (i + 1) * m;
    const double next = a_first ? static_cast<double>(i + 1) / n : static_cast<double>(j + 1) / m;
    const double diff = a[i] - b[j];
    acc += (next - u) * diff * diff;
    u = next;
    if (a_first) ++i;
    if (b_first) ++j;
  }
  return std::sqrt(acc);
}

double energy_w2(const TargetDensity& target, const Mat& gen, const Mat& ref) {
  if (gen.cols() != target.dim() || ref.cols() != target.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "energy_w2: sample dimension does not match target");
  }
  std::vector<double> eg(gen.rows()), er(ref.rows());
  for (Eigen::Index i = 0; i < gen.rows(); ++i) eg[i] = target.energy(gen.row(i).transpose());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) er[i] = target.energy(ref.row(i).transpose());
  return w2_1d(std::move(eg), std::move(er));
}

double euclidean_distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

double w2_assignment(const Mat& a, const Mat& b, const PairDistance& dist) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::kDimensionMismatch, "w2_assignment: set sizes differ");
  if (a.cols() != b.cols()) throw Error(ErrorCode::kDimensionMismatch, "w2_assignment: dimensions differ");
  if (a.rows() > kMaxAssignmentSize) {
    throw Error(ErrorCode::kInvalidArgument, "w2_assignment: more than 1024 samples");
  }
  require_nonempty(static_cast<std::size_t>(a.rows()), "w2_assignment");
  const Eigen::Index n = a.rows();
  Mat cost(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = dist(a.row(i).transpose(), b.row(j).transpose());
      cost(i, j) = d * d;
    }
  }
  const auto col = solve_assignment(cost);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += cost(i, col[i]);
  return std::sqrt(acc / n);
}

Mat kabsch_rotation(const Mat& p, const Mat& q) {
  const Mat h = q.transpose() * p;
  Eigen::JacobiSVD<Mat> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat& u = svd.matrixU();
  const Mat& v = svd.matrixV();
  Vec s = Vec::Ones(h.rows());
  if ((v * u.transpose()).determinant() < 0) s[h.rows() - 1] = -1.0;
  return v * s.asDiagonal() * u.transpose();
}

double aligned_distance(const Vec& x, const Vec& y, const ParticleLayout& layout) {
  if (layout.spatial != 2 && layout.spatial != 3) {
    throw Error(ErrorCode::kInvalidArgument, "aligned_distance: spatial dimension must be 2 or 3");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(layout.n_particles) * layout.spatial;
  if (x.size() != dim || y.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch, "aligned_distance: state size does not match layout");
  }
  const Mat px = as_points(x, layout);
  const Mat py = as_points(y, layout);
  const int n = layout.n_particles;
  double best = std::numeric_limits<double>::infinity();
  // Each start runs the permutation-then-rotation search, then alternates the
  // two steps while the residual decreases.
  for (const Mat& r0 : rotation_starts(px, py)) {
    Mat r = r0;
    double local = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50; ++it) {
      const Mat yr = py * r.transpose();
      Mat cost(n, n);
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) cost(i, k) = (px.row(i) - yr.row(k)).squaredNorm();
      }
      const auto col = solve_assignment(cost);
      Mat yp(n, layout.spatial);
      for (int i = 0; i < n; ++i) yp.row(i) = py.row(col[i]);
      r = kabsch_rotation(px, yp);
      const double val = (px - yp * r.transpose()).squaredNorm();
      if (!(val < local - 1e-14)) {
        local = std::min(local, val);
        break;
      }
      local = val;
    }
    best = std::min(best, local);
  }
  return std::sqrt(std::max(best, 0.0));
}

double kl_1d_hist(const std::vector<double>& a, const std::vector<double>& b, int bins,
                  Range1d range) {
  check_hist_args(bins, range);
  Vec ha = Vec::Zero(bins), hb = Vec::Zero(bins);
  for (double v : a) {
    if (int k = bin_index(v, range, bins); k >= 0) ha[k] += 1.0;
  }
  for (double v : b) {
    if (int k = bin_index(v, range, bins); k >= 0) hb[k] += 1.0;
  }
  if (ha.sum() == 0.0 || hb.sum() == 0.0) {
    throw Error(ErrorCode::kEmptyInput, "kl_1d_hist: no samples inside the range");
  }
  return kl(normalize_hist(ha), normalize_hist(hb));
}

double jsd_2d_hist(const Mat& a, const Mat& b, int bins, Range1d rx, Range1d ry) {
  check_hist_args(bins, rx);
  check_hist_args(bins, ry);
  if (a.cols() != 2 || b.cols() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "jsd_2d_hist: samples must have two columns");
  }
  auto fill = [&](const Mat& s) {
    Vec h = Vec::Zero(static_cast<Eigen::Index>(bins) * bins);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const int kx = bin_index(s(i, 0), rx, bins);
      const int ky = bin_index(s(i, 1), ry, bins);
      if (kx >= 0 && ky >= 0) h[static_cast<Eigen::Index>(kx) * bins + ky] += 1.0;
    }
    if (h.sum() == 0.0) throw Error(ErrorCode::kEmptyInput, "jsd_2d_hist: no samples inside the range");
    return normalize_hist(h);
  };
  const Vec p = fill(a), q = fill(b);
  const Vec m = 0.5 * (p + q);
  // Summed termwise in a fixed order so that swapping a and b is exact.
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += 0.5 * (p[i] * std::log(p[i] / m[i]) + q[i] * std::log(q[i] / m[i]));
  }
  return std::clamp(acc, 0.0, std::log(2.0));
}

Vec sphere_mode_weights(const Mat& samples, const Mat& centers) {
  if (centers.rows() == 0) throw Error(ErrorCode::kEmptyInput, "sphere_mode_weights: no centers");
  if (samples.rows() > 0 && samples.cols() != centers.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "sphere_mode_weights: dimensions differ");
  }
  Vec w = Vec::Zero(centers.rows());
  if (samples.rows() == 0) return w;
  const Mat dots = samples * centers.transpose();
  for (Eigen::Index i = 0; i < dots.rows(); ++i) {
    Eigen::Index k;
    dots.row(i).maxCoeff(&k);
    w[k] += 1.0;
  }
  return w / static_cast<double>(samples.rows());
}

Mat sphere_mode_means(const Mat& samples, const Mat& centers) {
  if (centers.rows() == 0) throw Error(ErrorCode::kEmptyInput, "sphere_mode_means: no centers");
  Mat means = Mat::Zero(centers.rows(), centers.cols());
  if (samples.rows() == 0) return means;
  const Mat dots = samples * centers.transpose();
  for (Eigen::Index i = 0; i < dots.rows(); ++i) {
    Eigen::Index k;
    dots.row(i).maxCoeff(&k);
    means.row(k) += samples.row(i);
  }
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    const double nrm = means.row(k).norm();
    if (nrm > 0) means.row(k) /= nrm;
  }
  return means;
}

Vec nearest_center_shares(const Mat& samples, const Mat& centers) {
  if (centers.rows() == 0) throw Error(ErrorCode::kEmptyInput, "nearest_center_shares: no centers");
  Vec w = Vec::Zero(centers.rows());
  if (samples.rows() == 0) return w;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    Eigen::Index k;
    (centers.rowwise() - samples.row(i)).rowwise().squaredNorm().minCoeff(&k);
    w[k] += 1.0;
  }
  return w / static_cast<double>(samples.rows());
}

}  // namespace fsamp
