#pragma once

#include "fsamp/geometry.hpp"
#include "fsamp/targets.hpp"

#include <functional>
#include <vector>

namespace fsamp {

// Sample sets are matrices with one sample per row.

// Exact 1-D W2 by quantile coupling. Unequal sizes integrate the squared
// difference of the two empirical quantile functions over the merged breakpoints.
double w2_1d(std::vector<double> a, std::vector<double> b);

// w2_1d over the energies of both sets.
double energy_w2(const TargetDensity& target, const Mat& gen, const Mat& ref);

inline constexpr int kMaxAssignmentSize = 1024;

// Minimum-cost perfect matching on a square cost matrix; returns col[row].
std::vector<int> solve_assignment(const Mat& cost);

using PairDistance = std::function<double(const Vec&, const Vec&)>;

double euclidean_distance(const Vec& a, const Vec& b);

// sqrt(min over permutations of the mean squared pair distance).
double w2_assignment(const Mat& a, const Mat& b, const PairDistance& dist = euclidean_distance);

// Distance between two particle configurations after removing the centre of
// mass, matching particles by assignment and then the best proper rotation.
double aligned_distance(const Vec& x, const Vec& y, const ParticleLayout& layout);

// Best proper rotation R minimizing sum |p_i - R q_i|^2 (rows are points).
Mat kabsch_rotation(const Mat& p, const Mat& q);

inline constexpr double kHistSmoothing = 1e-10;

struct Range1d {
  double lo = 0.0;
  double hi = 1.0;
};

double kl_1d_hist(const std::vector<double>& a, const std::vector<double>& b, int bins,
                  Range1d range);
// a, b are n x 2.
double jsd_2d_hist(const Mat& a, const Mat& b, int bins, Range1d rx, Range1d ry);

// Fraction of samples whose nearest center (max mu^T x) is k.
Vec sphere_mode_weights(const Mat& samples, const Mat& centers);

// Per-mode normalized mean direction; zero rows for empty modes.
Mat sphere_mode_means(const Mat& samples, const Mat& centers);

// Fraction of samples whose nearest center (Euclidean) is k.
Vec nearest_center_shares(const Mat& samples, const Mat& centers);

}  // namespace fsamp
