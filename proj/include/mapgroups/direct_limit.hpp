#pragma once

// Finite surrogates for the union of Sobolev mapping groups over a decreasing
// exponent ladder: strict-inclusion witnesses, per-rung compactness and the
// evolution map of the left logarithmic derivative equation η' = η·γ.

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mapgroups/lie_group.hpp"
#include "mapgroups/probes.hpp"
#include "mapgroups/section.hpp"
#include "mapgroups/sobolev.hpp"

namespace mapgroups {

struct SobolevLadder {
  double s0 = 0;
  int m = 1;
  std::vector<double> rungs;  // s_1 > s_2 > … > s_J > s0
};

/// Rungs s_j = s0 + 1/j, j = 1..J. Requires s0 ≥ m/2 and J ≥ 2.
SobolevLadder ladder(double s0, int rungs, int m = 1);

/// Real field with c_k = (1+‖k‖²)^{−α/2}.
BandlimitedField decay_field(double alpha, int modes, int m = 1);

/// Σ_{|k| ≤ N} w_s(k)·(1+k²)^{−α} on T¹, accumulated from k = 0 upward.
double decay_partial_norm_sq(double alpha, double s, long modes,
                             WeightConvention convention = WeightConvention::Paper);

/// S(2N) − S(N) for the partial sums above.
double decay_block_increment(double alpha, double s, long modes,
                             WeightConvention convention = WeightConvention::Paper);

struct CriticalOrderEstimate {
  double alpha = 0;
  double estimate = 0;   // boundary between bounded and divergent partial norms
  double predicted = 0;  // integral-test value (2α − 1 for the paper weight)
  bool contained = true; // false if the field lies in no H^s with s ≥ 0
  int bisection_steps = 0;
  std::vector<long> cutoffs;
};

/// Geometric mean of the last `window` block-increment ratios along the cutoffs.
double increment_ratio(double alpha, double s, std::span<const long> cutoffs, int window = 10,
                       WeightConvention convention = WeightConvention::Paper);

/// Locates the divergence boundary by bisection in s (step 0.01) using the ratio test.
CriticalOrderEstimate critical_order_estimate(double alpha, std::span<const long> cutoffs = {},
                                              WeightConvention convention = WeightConvention::Paper);
/// Default cutoffs 10·2^i, i = 0..14.
std::vector<long> default_cutoffs();

struct RungProbe {
  int rung = 0;
  double s = 0;
  double t = 0;
  int modes = 0;
  std::vector<double> spectrum;
  bool strictly_decreasing = false;  // over distinct ‖k‖
  double sigma0 = 0;
  double sigma_min = 0;
  long first_below = -1;             // first sorted index with σ < threshold, −1 if none
  double threshold = 1e-3;
  double crossing_k = 0;             // ‖k‖ at which the closed form reaches the threshold
};

/// Rellich spectrum of the inclusion H^{s_j} → H^{s_{j+1}} (1-based j < J).
RungProbe rung_compactness_probe(const SobolevLadder& l, int j, int modes,
                                 WeightConvention convention = WeightConvention::Paper, double threshold = 1e-3);

/// Algebra-valued sections on a uniform time grid of [0, 1].
struct TimeSampledCurve {
  std::vector<double> times;
  std::vector<Section> sections;

  /// Throws InputError unless the grid is uniform on [0, 1] and the sections agree in shape.
  void validate() const;
};

TimeSampledCurve constant_curve(const Section& xi, int intervals = 1);

using NodeMatrices = std::vector<std::vector<Eigen::MatrixXd>>;

/// Classical RK4 per node with γ linearly interpolated in time. No projection.
NodeMatrices evolve_raw(const TimeSampledCurve& curve, const MatrixGroup& group, int steps);

/// η(1), re-projected onto the group where drift exceeds the threshold (logged).
GroupSection evolve(const TimeSampledCurve& curve, std::shared_ptr<const MatrixGroup> group, int steps,
                    double threshold = kProjectionThreshold);

/// Directional derivative of γ ↦ η(1) along δ for the discrete RK4 map, from the
/// block system Ẏ = Y·[[γ, δ], [0, γ]].
NodeMatrices evolve_derivative(const TimeSampledCurve& curve, const TimeSampledCurve& direction,
                               const MatrixGroup& group, int steps);

/// Central differences of evolve_raw along δ against evolve_derivative.
SlopeProbe evolution_smoothness_probe(const TimeSampledCurve& curve, const TimeSampledCurve& direction,
                                      const MatrixGroup& group, int steps, std::span<const double> eps);

double max_difference(const NodeMatrices& a, const NodeMatrices& b);
NodeMatrices node_matrices(const GroupSection& g);

}  // namespace mapgroups
