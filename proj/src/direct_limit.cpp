#include "mapgroups/direct_limit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

SobolevLadder ladder(double s0, int rungs, int m) {
  if (m != 1 && m != 2) throw InputError("ladder dimension must be 1 or 2");
  if (!(s0 >= 0.5 * m) || !std::isfinite(s0)) throw InputError("ladder limit s0 must be finite and at least m/2");
  if (rungs < 2) throw InputError("ladder needs at least two rungs");
  SobolevLadder l{s0, m, {}};
  for (int j = 1; j <= rungs; ++j) l.rungs.push_back(s0 + 1.0 / j);
  return l;
}

BandlimitedField decay_field(double alpha, int modes, int m) {
  const auto shape = BandlimitedField::zero(m, modes);
  std::vector<std::complex<double>> c(shape.modes_per_component());
  for (std::size_t f = 0; f < c.size(); ++f) c[f] = std::pow(1.0 + shape.k_norm_sq(f), -alpha / 2);
  return BandlimitedField(m, modes, 1, std::move(c));
}

namespace {

double exponent(double alpha, double s, WeightConvention convention) {
  return (convention == WeightConvention::Paper ? s / 2 : s) - alpha;
}

// Σ_{lo < k ≤ hi} 2(1+k²)^e, summed from small k upward.
double block_sum(double e, long lo, long hi) {
  double acc = 0;
  for (long k = lo + 1; k <= hi; ++k) acc += 2.0 * std::pow(1.0 + static_cast<double>(k) * static_cast<double>(k), e);
  return acc;
}

}  // namespace

double decay_partial_norm_sq(double alpha, double s, long modes, WeightConvention convention) {
  return 1.0 + block_sum(exponent(alpha, s, convention), 0, modes);
}

double decay_block_increment(double alpha, double s, long modes, WeightConvention convention) {
  return block_sum(exponent(alpha, s, convention), modes, 2 * modes);
}

std::vector<long> default_cutoffs() {
  std::vector<long> n;
  for (int i = 0; i <= 14; ++i) n.push_back(10L << i);
  return n;
}

double increment_ratio(double alpha, double s, std::span<const long> cutoffs, int window, WeightConvention convention) {
  if (static_cast<int>(cutoffs.size()) < window + 2) throw InputError("need at least window + 2 cutoffs");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1]) throw InputError("cutoffs must increase");
  const double e = exponent(alpha, s, convention);
  std::vector<double> blocks;
  for (std::size_t i = 1; i < cutoffs.size(); ++i) blocks.push_back(block_sum(e, cutoffs[i - 1], cutoffs[i]));
  double log_mean = 0;
  for (int r = 0; r < window; ++r) {
    const std::size_t i = blocks.size() - 1 - r;
    log_mean += std::log(blocks[i] / blocks[i - 1]);
  }
  return std::exp(log_mean / window);
}

CriticalOrderEstimate critical_order_estimate(double alpha, std::span<const long> cutoffs, WeightConvention convention) {
  std::vector<long> n(cutoffs.begin(), cutoffs.end());
  if (n.empty()) n = default_cutoffs();
  CriticalOrderEstimate out;
  out.alpha = alpha;
  out.cutoffs = n;
  out.predicted = convention == WeightConvention::Paper ? 2 * alpha - 1 : alpha - 0.5;
  // Ratio ≥ 1 means the block sums do not shrink: divergence.
  auto diverges = [&](double s) { return increment_ratio(alpha, s, n, 10, convention) >= 1.0; };
  double lo = 0.0;
  if (diverges(lo)) {
    out.contained = false;
    out.estimate = 0.0;
    return out;
  }
  double hi = 1.0;
  while (!diverges(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) throw NumericError("no divergence found for the decay field");
  }
  while (hi - lo > 0.01) {
    const double mid = 0.5 * (lo + hi);
    (diverges(mid) ? hi : lo) = mid;
    ++out.bisection_steps;
  }
  out.estimate = 0.5 * (lo + hi);
  return out;
}

RungProbe rung_compactness_probe(const SobolevLadder& l, int j, int modes, WeightConvention convention,
                                 double threshold) {
  const int rungs = static_cast<int>(l.rungs.size());
  if (j < 1 || j >= rungs)
    throw InputError("rung index " + std::to_string(j) + " out of range 1.." + std::to_string(rungs - 1));
  RungProbe r;
  r.rung = j;
  r.s = l.rungs[j - 1];
  r.t = l.rungs[j];
  r.modes = modes;
  r.threshold = threshold;
  r.spectrum = rellich_spectrum(SobolevOrder(r.s), SobolevOrder(r.t), modes, l.m, convention);
  r.sigma0 = r.spectrum.front();
  r.sigma_min = r.spectrum.back();
  std::vector<double> distinct;
  for (double v : r.spectrum)
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
  r.strictly_decreasing = std::adjacent_find(distinct.begin(), distinct.end(), std::less_equal<>()) == distinct.end();
  for (std::size_t i = 0; i < r.spectrum.size(); ++i)
    if (r.spectrum[i] < threshold) {
      r.first_below = static_cast<long>(i);
      break;
    }
  // σ(k) = (1+k²)^{−(s−t)/4} (paper weight) or ^{−(s−t)/2} (standard).
  const double p = (convention == WeightConvention::Paper ? 4.0 : 2.0) / (r.s - r.t);
  r.crossing_k = std::sqrt(std::max(0.0, std::pow(threshold, -p) - 1.0));
  return r;
}

void TimeSampledCurve::validate() const {
  if (times.empty() || times.size() != sections.size()) throw InputError("curve needs one section per time");
  if (times.size() == 1) {
    if (times.front() != 0.0) throw InputError("single-sample curve must sit at t = 0");
  } else {
    const double h = 1.0 / static_cast<double>(times.size() - 1);
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - i * h) > 1e-12) throw InputError("curve time grid must be uniform on [0, 1]");
  }
  for (const auto& s : sections) {
    if (s.atlas().fingerprint() != sections.front().atlas().fingerprint())
      throw InputError("curve sections live on different atlases");
    if (s.components() != sections.front().components())
      throw InputError("curve sections have different component counts");
  }
}

TimeSampledCurve constant_curve(const Section& xi, int intervals) {
  TimeSampledCurve c;
  for (int i = 0; i <= intervals; ++i) {
    c.times.push_back(static_cast<double>(i) / intervals);
    c.sections.push_back(xi);
  }
  return c;
}

namespace {

// Algebra coordinates of the curve at time t and node (j, k).
void curve_at(const TimeSampledCurve& c, std::size_t j, std::size_t k, double t, std::span<double> out) {
  const std::size_t n = c.times.size();
  if (n == 1) {
    const auto v = c.sections[0].piece(j).value(k);
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  const double u = t * static_cast<double>(n - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), n - 2);
  const double w = u - static_cast<double>(i);
  const auto a = c.sections[i].piece(j).value(k);
  const auto b = c.sections[i + 1].piece(j).value(k);
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = (1 - w) * a[q] + w * b[q];
}

// RK4 for Ẏ = Y·A(t) on [0, 1] from the identity.
template <typename Gen>
Eigen::MatrixXd rk4(Gen&& generator, Eigen::Index dim, int steps) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Identity(dim, dim);
  const double h = 1.0 / steps;
  for (int n = 0; n < steps; ++n) {
    const double t = n * h;
    const Eigen::MatrixXd a0 = generator(t), am = generator(t + h / 2), a1 = generator(t + h);
    const Eigen::MatrixXd k1 = y * a0;
    const Eigen::MatrixXd k2 = (y + (h / 2) * k1) * am;
    const Eigen::MatrixXd k3 = (y + (h / 2) * k2) * am;
    const Eigen::MatrixXd k4 = (y + h * k3) * a1;
    y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  if (!y.allFinite()) throw NumericError("evolution produced non-finite values");
  return y;
}

void check_inputs(const TimeSampledCurve& curve, const MatrixGroup& group, int steps) {
  curve.validate();
  if (curve.sections.front().components() != group.algebra_dim())
    throw InputError("curve components do not match the algebra of " + group.name());
  if (steps < 1 || steps < static_cast<int>(curve.times.size()) - 1)
    throw InputError("steps must be at least the number of time intervals");
}

}  // namespace

NodeMatrices evolve_raw(const TimeSampledCurve& curve, const MatrixGroup& group, int steps) {
  check_inputs(curve, group, steps);
  const Section& shape = curve.sections.front();
  const int n = group.algebra_dim();
  NodeMatrices out(shape.pieces().size());
  std::vector<double> v(n);
  for (std::size_t j = 0; j < shape.pieces().size(); ++j)
    for (std::size_t k = 0; k < shape.piece(j).size(); ++k)
      out[j].push_back(rk4(
          [&](double t) {
            curve_at(curve, j, k, t, v);
            return group.hat(v);
          },
          group.matrix_dim(), steps));
  return out;
}

GroupSection evolve(const TimeSampledCurve& curve, std::shared_ptr<const MatrixGroup> group, int steps,
                    double threshold) {
  auto raw = evolve_raw(curve, *group, steps);
  std::vector<std::string> lines;
  for (std::size_t j = 0; j < raw.size(); ++j)
    for (std::size_t k = 0; k < raw[j].size(); ++k) {
      const double r = group->relation_defect(raw[j][k]);
      if (r > threshold) {
        raw[j][k] = group->project(raw[j][k]);
        std::ostringstream os;
        os << "chart " << j << " node " << k << ": relation defect " << r << " re-projected";
        lines.push_back(os.str());
      }
    }
  const Section& shape = curve.sections.front();
  GroupSection out(shape.atlas_ptr(), std::move(group), std::move(raw), shape.tolerance());
  out.append_log(std::move(lines));
  return out;
}

NodeMatrices evolve_derivative(const TimeSampledCurve& curve, const TimeSampledCurve& direction,
                               const MatrixGroup& group, int steps) {
  check_inputs(curve, group, steps);
  check_inputs(direction, group, steps);
  if (direction.times.size() != curve.times.size()) throw InputError("direction must share the curve's time grid");
  const Section& shape = curve.sections.front();
  const int n = group.algebra_dim();
  const Eigen::Index d = group.matrix_dim();
  NodeMatrices out(shape.pieces().size());
  std::vector<double> v(n), w(n);
  for (std::size_t j = 0; j < shape.pieces().size(); ++j)
    for (std::size_t k = 0; k < shape.piece(j).size(); ++k) {
      const Eigen::MatrixXd y = rk4(
          [&](double t) {
            curve_at(curve, j, k, t, v);
            curve_at(direction, j, k, t, w);
            Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * d, 2 * d);
            const Eigen::MatrixXd a = group.hat(v);
            block.topLeftCorner(d, d) = a;
            block.bottomRightCorner(d, d) = a;
            block.topRightCorner(d, d) = group.hat(w);
            return block;
          },
          2 * d, steps);
      out[j].push_back(y.topRightCorner(d, d));
    }
  return out;
}

namespace {

TimeSampledCurve shifted(const TimeSampledCurve& c, const TimeSampledCurve& dir, double eps) {
  TimeSampledCurve out;
  out.times = c.times;
  for (std::size_t i = 0; i < c.sections.size(); ++i)
    out.sections.push_back(linear_combination(1.0, c.sections[i], eps, dir.sections[i]));
  return out;
}

}  // namespace

SlopeProbe evolution_smoothness_probe(const TimeSampledCurve& curve, const TimeSampledCurve& direction,
                                      const MatrixGroup& group, int steps, std::span<const double> eps) {
  const NodeMatrices exact = evolve_derivative(curve, direction, group, steps);
  SlopeProbe probe;
  for (double e : eps) {
    const auto plus = evolve_raw(shifted(curve, direction, e), group, steps);
    const auto minus = evolve_raw(shifted(curve, direction, -e), group, steps);
    double worst = 0;
    for (std::size_t j = 0; j < exact.size(); ++j)
      for (std::size_t k = 0; k < exact[j].size(); ++k)
        worst = std::max(worst, ((plus[j][k] - minus[j][k]) / (2 * e) - exact[j][k]).cwiseAbs().maxCoeff());
    probe.eps.push_back(e);
    probe.errors.push_back(worst);
  }
  probe.slope = loglog_slope(probe.eps, probe.errors);
  return probe;
}

double max_difference(const NodeMatrices& a, const NodeMatrices& b) {
  if (a.size() != b.size()) throw InputError("node matrix arrays differ in chart count");
  double worst = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].size() != b[j].size()) throw InputError("node matrix arrays differ in node count");
    for (std::size_t k = 0; k < a[j].size(); ++k) worst = std::max(worst, (a[j][k] - b[j][k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

NodeMatrices node_matrices(const GroupSection& g) { return g.values(); }

}  // namespace mapgroups
