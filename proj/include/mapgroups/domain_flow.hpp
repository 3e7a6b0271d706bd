#pragma once

// Planar domains {g < 0} with smooth boundary, the inward normal flow and
// sample-based certificates that the flowed domain sits compactly inside.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mapgroups/sobolev.hpp"

namespace mapgroups {

using Point2 = std::array<double, 2>;

class LevelSetDomain {
 public:
  using Scalar = std::function<double(const Point2&)>;
  using Gradient = std::function<Point2(const Point2&)>;

  /// Throws InputError unless g > 0 along the bounding box edge.
  LevelSetDomain(std::string name, std::map<std::string, double> params, Scalar g, Gradient grad, Box bbox,
                 std::vector<Point2> k_points, double scale = 1.0);

  /// "disc" (radius), "ellipse" (a, b), "peanut" (Cassini oval: d, a with d < a < √2·d).
  static LevelSetDomain named(const std::string& name, const std::map<std::string, double>& params = {},
                              double scale = 1.0);
  /// Same set with g multiplied by a positive factor.
  LevelSetDomain scaled(double factor) const;

  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  double scale() const noexcept { return scale_; }
  const Box& bbox() const noexcept { return bbox_; }
  /// Interior points the flow must leave fixed.
  const std::vector<Point2>& k_points() const noexcept { return k_points_; }

  double g(const Point2& y) const { return scale_ * g_(y); }
  Point2 grad(const Point2& y) const;
  /// Smallest g over a dense sample of the bounding box edge.
  double edge_min() const;

 private:
  std::string name_;
  std::map<std::string, double> params_;
  Scalar g_;
  Gradient grad_;
  Box bbox_;
  std::vector<Point2> k_points_;
  double scale_;
};

inline constexpr double kBoundaryBand = 1e-6;

/// ν(y) = −∇g/‖∇g‖. DomainError off the boundary band, SingularBoundaryError if ∇g ≈ 0.
Point2 inner_normal(const LevelSetDomain& d, const Point2& y);

/// F = −ξ(g)·∇g / max(‖∇g‖, 1e−12) with ξ = 1 for |g| ≤ plateau·band and 0 for |g| ≥ band.
class FlowField {
 public:
  /// InputError unless 0 < plateau < 1 and g ≥ band on the bounding box edge.
  explicit FlowField(LevelSetDomain domain, double band = 0.5, double plateau = 0.5);

  Point2 operator()(const Point2& y) const;
  double cutoff(double g) const;
  double band() const noexcept { return band_; }
  double plateau() const noexcept { return plateau_; }
  /// F vanishes outside this box.
  const Box& support() const noexcept { return domain_.bbox(); }
  const LevelSetDomain& domain() const noexcept { return domain_; }

 private:
  LevelSetDomain domain_;
  double band_;
  double plateau_;
};

/// RK4 for x' = F(x) from y over time t (negative t runs backward). Requires steps ≥ 16.
Point2 flow(const FlowField& f, const Point2& y, double t, int steps);

/// Rejection samples near {g = 0} polished by Newton steps along ∇g to |g| < 1e−12.
std::vector<Point2> boundary_samples(const LevelSetDomain& d, int count, std::uint64_t seed);

struct SampleOffender {
  std::size_t index = 0;
  Point2 start{};
  Point2 end{};
  double g_end = 0;
};

struct ShrinkCertificate {
  std::string domain;
  double t0 = 0;
  int steps = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  /// min over samples of −sign(t0)·g(Fl_{t0}(y)); positive certifies strict containment.
  double margin = 0;
  std::vector<SampleOffender> worst;  // up to five, smallest margin first
  double k_displacement = 0;          // max ‖Fl_{t0}(k) − k‖ over K-points
  bool k_fixed = false;
  bool passed = false;
};

/// Flows a boundary sample by t0 ≠ 0 (InputError for t0 = 0) and records the margin.
ShrinkCertificate shrink_domain(const FlowField& f, double t0, int samples, std::uint64_t seed, int steps = 256);

/// Central difference of t ↦ g(Fl_t(y)) at t = 0.
double descent_slope(const FlowField& f, const Point2& y, double tau = 1e-4, int steps = 16);

struct DescentEntry {
  Point2 point{};
  double slope = 0;
  double expected = 0;  // −‖∇g(y)‖
};

struct DescentReport {
  std::vector<DescentEntry> entries;
  double max_deviation = 0;
  bool all_negative = true;
  bool passed(double tol = 1e-4) const { return all_negative && max_deviation <= tol; }
};

DescentReport monotone_descent_check(const FlowField& f, const std::vector<Point2>& samples, double tau = 1e-4);

}  // namespace mapgroups
