#pragma once

// Fractional Sobolev calculus on band-limited fields over the torus T^m = (ℝ/2πℤ)^m,
// m ∈ {1, 2}, and on sampled restrictions of such fields to sub-boxes of the
// fundamental domain [0, 2π)^m.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mapgroups {

/// Mode weight convention. `Paper` uses (1+‖k‖²)^{s/2}, `Standard` uses (1+‖k‖²)^s.
enum class WeightConvention { Paper, Standard };

std::string convention_tag(WeightConvention c);
WeightConvention convention_from_tag(std::string_view tag);

class SobolevOrder {
 public:
  explicit SobolevOrder(double s);
  double value() const noexcept { return s_; }

 private:
  double s_;
};

double mode_weight(double k_norm_sq, SobolevOrder s,
                   WeightConvention convention = WeightConvention::Paper);

/// Truncated Fourier series Σ_{|k_i| ≤ N} c_k e^{i k·x} with values in ℝⁿ (or ℂⁿ).
///
/// Coefficients are stored component-major, then row-major in k with each axis
/// running from −N to N. A real-flagged field must satisfy c_{−k} = conj(c_k)
/// exactly; use `real_projection` to enforce that on arbitrary input.
class BandlimitedField {
 public:
  BandlimitedField(int m, int modes, int components, std::vector<std::complex<double>> coeffs,
                   bool real = true);

  static BandlimitedField zero(int m, int modes, int components = 1);
  static BandlimitedField constant(int m, int modes, std::span<const double> value);
  /// Symmetrizes arbitrary coefficients to the nearest real field.
  static BandlimitedField real_projection(int m, int modes, int components,
                                          std::vector<std::complex<double>> coeffs);

  int dim() const noexcept { return m_; }
  int modes() const noexcept { return modes_; }
  int components() const noexcept { return components_; }
  bool is_real() const noexcept { return real_; }
  std::size_t modes_per_component() const noexcept { return per_component_; }
  const std::vector<std::complex<double>>& coeffs() const noexcept { return coeffs_; }

  std::size_t flat_index(std::span<const int> k) const;
  std::vector<int> wave_vector(std::size_t flat) const;
  double k_norm_sq(std::size_t flat) const;
  std::complex<double> coeff(int component, std::span<const int> k) const;

  /// Real part of the trigonometric polynomial at x, one entry per component.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> x) const;

  /// Zero-pads or truncates to a new mode cutoff.
  BandlimitedField resized(int modes) const;

  BandlimitedField operator+(const BandlimitedField& other) const;
  BandlimitedField operator-(const BandlimitedField& other) const;
  BandlimitedField operator*(double scale) const;

 private:
  int m_;
  int modes_;
  int components_;
  bool real_;
  std::size_t per_component_;
  std::vector<std::complex<double>> coeffs_;
};

double hs_inner(const BandlimitedField& a, const BandlimitedField& b, SobolevOrder s,
                WeightConvention convention = WeightConvention::Paper);
double hs_norm(const BandlimitedField& a, SobolevOrder s,
               WeightConvention convention = WeightConvention::Paper);

/// Open axis-aligned box.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x) const;
  bool contains_closure_of(const Box& inner) const;
  /// Componentwise distance from x to the box (0 inside).
  double distance(std::span<const double> x) const;
  /// Smallest gap between the boundary of `inner` and the boundary of this box.
  double margin_to(const Box& inner) const;
};

/// Regular periodic grid on [0, 2π)^m (nodes 2π i / n per axis) with the
/// nodes inside an open window box masked in. A full-torus domain masks every node.
class GridDomain {
 public:
  static GridDomain full_torus(int m, std::vector<int> counts);
  static GridDomain full_torus(int m, int count);
  static GridDomain window(Box w, std::vector<int> counts);

  int dim() const noexcept { return static_cast<int>(counts_.size()); }
  bool is_full() const noexcept { return full_; }
  const Box& window_box() const noexcept { return window_; }
  const std::vector<int>& counts() const noexcept { return counts_; }
  double spacing(int axis) const;

  /// Number of masked nodes.
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  /// Per-axis index ranges [first, first + extent) of masked nodes.
  const std::vector<int>& first() const noexcept { return first_; }
  const std::vector<int>& extent() const noexcept { return extent_; }

  std::vector<int> grid_index(std::size_t node) const;
  std::size_t node_from_grid_index(std::span<const int> idx) const;
  std::vector<double> node(std::size_t i) const;
  /// Row-major index of a masked node inside the full grid.
  std::size_t grid_flat(std::size_t node) const;

  /// Membership in the open window (always true on the full torus).
  bool contains(std::span<const double> x) const;
  /// Masked node coinciding with x within `tol`, if any.
  std::optional<std::size_t> node_at(std::span<const double> x, double tol = 1e-9) const;

  bool operator==(const GridDomain& other) const;

 private:
  GridDomain(bool full, Box w, std::vector<int> counts);

  bool full_;
  Box window_;
  std::vector<int> counts_;
  std::vector<int> first_;
  std::vector<int> extent_;
  std::size_t size_ = 0;
};

/// Pointwise evaluator x ↦ value ∈ ℝⁿ.
using PointFunction = std::function<void(std::span<const double>, std::span<double>)>;

enum class Interpolation { Representative, Cubic };
std::string interpolation_tag(Interpolation i);

/// Samples of a vector-valued function at the masked nodes of a GridDomain.
///
/// A field may carry a continuous representative (the band-limited parent, or a
/// closed-form map composed with one); off-node evaluation then uses it exactly.
/// Fields built from bare values interpolate with tensor-product cubic Lagrange
/// stencils instead.
class SampledField {
 public:
  SampledField(GridDomain domain, int components, std::vector<double> values);
  SampledField(GridDomain domain, int components, PointFunction representative);
  /// Values already computed from `representative` at the masked nodes.
  SampledField(GridDomain domain, int components, std::vector<double> values,
               PointFunction representative);

  const GridDomain& domain() const noexcept { return domain_; }
  int components() const noexcept { return components_; }
  std::size_t size() const noexcept { return domain_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> value(std::size_t node) const;

  bool has_representative() const noexcept { return static_cast<bool>(rep_); }
  Interpolation interpolation() const noexcept {
    return rep_ ? Interpolation::Representative : Interpolation::Cubic;
  }

  /// Value at an arbitrary point of the window; throws DomainError outside it.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> x) const;

  /// Copy without the representative (values only).
  SampledField detached() const;

  double max_abs() const;

 private:
  void cubic(std::span<const double> x, std::span<double> out) const;

  GridDomain domain_;
  int components_;
  std::vector<double> values_;
  PointFunction rep_;
};

SampledField sample(const BandlimitedField& a, const GridDomain& grid);
/// Inverse of `sample` on a full-torus grid with at least 2N+1 nodes per axis.
BandlimitedField synthesize(const SampledField& v, int modes);
SampledField restrict_to(const BandlimitedField& a, const GridDomain& u);

/// Weighted minimum-norm interpolation: the band-limited field of least H^s norm
/// whose samples on a fixed domain match the data. Factorizes once per domain.
class ExtensionOperator {
 public:
  ExtensionOperator(const GridDomain& domain, SobolevOrder s, int modes,
                    WeightConvention convention = WeightConvention::Paper);

  BandlimitedField apply(const SampledField& data) const;
  int modes() const noexcept { return modes_; }
  const GridDomain& domain() const noexcept { return domain_; }
  int rank() const noexcept { return rank_; }

 private:
  GridDomain domain_;
  int modes_;
  int m_;
  std::vector<std::vector<int>> half_;  // k = 0 first, then one of each ±k pair
  Eigen::VectorXd scale_;               // parameter = scale · unknown
  Eigen::MatrixXd design_;              // sampling matrix in scaled unknowns
  Eigen::MatrixXd pinv_;
  int rank_ = 0;
};

BandlimitedField min_norm_extension(const SampledField& data, SobolevOrder s, int modes,
                                    WeightConvention convention = WeightConvention::Paper);

/// Smooth cutoff: tensor product of 1-D plateau bumps. Equal to 1 on the plateau
/// box (center ± plateau·radius), positive inside the support box
/// (center ± radius), 0 outside.
class SmoothCutoff {
 public:
  SmoothCutoff(std::vector<double> center, std::vector<double> radius,
               double plateau_fraction = 0.5);
  static SmoothCutoff for_box(const Box& support, double plateau_fraction = 0.5);

  double operator()(std::span<const double> x) const;
  Box support() const;
  Box plateau() const;
  int dim() const noexcept { return static_cast<int>(center_.size()); }

 private:
  std::vector<double> center_;
  std::vector<double> radius_;
  double plateau_;
};

/// C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1.
double smooth_step(double u);

SampledField cutoff_multiply(const SmoothCutoff& h, const SampledField& field);
/// Product sampled on a full grid with 4N+1 nodes per axis and resynthesized at cutoff 2N.
BandlimitedField cutoff_multiply(const SmoothCutoff& h, const BandlimitedField& field);

/// Closed-form diffeomorphism between boxes.
struct Diffeo {
  using PointMap = std::function<std::vector<double>(std::span<const double>)>;
  using JacobianMap = std::function<Eigen::MatrixXd(std::span<const double>)>;

  PointMap forward;
  PointMap inverse;
  JacobianMap jacobian;
  Box domain;
  Box codomain;

  static Diffeo identity(const Box& box);
  static Diffeo translation(std::vector<double> offset, const Box& domain);
  static Diffeo affine(Eigen::MatrixXd linear, Eigen::VectorXd offset, const Box& domain);
  /// this ∘ inner.
  Diffeo compose(const Diffeo& inner) const;
};

/// Max of ‖Θ(Θ⁻¹(y)) − y‖ over samples, and min |det J| (for the nonvanishing check).
struct DiffeoCheck {
  double inverse_residual = 0;
  double min_abs_det = 0;
};
DiffeoCheck check_diffeo(const Diffeo& theta, std::span<const std::vector<double>> points);

SampledField pullback(const Diffeo& theta, const SampledField& field, const GridDomain& target);

/// Closed-form map (x, y) ↦ f(x, y) ∈ ℝ^{out_dim}.
struct PointwiseMap {
  int in_dim;
  int out_dim;
  std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)>
      fn;
};

SampledField nemytskij(const PointwiseMap& f, const SampledField& field);

/// Extends a field on V by zero to a larger window U. The outermost layer of
/// V-nodes must vanish (support compact in V).
SampledField extend_by_zero(const SampledField& field, const GridDomain& larger);
/// Restriction of a sampled field to a sub-window of its grid.
SampledField restrict_to(const SampledField& field, const GridDomain& smaller);

/// Singular values of the inclusion of band-limited H^s into H^t, sorted decreasing.
std::vector<double> rellich_spectrum(SobolevOrder s, SobolevOrder t, int modes, int m = 1,
                                     WeightConvention convention = WeightConvention::Paper);

SampledField linear_combination(double a, const SampledField& x, double b, const SampledField& y);

}  // namespace mapgroups
