#pragma once

// Vector-valued functions on a compact manifold, stored as compatible chart pieces
// sampled on the witness windows of an atlas.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mapgroups/atlas.hpp"
#include "mapgroups/probes.hpp"
#include "mapgroups/sobolev.hpp"

namespace mapgroups {

inline constexpr double kDefaultCompatibilityTol = 1e-9;

struct CompatibilityReport {
  double defect = 0;
  std::vector<double> point;  // manifold point of the worst overlap sample
  std::size_t chart_i = 0;
  std::size_t chart_j = 0;
};

/// max over overlap witness nodes y of chart j of ‖γ_i(Θ_ij y) − γ_j(y)‖.
CompatibilityReport compatibility_report(std::span<const SampledField> pieces, const Atlas& atlas);
double compatibility_defect(std::span<const SampledField> pieces, const Atlas& atlas);

class Section {
 public:
  /// Throws IncompatibilityError if the pieces disagree on overlaps by more than `tol`.
  Section(std::shared_ptr<const Atlas> atlas, std::vector<SampledField> pieces,
          double tol = kDefaultCompatibilityTol);

  /// Pieces f∘φ_j⁻¹ of a closed-form function f on the manifold.
  static Section from_function(std::shared_ptr<const Atlas> atlas, int components, PointFunction f,
                               double tol = kDefaultCompatibilityTol);
  static Section constant(std::shared_ptr<const Atlas> atlas, std::span<const double> value);
  static Section zero(std::shared_ptr<const Atlas> atlas, int components);

  const Atlas& atlas() const noexcept { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const noexcept { return atlas_; }
  const std::vector<SampledField>& pieces() const noexcept { return pieces_; }
  const SampledField& piece(std::size_t j) const { return pieces_.at(j); }
  int components() const noexcept { return components_; }
  double tolerance() const noexcept { return tol_; }
  /// "representative" or "cubic" when every piece agrees, "mixed" otherwise.
  std::string interpolation() const;

  Section operator+(const Section& other) const;
  Section operator-(const Section& other) const;
  Section operator*(double scale) const;

 private:
  std::shared_ptr<const Atlas> atlas_;
  std::vector<SampledField> pieces_;
  int components_;
  double tol_;
};

Section linear_combination(double a, const Section& x, double b, const Section& y);

std::vector<SampledField> theta_embed(const Section& gamma);

/// Partition-of-unity sum γ_j(y) = Σ_i h_i(φ_j⁻¹ y)·γ_i(Θ_ij y); refuses incompatible pieces.
Section glue(std::vector<SampledField> pieces, std::shared_ptr<const Atlas> atlas,
             double tol = kDefaultCompatibilityTol);

/// Σ_j ⟨E_j γ_j, E_j η_j⟩_{H^s} with E_j the minimum-norm extension at cutoff N on W_j.
class SectionHilbert {
 public:
  SectionHilbert(const Atlas& atlas, SobolevOrder s, int modes,
                 WeightConvention convention = WeightConvention::Paper);
  double inner(const Section& a, const Section& b) const;
  double norm(const Section& a) const;
  /// Per-chart terms ⟨E_j a_j, E_j b_j⟩.
  std::vector<double> chart_terms(const Section& a, const Section& b) const;
  int modes() const noexcept { return modes_; }

 private:
  std::string fingerprint_;
  SobolevOrder s_;
  int modes_;
  WeightConvention convention_;
  std::vector<ExtensionOperator> ext_;
};

double hilbert_inner(const Section& a, const Section& b, SobolevOrder s, int modes,
                     WeightConvention convention = WeightConvention::Paper);

/// γ at a manifold point, read through the chart whose bump is largest there.
std::vector<double> point_eval(const Section& gamma, std::span<const double> p);
/// γ at p read through chart j; DomainError if φ_j(p) ∉ W_j.
std::vector<double> point_eval_via(const Section& gamma, std::span<const double> p, std::size_t j);
/// Largest Euclidean norm of a stored node value.
double sup_norm(const Section& gamma);

/// Open subset of ℝⁿ with a distance-to-complement query.
struct OpenSet {
  enum class Kind { Ball, Box, BallComplement };
  Kind kind = Kind::Ball;
  std::vector<double> center;  // Ball, BallComplement
  double radius = 1.0;
  std::vector<double> lo;      // Box
  std::vector<double> hi;

  static OpenSet ball(std::vector<double> center, double radius);
  static OpenSet box(std::vector<double> lo, std::vector<double> hi);
  static OpenSet ball_complement(std::vector<double> center, double radius);

  /// Distance from y to ℝⁿ∖U (0 outside U).
  double distance_to_complement(std::span<const double> y) const;
};

struct OpennessMargin {
  double margin = 0;
  bool member() const noexcept { return margin > 0.0; }
};

OpennessMargin open_margin(const Section& gamma, const OpenSet& u);

/// Closed-form f : M × U → ℝ^{out_dim} and its fibre derivative d₂f(p, y)·v.
struct ManifoldMap {
  int in_dim;
  int out_dim;
  std::function<void(std::span<const double> p, std::span<const double> y, std::span<double> out)> f;
  std::function<void(std::span<const double> p, std::span<const double> y, std::span<const double> v,
                     std::span<double> out)>
      d2f;
};

/// x ↦ f(x, γ(x)); DomainError unless γ takes values in U with positive margin.
Section pushforward(const ManifoldMap& f, const Section& gamma, const OpenSet& u);
/// x ↦ d₂f(x, γ(x), η(x)).
Section pushforward_derivative(const ManifoldMap& f, const Section& gamma, const Section& eta,
                               const OpenSet& u);
/// Central differences (f_*(γ+εη) − f_*(γ−εη))/2ε against the closed-form derivative.
SlopeProbe pushforward_derivative_probe(const ManifoldMap& f, const Section& gamma, const Section& eta,
                                        const OpenSet& u, std::span<const double> eps);

/// Value-level splitting ℝ^{n₁+n₂+…} = ℝ^{n₁} × ℝ^{n₂} × … and its inverse.
std::vector<Section> split_components(const Section& gamma, std::span<const int> sizes);
Section concat_components(std::span<const Section> parts);

/// Max over all witness nodes of the value difference (same atlas and shape).
double max_node_difference(const Section& a, const Section& b);

}  // namespace mapgroups
