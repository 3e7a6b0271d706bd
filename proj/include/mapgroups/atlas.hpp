#pragma once

// Finite atlases of S¹ and T² with closed-form charts, witness windows and a
// partition of unity subordinate to the windows.
//
// Manifold points are represented by angles in [0, 2π)^m. Chart j is
// φ_j(p) = wrap(σ_j ⊙ p + shift_j) with σ_j ∈ {±1}^m, codomain V_j = (0, 2π)^m.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapgroups/sobolev.hpp"

namespace mapgroups {

struct Chart {
  std::vector<int> sign;
  std::vector<double> shift;
  Box codomain;              // V_j
  Box witness;               // W_j
  std::vector<int> grid;     // per-axis node counts of the witness grid

  int dim() const noexcept { return static_cast<int>(shift.size()); }
  /// φ_j(p); the result lies on the boundary of V_j when p ∉ U_j.
  std::vector<double> to_chart(std::span<const double> p) const;
  /// φ_j⁻¹(y) reduced to [0, 2π)^m.
  std::vector<double> from_chart(std::span<const double> y) const;
  bool covers(std::span<const double> p) const;  // p ∈ U_j
  GridDomain witness_domain() const;
  /// Window strictly between W_j and V_j (half the margin on each side).
  Box enlarged_witness() const;
};

/// Θ_ij(y) = wrap(diag(sign) y + offset), defined for y ∈ V_j with image in V_i.
struct Transition {
  std::vector<int> sign;
  std::vector<double> offset;

  std::string kind() const;  // "translation" or "affine"
};

/// One connected piece of an overlap on which Θ_ij is a single affine map.
struct OverlapBranch {
  Box box;       // in V_j coordinates
  Diffeo map;
};

class Atlas {
 public:
  Atlas(std::string name, std::vector<Chart> charts, double plateau_fraction = 0.5);

  static Atlas circle_two_charts(int nodes = 32);
  static Atlas torus_four_charts(int nodes = 16);
  /// Built-ins by name ("circle2", "torus4"); InputError otherwise.
  static Atlas builtin(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return m_; }
  std::size_t size() const noexcept { return charts_.size(); }
  const Chart& chart(std::size_t j) const { return charts_.at(j); }
  const std::vector<Chart>& charts() const noexcept { return charts_; }
  const Transition& transition(std::size_t i, std::size_t j) const;
  double plateau_fraction() const noexcept { return plateau_; }

  bool transition_defined(std::size_t i, std::size_t j, std::span<const double> y) const;
  /// Θ_ij(y); DomainError when y is outside V_j or Θ_ij(y) leaves V_i.
  std::vector<double> transition_eval(std::size_t i, std::size_t j, std::span<const double> y) const;
  std::vector<OverlapBranch> overlap_branches(std::size_t i, std::size_t j) const;

  /// Bump b_i(p) of chart i; positive exactly on φ_i⁻¹(W_i).
  double bump(std::size_t i, std::span<const double> p) const;
  /// h_i(p) = b_i(p) / Σ_j b_j(p); NaN if no window covers p.
  double partition(std::size_t i, std::span<const double> p) const;
  std::vector<double> partition_all(std::span<const double> p) const;
  /// Chart whose bump is largest at p, if any window covers p.
  std::optional<std::size_t> best_chart(std::span<const double> p) const;

  /// Copy with the transition offset τ_ij shifted by `delta` on every axis.
  Atlas with_transition_offset(std::size_t i, std::size_t j, double delta) const;
  /// Copy with chart j's witness window replaced.
  Atlas with_witness(std::size_t j, Box witness) const;
  /// Overrides the stored transitions (no consistency check; see validate_atlas).
  void set_transition(std::size_t i, std::size_t j, Transition t);

  /// Stable content hash (hex) of charts, windows and transitions.
  std::string fingerprint() const;

 private:
  std::string name_;
  int m_;
  std::vector<Chart> charts_;
  std::vector<Transition> transitions_;  // row-major J × J
  double plateau_;
};

struct AtlasReport {
  double cover_gap = 0;             // max over samples of min_j dist(φ_j(p), W_j)
  std::size_t uncovered = 0;
  std::vector<std::vector<double>> uncovered_points;
  double cocycle_residual = 0;
  double inverse_residual = 0;
  double partition_residual = 0;
  double margin = 0;                // min over charts of the W_j-to-V_j gap
  std::size_t samples = 0;
  bool passed = false;
};

/// Runs cover, cocycle, inverse and partition checks on `density` samples per axis.
AtlasReport validate_atlas(const Atlas& a, double tol = 1e-9, int density = 64);

}  // namespace mapgroups
