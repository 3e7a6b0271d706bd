#pragma once

// Empirical probes for the four closure properties of the function-space family:
// pushforward (PF), pullback (PB), extension by zero (GL), cutoff multiplication (MU).

#include <cstdint>
#include <span>
#include <vector>

#include "mapgroups/sobolev.hpp"

namespace mapgroups {

struct SlopeProbe {
  std::vector<double> eps;
  std::vector<double> errors;
  double slope = 0;
};

/// Random real field whose coefficient at k is keyed by (index, component, k), so a
/// larger cutoff extends the same function. Coefficients decay like (1+‖k‖²)^{-decay/2}.
BandlimitedField random_decaying_field(int m, int modes, int components, std::uint64_t seed,
                                       std::int64_t index, double decay);

/// max‖f(γ+εη) − f(γ)‖ over nodes against ε; slope of the log-log fit.
SlopeProbe nemytskij_continuity_probe(const PointwiseMap& f, const SampledField& gamma,
                                      const SampledField& eta, std::span<const double> eps);

/// max‖pullback(Θ_outer∘Θ_inner) − pullback(Θ_inner, pullback(Θ_outer))‖ at the
/// target nodes. `composite` is an independently built closed form of Θ_outer∘Θ_inner;
/// `middle` is the window carrying the intermediate field.
double pullback_functoriality_residual(const Diffeo& outer, const Diffeo& inner,
                                       const Diffeo& composite, const SampledField& field,
                                       const GridDomain& middle, const GridDomain& target);

/// max |restrict(extend_by_zero(γ, U), V) − γ| over V's nodes.
double extension_by_zero_roundtrip(const SampledField& field, const GridDomain& larger);

/// max over random unit-H^s fields γ of ‖hγ‖_{H^s} / ‖γ‖_{H^s} at cutoff N.
double cutoff_operator_bound(const SmoothCutoff& h, SobolevOrder s, int m, int modes,
                             int samples, std::uint64_t seed,
                             WeightConvention convention = WeightConvention::Paper);

}  // namespace mapgroups
