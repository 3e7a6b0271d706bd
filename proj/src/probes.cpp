#include "mapgroups/probes.hpp"

#include <algorithm>
#include <cmath>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

BandlimitedField random_decaying_field(int m, int modes, int components, std::uint64_t seed,
                                       std::int64_t index, double decay) {
  BandlimitedField shape = BandlimitedField::zero(m, modes, components);
  const std::size_t per = shape.modes_per_component();
  std::vector<std::complex<double>> coeffs(per * components);
  for (int c = 0; c < components; ++c)
    for (std::size_t f = 0; f < per; ++f) {
      const auto k = shape.wave_vector(f);
      std::vector<std::int64_t> key{index, c, 0, m == 2 ? k[1] : 0, k[0]};
      const double amp = std::pow(1.0 + shape.k_norm_sq(f), -0.5 * decay);
      const double re = keyed_normal(seed, key);
      key[2] = 1;
      const double im = keyed_normal(seed, key);
      coeffs[c * per + f] = amp * std::complex<double>(re, im);
    }
  return BandlimitedField::real_projection(m, modes, components, std::move(coeffs));
}

SlopeProbe nemytskij_continuity_probe(const PointwiseMap& f, const SampledField& gamma,
                                      const SampledField& eta, std::span<const double> eps) {
  SlopeProbe out;
  const SampledField base = nemytskij(f, gamma);
  for (double e : eps) {
    const SampledField moved = nemytskij(f, linear_combination(1.0, gamma, e, eta));
    double err = 0;
    for (std::size_t i = 0; i < base.values().size(); ++i)
      err = std::max(err, std::abs(moved.values()[i] - base.values()[i]));
    out.eps.push_back(e);
    out.errors.push_back(err);
  }
  out.slope = loglog_slope(out.eps, out.errors);
  return out;
}

double pullback_functoriality_residual(const Diffeo& outer, const Diffeo& inner,
                                       const Diffeo& composite, const SampledField& field,
                                       const GridDomain& middle, const GridDomain& target) {
  const SampledField direct = pullback(composite, field, target);
  const SampledField staged = pullback(inner, pullback(outer, field, middle), target);
  double worst = 0;
  for (std::size_t i = 0; i < direct.values().size(); ++i)
    worst = std::max(worst, std::abs(direct.values()[i] - staged.values()[i]));
  return worst;
}

double extension_by_zero_roundtrip(const SampledField& field, const GridDomain& larger) {
  const SampledField back = restrict_to(extend_by_zero(field, larger), field.domain());
  double worst = 0;
  for (std::size_t i = 0; i < back.values().size(); ++i)
    worst = std::max(worst, std::abs(back.values()[i] - field.values()[i]));
  return worst;
}

double cutoff_operator_bound(const SmoothCutoff& h, SobolevOrder s, int m, int modes, int samples,
                             std::uint64_t seed, WeightConvention convention) {
  if (samples < 1) throw InputError("need at least one probe sample");
  // Decay keeps the H^s mass of the probe family resolution independent.
  const double decay = (convention == WeightConvention::Paper ? 0.5 : 1.0) * s.value() + 2.0;
  double bound = 0;
  for (int i = 0; i < samples; ++i) {
    const BandlimitedField g = random_decaying_field(m, modes, 1, seed, i, decay);
    const double norm = hs_norm(g, s, convention);
    if (!(norm > 0)) continue;
    const BandlimitedField hg = cutoff_multiply(h, g);
    bound = std::max(bound, hs_norm(hg, s, convention) / norm);
  }
  return bound;
}

}  // namespace mapgroups
