#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "mapgroups/direct_limit.hpp"
#include "mapgroups/errors.hpp"

using namespace mapgroups;
using Catch::Matchers::WithinAbs;

namespace {

std::shared_ptr<const Atlas> circle() { return std::make_shared<const Atlas>(Atlas::circle_two_charts()); }

Section algebra_section(const std::shared_ptr<const Atlas>& a, std::uint64_t seed, std::int64_t idx, double radius) {
  auto f = std::make_shared<const BandlimitedField>(random_decaying_field(a->dim(), 3, 3, seed, idx, 2.0));
  const auto s = Section::from_function(a, 3, [f](std::span<const double> p, std::span<double> o) { f->evaluate(p, o); });
  return s * (radius / sup_norm(s));
}

double exp_gap(const NodeMatrices& got, const GroupSection& want) { return max_difference(got, node_matrices(want)); }

}  // namespace

TEST_CASE("ladder rungs") {
  const auto l = ladder(0.5, 3);
  REQUIRE(l.rungs.size() == 3);
  CHECK_THAT(l.rungs[0], WithinAbs(1.5, 1e-15));
  CHECK_THAT(l.rungs[1], WithinAbs(1.0, 1e-15));
  CHECK_THAT(l.rungs[2], WithinAbs(0.5 + 1.0 / 3, 1e-15));
  CHECK_THROWS_AS(ladder(0.4, 3), InputError);
  CHECK_NOTHROW(ladder(1.0, 3, 2));
  CHECK_THROWS_AS(ladder(0.9, 3, 2), InputError);
  CHECK_THROWS_AS(ladder(1.0, 1), InputError);

  // Norms grow along the ladder toward the larger exponents.
  const auto f = random_decaying_field(1, 12, 1, 7, 0, 1.0);
  const auto big = ladder(0.5, 8);
  for (std::size_t j = 1; j < big.rungs.size(); ++j)
    CHECK(hs_norm(f, SobolevOrder(big.rungs[j - 1])) > hs_norm(f, SobolevOrder(big.rungs[j])));
}

TEST_CASE("decay field sums") {
  // s = 2α − 2 gives Σ_k 1/(1+k²) = π coth π.
  const double alpha = 1.5;
  const long n = 200000;
  const double tail = 2.0 / n;
  CHECK_THAT(decay_partial_norm_sq(alpha, 2 * alpha - 2, n) + tail, WithinAbs(std::numbers::pi / std::tanh(std::numbers::pi), 1e-9));
  CHECK_THAT(decay_partial_norm_sq(alpha, alpha - 1, n, WeightConvention::Standard) + tail,
             WithinAbs(std::numbers::pi / std::tanh(std::numbers::pi), 1e-9));

  // Coefficients of the field itself.
  const auto f = decay_field(alpha, 16);
  CHECK_THAT(hs_norm(f, SobolevOrder(2 * alpha - 2)) * hs_norm(f, SobolevOrder(2 * alpha - 2)),
             WithinAbs(decay_partial_norm_sq(alpha, 2 * alpha - 2, 16), 1e-12));

  for (double a : {1.0, 1.5, 2.0}) {
    CHECK(decay_partial_norm_sq(a, 2 * a - 1 + 0.5, 100000) >= 1e3);
    CHECK(decay_block_increment(a, 2 * a - 3, 10000) < 1e-6);
  }
}

TEST_CASE("critical order") {
  for (double a : {1.0, 1.5, 2.0}) {
    const auto est = critical_order_estimate(a);
    CHECK(est.contained);
    CHECK_THAT(est.predicted, WithinAbs(2 * a - 1, 1e-15));
    CHECK(std::abs(est.estimate - (2 * a - 1)) < 0.1);
    CHECK(est.bisection_steps > 0);
    const auto std_est = critical_order_estimate(a, {}, WeightConvention::Standard);
    CHECK(std::abs(std_est.estimate - (a - 0.5)) < 0.1);
  }
  CHECK_FALSE(critical_order_estimate(0.25).contained);
  const auto n = default_cutoffs();
  CHECK(increment_ratio(1.5, 1.5, n) < 1.0);
  CHECK(increment_ratio(1.5, 2.5, n) > 1.0);
  CHECK_THROWS_AS(increment_ratio(1.5, 2.0, std::vector<long>{10, 20}), InputError);
}

TEST_CASE("rung compactness") {
  const auto l = ladder(0.5, 3);
  const auto r = rung_compactness_probe(l, 1, 64);
  CHECK(r.s == 1.5);
  CHECK(r.t == 1.0);
  CHECK(r.strictly_decreasing);
  CHECK_THAT(r.sigma0, WithinAbs(1.0, 1e-15));
  CHECK_THAT(r.sigma_min, WithinAbs(std::pow(1.0 + 64.0 * 64.0, -0.125), 1e-12));
  // Decay with exponent (s−t)/4 is too slow to reach 1e-3 at 64 modes.
  CHECK(r.first_below == -1);
  CHECK(r.crossing_k > 1e11);
  CHECK_THAT(std::pow(1.0 + r.crossing_k * r.crossing_k, -(r.s - r.t) / 4), WithinAbs(1e-3, 1e-12));

  const auto wide = rung_compactness_probe(ladder(0.5, 2), 1, 64, WeightConvention::Paper, 0.5);
  REQUIRE(wide.first_below >= 0);
  CHECK(wide.spectrum[wide.first_below] < 0.5);
  CHECK(wide.spectrum[wide.first_below - 1] >= 0.5);
  CHECK_THROWS_AS(rung_compactness_probe(l, 3, 64), InputError);
  CHECK_THROWS_AS(rung_compactness_probe(l, 0, 64), InputError);
}

TEST_CASE("evolution of constant curves") {
  const auto a = circle();
  const auto so3 = make_group("SO3");
  const auto xi = algebra_section(a, 11, 0, 1.0);
  const auto want = exp_section(xi, so3);
  const auto curve = constant_curve(xi);

  const double e8 = exp_gap(evolve_raw(curve, *so3, 8), want);
  const double e16 = exp_gap(evolve_raw(curve, *so3, 16), want);
  CHECK_THAT(e8 / e16, WithinAbs(16.0, 4.0));
  CHECK(exp_gap(evolve_raw(curve, *so3, 256), want) < 1e-10);

  // Zero curve stays at the identity exactly.
  const auto zero = evolve(constant_curve(Section::zero(a, 3)), so3, 4);
  CHECK(max_difference(zero, GroupSection::identity(a, so3)) == 0.0);

  // γ(t) = tξ integrates to exp(ξ/2).
  TimeSampledCurve ramp{{0.0, 1.0}, {Section::zero(a, 3), xi}};
  CHECK(exp_gap(evolve_raw(ramp, *so3, 256), exp_section(xi * 0.5, so3)) < 1e-10);

  // Coarse steps drift off the group; evolve re-projects and says so.
  const auto coarse = evolve(curve, so3, 4);
  CHECK_FALSE(coarse.projection_log().empty());
  CHECK(coarse.max_relation_defect() < 1e-13);
  CHECK(coarse.compatibility_defect() < 1e-9);
}

TEST_CASE("evolution is equivariant under constant conjugation") {
  const auto a = circle();
  for (const char* name : {"SO3", "SU2", "UT2"}) {
    const auto g = make_group(name);
    TimeSampledCurve c{{0.0, 0.5, 1.0},
                       {algebra_section(a, 21, 0, 0.8), algebra_section(a, 21, 1, 0.8), algebra_section(a, 21, 2, 0.8)}};
    const double v[] = {0.3, -0.2, 0.5};
    const auto h = exp_section(Section::constant(a, v), g);
    TimeSampledCurve conj{c.times, {}};
    for (const auto& s : c.sections) conj.sections.push_back(adjoint_operator(h, s));
    const auto eta = evolve_raw(c, *g, 64);
    const auto eta_conj = evolve_raw(conj, *g, 64);
    const Eigen::MatrixXd hm = h.at(0, 0);
    const Eigen::MatrixXd hi = g->inverse(hm);
    double worst = 0;
    for (std::size_t j = 0; j < eta.size(); ++j)
      for (std::size_t k = 0; k < eta[j].size(); ++k)
        worst = std::max(worst, (hm * eta[j][k] * hi - eta_conj[j][k]).cwiseAbs().maxCoeff());
    INFO(name);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("evolution derivative") {
  const auto a = circle();
  const auto so3 = make_group("SO3");
  const auto xi = algebra_section(a, 31, 0, 1.0);
  const auto delta = algebra_section(a, 31, 1, 1.0);

  // Constant curves: d/dε exp(A + εD) is the corner block of exp([[A, D], [0, A]]).
  const auto d = evolve_derivative(constant_curve(xi), constant_curve(delta), *so3, 128);
  double worst = 0;
  for (std::size_t j = 0; j < d.size(); ++j)
    for (std::size_t k = 0; k < d[j].size(); ++k) {
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(6, 6);
      block.topLeftCorner(3, 3) = so3->hat(xi.piece(j).value(k));
      block.bottomRightCorner(3, 3) = block.topLeftCorner(3, 3);
      block.topRightCorner(3, 3) = so3->hat(delta.piece(j).value(k));
      const Eigen::MatrixXd e = block.exp();
      worst = std::max(worst, (e.topRightCorner(3, 3) - d[j][k]).cwiseAbs().maxCoeff());
    }
  CHECK(worst < 1e-8);

  TimeSampledCurve c{{0.0, 0.5, 1.0},
                     {algebra_section(a, 41, 0, 1.0), algebra_section(a, 41, 1, 1.0), algebra_section(a, 41, 2, 1.0)}};
  TimeSampledCurve dir{c.times,
                       {algebra_section(a, 42, 0, 1.0), algebra_section(a, 42, 1, 1.0), algebra_section(a, 42, 2, 1.0)}};
  const std::vector<double> eps{2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3};
  for (const char* name : {"SO3", "UT2"}) {
    const auto probe = evolution_smoothness_probe(c, dir, *make_group(name), 32, eps);
    INFO(name);
    CHECK_THAT(probe.slope, WithinAbs(2.0, 0.2));
  }
}

TEST_CASE("evolution input checks") {
  const auto a = circle();
  const auto so3 = make_group("SO3");
  const auto xi = algebra_section(a, 51, 0, 1.0);
  CHECK_THROWS_AS(evolve_raw(constant_curve(xi), *so3, 0), InputError);
  CHECK_THROWS_AS(evolve_raw(constant_curve(Section::zero(a, 2)), *so3, 4), InputError);
  TimeSampledCurve skew{{0.0, 0.3, 1.0}, {xi, xi, xi}};
  CHECK_THROWS_AS(evolve_raw(skew, *so3, 4), InputError);
  TimeSampledCurve mismatch{{0.0, 1.0}, {xi}};
  CHECK_THROWS_AS(evolve_raw(mismatch, *so3, 4), InputError);
  CHECK_THROWS_AS(evolve_raw(constant_curve(xi, 8), *so3, 4), InputError);
}
