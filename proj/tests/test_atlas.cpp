#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mapgroups/atlas.hpp"
#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

using namespace mapgroups;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> random_point(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  std::vector<double> p(m);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST_CASE("built-in atlases validate") {
  for (const auto& a : {Atlas::circle_two_charts(), Atlas::torus_four_charts()}) {
    const auto r = validate_atlas(a);
    CHECK(r.passed);
    CHECK(r.uncovered == 0);
    CHECK(r.cocycle_residual < 1e-9);
    CHECK(r.inverse_residual < 1e-9);
    CHECK(r.partition_residual < 1e-9);
    CHECK(r.margin > 0.0);
  }
  CHECK(Atlas::builtin("torus4").size() == 4);
  CHECK_THROWS_AS(Atlas::builtin("sphere"), InputError);
}

TEST_CASE("partition of unity by direct summation") {
  const auto a = Atlas::torus_four_charts();
  std::mt19937_64 rng(17);
  double worst = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto p = random_point(2, rng);
    double sum = 0;
    double bumps = 0;
    for (std::size_t i = 0; i < a.size(); ++i) bumps += a.bump(i, p);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double h = a.partition(i, p);
      CHECK(h >= 0.0);
      CHECK_THAT(h, WithinAbs(a.bump(i, p) / bumps, 1e-15));
      if (h > 0.0) {
        CHECK(a.chart(i).covers(p));
        CHECK(a.chart(i).witness.contains(a.chart(i).to_chart(p)));
      }
      sum += h;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("circle transitions are translations") {
  const auto a = Atlas::circle_two_charts();
  CHECK(a.transition(0, 1).kind() == "translation");
  const double pi = std::numbers::pi;
  for (double x : {pi + 0.1, 4.0, 2 * pi - 0.01}) {
    const double y[] = {x};
    CHECK_THAT(a.transition_eval(0, 1, y)[0], WithinAbs(x - pi, 1e-15));
    CHECK(a.transition_eval(0, 0, y)[0] == x);
  }
  const double cut[] = {pi};
  CHECK_THROWS_AS(a.transition_eval(0, 1, cut), DomainError);
  const double outside[] = {7.0};
  CHECK_THROWS_AS(a.transition_eval(0, 1, outside), DomainError);

  const auto branches = a.overlap_branches(0, 1);
  REQUIRE(branches.size() == 2);
  for (const auto& b : branches) {
    std::vector<std::vector<double>> pts;
    for (double t = 0.05; t < 1.0; t += 0.1) pts.push_back({b.box.lo[0] + t * (b.box.hi[0] - b.box.lo[0])});
    const auto chk = check_diffeo(b.map, pts);
    CHECK(chk.min_abs_det == 1.0);
    CHECK(chk.inverse_residual < 1e-12);
    for (const auto& p : pts) CHECK_THAT(b.map.forward(p)[0], WithinAbs(a.transition_eval(0, 1, p)[0], 1e-12));
  }
}

TEST_CASE("transition round trips") {
  std::mt19937_64 rng(5);
  for (const auto& a : {Atlas::circle_two_charts(), Atlas::torus_four_charts()}) {
    int used = 0;
    while (used < 100) {
      const auto y = random_point(a.dim(), rng);
      const std::size_t i = rng() % a.size(), j = rng() % a.size();
      if (!a.transition_defined(i, j, y)) continue;
      const auto back = a.transition_eval(j, i, a.transition_eval(i, j, y));
      for (int ax = 0; ax < a.dim(); ++ax) CHECK(std::abs(back[ax] - y[ax]) < 1e-10);
      ++used;
    }
  }
}

TEST_CASE("constructed failures are reported") {
  const auto circle = Atlas::circle_two_charts();
  const auto shrunk = circle.with_witness(1, Box{{0.3}, {std::numbers::pi - 0.2}});
  const auto r = validate_atlas(shrunk);
  CHECK_FALSE(r.passed);
  CHECK(r.uncovered > 0);
  CHECK(r.cover_gap > 0.1);
  bool origin_listed = false;
  for (const auto& p : r.uncovered_points) origin_listed = origin_listed || p[0] == 0.0;
  CHECK(origin_listed);

  const auto corrupt = circle.with_transition_offset(0, 1, 0.01);
  const auto rc = validate_atlas(corrupt);
  CHECK_FALSE(rc.passed);
  CHECK_THAT(rc.cocycle_residual, WithinAbs(0.01, 1e-9));

  const auto torus_bad = Atlas::torus_four_charts().with_transition_offset(2, 3, 0.01);
  CHECK_THAT(validate_atlas(torus_bad).cocycle_residual, WithinAbs(0.01, 1e-9));
}

TEST_CASE("witness windows have an enlarged neighbour inside the codomain") {
  for (const auto& a : {Atlas::circle_two_charts(), Atlas::torus_four_charts()})
    for (const auto& c : a.charts()) {
      const Box e = c.enlarged_witness();
      CHECK(e.contains_closure_of(c.witness));
      CHECK(c.codomain.contains_closure_of(e));
      const auto back = c.to_chart(c.from_chart(std::vector<double>(a.dim(), 1.234)));
      for (double v : back) CHECK(std::abs(v - 1.234) < 1e-12);
    }
  CHECK_THROWS_AS(Atlas("bad", {Chart{{1}, {0.0}, {}, Box{{0.0}, {1.0}}, {8}}}), InputError);
}

TEST_CASE("reflected charts give affine transitions") {
  const Box w{{0.3}, {kTwoPi - 0.3}};
  const Atlas a("flip", {Chart{{1}, {0.0}, {}, w, {32}}, Chart{{-1}, {std::numbers::pi}, {}, w, {32}}});
  CHECK(a.transition(0, 1).kind() == "affine");
  CHECK(a.transition(0, 0).kind() == "translation");
  const auto r = validate_atlas(a);
  CHECK(r.passed);
  const double y[] = {1.0};
  // φ_1⁻¹(1) = π − 1, so Θ_01(1) = π − 1.
  CHECK_THAT(a.transition_eval(0, 1, y)[0], WithinAbs(std::numbers::pi - 1.0, 1e-15));
}

TEST_CASE("fingerprint tracks content") {
  const auto a = Atlas::circle_two_charts();
  CHECK(a.fingerprint() == Atlas::circle_two_charts().fingerprint());
  CHECK(a.fingerprint() != a.with_transition_offset(0, 1, 1e-3).fingerprint());
  CHECK(a.fingerprint() != Atlas::circle_two_charts(64).fingerprint());
}
