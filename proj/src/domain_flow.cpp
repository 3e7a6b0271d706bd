#include "mapgroups/domain_flow.hpp"

#include <algorithm>
#include <cmath>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"

namespace mapgroups {

namespace {

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_params(const std::string& name, const std::map<std::string, double>& p,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : p) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end())
      throw InputError("unknown parameter '" + key + "' for domain " + name);
    if (!std::isfinite(value)) throw InputError("parameter '" + key + "' must be finite");
  }
}

double norm(const Point2& v) { return std::hypot(v[0], v[1]); }

}  // namespace

LevelSetDomain::LevelSetDomain(std::string name, std::map<std::string, double> params, Scalar g, Gradient grad,
                               Box bbox, std::vector<Point2> k_points, double scale)
    : name_(std::move(name)),
      params_(std::move(params)),
      g_(std::move(g)),
      grad_(std::move(grad)),
      bbox_(std::move(bbox)),
      k_points_(std::move(k_points)),
      scale_(scale) {
  if (!(scale_ > 0) || !std::isfinite(scale_)) throw InputError("level-set scale must be positive");
  if (bbox_.dim() != 2) throw InputError("level-set domains are planar");
  if (!(edge_min() > 0)) throw InputError("domain " + name_ + " is not bounded inside its box");
  for (const auto& k : k_points_)
    if (!(this->g(k) < 0)) throw InputError("K-point outside domain " + name_);
}

LevelSetDomain LevelSetDomain::named(const std::string& name, const std::map<std::string, double>& params,
                                     double scale) {
  if (name == "disc") {
    check_params(name, params, {"radius"});
    const double r = param(params, "radius", 1.0);
    if (!(r > 0)) throw InputError("disc radius must be positive");
    return LevelSetDomain(
        name, {{"radius", r}}, [r](const Point2& y) { return y[0] * y[0] + y[1] * y[1] - r * r; },
        [](const Point2& y) { return Point2{2 * y[0], 2 * y[1]}; },
        Box{{-1.5 * r, -1.5 * r}, {1.5 * r, 1.5 * r}}, {{0.0, 0.0}}, scale);
  }
  if (name == "ellipse") {
    check_params(name, params, {"a", "b"});
    const double a = param(params, "a", 2.0), b = param(params, "b", 1.0);
    if (!(a > 0 && b > 0)) throw InputError("ellipse semi-axes must be positive");
    return LevelSetDomain(
        name, {{"a", a}, {"b", b}},
        [a, b](const Point2& y) { return y[0] * y[0] / (a * a) + y[1] * y[1] / (b * b) - 1; },
        [a, b](const Point2& y) { return Point2{2 * y[0] / (a * a), 2 * y[1] / (b * b)}; },
        Box{{-1.5 * a, -1.5 * b}, {1.5 * a, 1.5 * b}}, {{0.0, 0.0}}, scale);
  }
  if (name == "peanut") {
    check_params(name, params, {"d", "a"});
    const double d = param(params, "d", 1.0), a = param(params, "a", 1.2);
    if (!(d > 0 && a > d && a < std::sqrt(2.0) * d)) throw InputError("peanut needs d < a < sqrt(2) d");
    const double a4 = a * a * a * a;
    auto g = [d, a4](const Point2& y) {
      const double p = (y[0] - d) * (y[0] - d) + y[1] * y[1];
      const double q = (y[0] + d) * (y[0] + d) + y[1] * y[1];
      return p * q - a4;
    };
    auto grad = [d](const Point2& y) {
      const double p = (y[0] - d) * (y[0] - d) + y[1] * y[1];
      const double q = (y[0] + d) * (y[0] + d) + y[1] * y[1];
      return Point2{2 * (y[0] - d) * q + 2 * (y[0] + d) * p, 2 * y[1] * (p + q)};
    };
    const double w = std::sqrt(a * a + d * d) + 0.5;
    return LevelSetDomain(name, {{"d", d}, {"a", a}}, g, grad, Box{{-w, -w}, {w, w}}, {{-d, 0.0}, {d, 0.0}},
                          scale);
  }
  throw InputError("unknown domain '" + name + "'");
}

LevelSetDomain LevelSetDomain::scaled(double factor) const {
  if (!(factor > 0)) throw InputError("scale factor must be positive");
  LevelSetDomain out = *this;
  out.scale_ *= factor;
  return out;
}

Point2 LevelSetDomain::grad(const Point2& y) const {
  const Point2 v = grad_(y);
  return {scale_ * v[0], scale_ * v[1]};
}

double LevelSetDomain::edge_min() const {
  constexpr int kPerEdge = 400;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kPerEdge; ++i) {
    const double u = static_cast<double>(i) / kPerEdge;
    const double x = bbox_.lo[0] + u * (bbox_.hi[0] - bbox_.lo[0]);
    const double y = bbox_.lo[1] + u * (bbox_.hi[1] - bbox_.lo[1]);
    for (const Point2& p : {Point2{x, bbox_.lo[1]}, Point2{x, bbox_.hi[1]}, Point2{bbox_.lo[0], y}, Point2{bbox_.hi[0], y}})
      worst = std::min(worst, g(p));
  }
  return worst;
}

Point2 inner_normal(const LevelSetDomain& d, const Point2& y) {
  if (!(std::abs(d.g(y)) < kBoundaryBand)) throw DomainError("point is not on the boundary");
  const Point2 n = d.grad(y);
  const double len = norm(n);
  if (!(len > 1e-12)) throw SingularBoundaryError("gradient vanishes on the boundary");
  return {-n[0] / len, -n[1] / len};
}

FlowField::FlowField(LevelSetDomain domain, double band, double plateau)
    : domain_(std::move(domain)), band_(band), plateau_(plateau) {
  if (!(band_ > 0) || !std::isfinite(band_)) throw InputError("flow band must be positive");
  if (!(plateau_ > 0 && plateau_ < 1)) throw InputError("flow plateau must lie in (0, 1)");
  if (!(domain_.edge_min() >= band_)) throw InputError("flow band reaches the bounding box edge");
}

double FlowField::cutoff(double g) const {
  const double u = std::abs(g) / band_;
  if (u <= plateau_) return 1.0;
  if (u >= 1.0) return 0.0;
  return smooth_step((1.0 - u) / (1.0 - plateau_));
}

Point2 FlowField::operator()(const Point2& y) const {
  const double yy[] = {y[0], y[1]};
  if (!support().contains(yy)) return {0.0, 0.0};
  const double xi = cutoff(domain_.g(y));
  if (xi == 0.0) return {0.0, 0.0};
  const Point2 n = domain_.grad(y);
  const double len = std::max(norm(n), 1e-12);
  return {-xi * n[0] / len, -xi * n[1] / len};
}

Point2 flow(const FlowField& f, const Point2& y, double t, int steps) {
  if (steps < 16) throw InputError("flow needs at least 16 steps");
  if (!std::isfinite(t)) throw InputError("flow time must be finite");
  const double h = t / steps;
  Point2 x = y;
  auto add = [](const Point2& a, double s, const Point2& b) { return Point2{a[0] + s * b[0], a[1] + s * b[1]}; };
  for (int n = 0; n < steps; ++n) {
    const Point2 k1 = f(x);
    const Point2 k2 = f(add(x, h / 2, k1));
    const Point2 k3 = f(add(x, h / 2, k2));
    const Point2 k4 = f(add(x, h, k3));
    for (int i = 0; i < 2; ++i) x[i] += (h / 6) * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  if (!std::isfinite(x[0]) || !std::isfinite(x[1])) throw NumericError("flow produced non-finite values");
  return x;
}

std::vector<Point2> boundary_samples(const LevelSetDomain& d, int count, std::uint64_t seed) {
  if (count < 1) throw InputError("boundary sample count must be positive");
  const Box& box = d.bbox();
  std::uint64_t state = substream_seed(seed, "boundary-samples");
  auto uniform = [&]() {
    state = splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  std::vector<Point2> out;
  const long max_draws = 10000L * count;
  for (long draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Point2 y{box.lo[0] + uniform() * (box.hi[0] - box.lo[0]), box.lo[1] + uniform() * (box.hi[1] - box.lo[1])};
    if (!(std::abs(d.g(y)) < 0.2 * d.scale())) continue;
    for (int it = 0; it < 60; ++it) {
      const double gv = d.g(y);
      if (std::abs(gv) < 1e-14 * d.scale()) break;
      const Point2 n = d.grad(y);
      const double nn = n[0] * n[0] + n[1] * n[1];
      if (!(nn > 1e-20)) break;
      y = {y[0] - gv * n[0] / nn, y[1] - gv * n[1] / nn};
    }
    if (std::abs(d.g(y)) < 1e-12 * d.scale() && norm(d.grad(y)) > 1e-8) out.push_back(y);
  }
  if (static_cast<int>(out.size()) < count) throw NumericError("boundary sampling did not converge");
  return out;
}

ShrinkCertificate shrink_domain(const FlowField& f, double t0, int samples, std::uint64_t seed, int steps) {
  if (t0 == 0.0 || !std::isfinite(t0)) throw InputError("shrink time t0 must be nonzero");
  ShrinkCertificate c;
  c.domain = f.domain().name();
  c.t0 = t0;
  c.steps = steps;
  c.samples = samples;
  c.seed = seed;
  const double sign = t0 > 0 ? 1.0 : -1.0;
  const auto pts = boundary_samples(f.domain(), samples, seed);
  std::vector<SampleOffender> all;
  all.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point2 end = flow(f, pts[i], t0, steps);
    all.push_back({i, pts[i], end, f.domain().g(end)});
  }
  auto margin_of = [sign](const SampleOffender& o) { return -sign * o.g_end; };
  std::stable_sort(all.begin(), all.end(),
                   [&](const SampleOffender& a, const SampleOffender& b) { return margin_of(a) < margin_of(b); });
  c.margin = margin_of(all.front());
  all.resize(std::min<std::size_t>(all.size(), 5));
  c.worst = std::move(all);
  for (const auto& k : f.domain().k_points()) {
    const Point2 e = flow(f, k, t0, steps);
    c.k_displacement = std::max(c.k_displacement, std::hypot(e[0] - k[0], e[1] - k[1]));
  }
  c.k_fixed = c.k_displacement == 0.0;
  c.passed = c.margin > 0 && c.k_fixed;
  return c;
}

double descent_slope(const FlowField& f, const Point2& y, double tau, int steps) {
  const double up = f.domain().g(flow(f, y, tau, steps));
  const double down = f.domain().g(flow(f, y, -tau, steps));
  return (up - down) / (2 * tau);
}

DescentReport monotone_descent_check(const FlowField& f, const std::vector<Point2>& samples, double tau) {
  DescentReport r;
  for (const auto& y : samples) {
    DescentEntry e{y, descent_slope(f, y, tau), -norm(f.domain().grad(y))};
    r.max_deviation = std::max(r.max_deviation, std::abs(e.slope - e.expected));
    if (!(e.slope < 0)) r.all_negative = false;
    r.entries.push_back(e);
  }
  return r;
}

}  // namespace mapgroups
