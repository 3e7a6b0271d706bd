#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "mapgroups/errors.hpp"
#include "mapgroups/numerics.hpp"
#include "mapgroups/probes.hpp"

namespace mapgroups::cli {

namespace {

const std::vector<std::string> kParamKeys = {"field",  "window", "s",       "orders",        "curve",  "steps",
                                             "s0",     "rungs",  "alphas",  "domain",        "t0",     "samples",
                                             "trials", "radius", "probe_samples", "window_grid"};

double num(const RunConfig& c, const char* key, double fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params.at(key);
  if (!v.is_number()) throw InputError(std::string("config key '") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError(std::string("config key '") + key + "' must be finite");
  return x;
}

int integer(const RunConfig& c, const char* key, int fallback, int lo, int hi) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params.at(key);
  if (!v.is_number_integer()) throw InputError(std::string("config key '") + key + "' must be an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi)
    throw InputError(std::string("config key '") + key + "' must lie in [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
  return static_cast<int>(x);
}

std::vector<double> numbers(const RunConfig& c, const char* key, std::vector<double> fallback) {
  if (!c.params.contains(key)) return fallback;
  const auto& v = c.params.at(key);
  if (!v.is_array() || v.empty()) throw InputError(std::string("config key '") + key + "' must be a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number() || !std::isfinite(x.get<double>()))
      throw InputError(std::string("config key '") + key + "' must hold finite numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::filesystem::path resolve(const RunConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : c.config_dir / path;
}

std::shared_ptr<const Atlas> atlas_of(const RunConfig& c) { return std::make_shared<const Atlas>(Atlas::builtin(c.atlas)); }

std::uint64_t suite_seed(const RunConfig& c, std::string_view suite) { return substream_seed(c.seed, suite); }

// Algebra-valued section with node sup-norm exactly `radius`.
Section random_algebra_section(const std::shared_ptr<const Atlas>& a, int comps, std::uint64_t seed, std::int64_t idx,
                               double radius) {
  auto f = std::make_shared<const BandlimitedField>(random_decaying_field(a->dim(), 4, comps, seed, idx, 2.0));
  const auto s = Section::from_function(a, comps, [f](std::span<const double> p, std::span<double> o) { f->evaluate(p, o); });
  const double n = sup_norm(s);
  return n > 0 ? s * (radius / n) : s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

Json check_json(const Check& k) {
  return {{"name", k.name}, {"anchor", k.anchor}, {"value", k.value},
          {"relation", k.relation}, {"limit", k.limit}, {"passed", k.passed}};
}

Json probe_json(const SlopeProbe& p) { return {{"eps", p.eps}, {"errors", p.errors}, {"slope", p.slope}}; }

}  // namespace

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"pf_slope", 0.2},         {"pb_residual", 1e-9},   {"gl_roundtrip", 0.0},       {"mu_stability", 0.05},
      {"norm_monotone", 1e-12},  {"extend_residual", 1e-8}, {"extend_idempotence", 1e-8},
      {"group_identity", 1e-12}, {"exp_log", 1e-9},       {"conjugation", 1e-10},      {"bch_slope", 0.1},
      {"bracket", 1e-6},         {"evolve_exp", 1e-8},    {"evolve_ratio", 4.0},       {"smooth_slope", 0.2},
      {"critical_order", 0.1},   {"rellich", 1e-12},      {"ladder_monotone", 1e-12},  {"shrink_margin", 0.0},
      {"descent", 1e-4},         {"flow_group_law", 1e-8}};
  return t;
}

double RunConfig::tol(const std::string& key) const {
  if (const auto it = tolerances.find(key); it != tolerances.end()) return it->second;
  return default_tolerances().at(key);
}

RunConfig load_config(const Json& j, RunConfig c) {
  if (!j.is_object()) throw InputError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") {
        if (!value.is_number_integer() || value.get<long long>() < 0) throw InputError("seed must be a non-negative integer");
        c.seed = value.get<std::uint64_t>();
      } else if (key == "modes") {
        if (!value.is_number_integer()) throw InputError("modes must be an integer");
        c.modes = value.get<int>();
      } else if (key == "grid") {
        if (!value.is_number_integer()) throw InputError("grid must be an integer");
        c.grid = value.get<int>();
      } else if (key == "atlas") {
        c.atlas = value.get<std::string>();
      } else if (key == "group") {
        c.group = value.get<std::string>();
      } else if (key == "convention") {
        c.convention = convention_from_tag(value.get<std::string>());
      } else if (key == "out") {
        c.out = value.get<std::string>();
      } else if (key == "tolerances") {
        for (const auto& [name, v] : value.items()) {
          if (!default_tolerances().contains(name)) throw InputError("unknown tolerance '" + name + "'");
          if (!v.is_number()) throw InputError("tolerance '" + name + "' must be a number");
          c.tolerances[name] = v.get<double>();
        }
      } else if (key == "type" || key == kConventionKey) {
        // document header; the convention key is accepted as an alias
        if (key == kConventionKey) c.convention = convention_from_tag(value.get<std::string>());
      } else if (std::find(kParamKeys.begin(), kParamKeys.end(), key) != kParamKeys.end()) {
        c.params[key] = value;
      } else {
        throw InputError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  base.config_dir = path.parent_path();
  return load_config(read_json_file(path), std::move(base));
}

void validate(const RunConfig& c) {
  if (c.modes < 2 || c.modes > 256) throw InputError("modes must lie in [2, 256]");
  if (c.grid != 0 && (c.grid < 2 * c.modes + 1 || c.grid > 4097))
    throw InputError("grid must lie in [2N + 1, 4097]");
  (void)Atlas::builtin(c.atlas);
  (void)make_group(c.group);
  for (const auto& [name, v] : c.tolerances)
    if (!(v >= 0) || !std::isfinite(v)) throw InputError("tolerance '" + name + "' must be finite and >= 0");
}

Check at_most(std::string name, std::string anchor, double value, double limit) {
  return {std::move(name), std::move(anchor), value, "<=", limit, value <= limit};
}

Check at_least(std::string name, std::string anchor, double value, double limit) {
  return {std::move(name), std::move(anchor), value, ">=", limit, value >= limit};
}

Check above(std::string name, std::string anchor, double value, double limit) {
  return {std::move(name), std::move(anchor), value, ">", limit, value > limit};
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& k) { return k.passed; });
}

Json Report::to_json(const RunConfig& c) const {
  Json j;
  j["type"] = "report";
  j[kConventionKey] = convention_tag(c.convention);
  j["command"] = command;
  Json tol = Json::object();
  for (const auto& [name, v] : default_tolerances()) tol[name] = c.tol(name);
  j["config"] = {{"seed", c.seed},   {"modes", c.modes}, {"grid", c.grid_nodes()}, {"atlas", c.atlas},
                 {"group", c.group}, {"tolerances", tol}, {"params", c.params}};
  Json checks = Json::array();
  for (const auto& k : this->checks) checks.push_back(check_json(k));
  j["checks"] = std::move(checks);
  j["data"] = data;
  j["passed"] = passed();
  return j;
}

Report cmd_verify_axioms(const RunConfig& c) {
  Report r{"verify-axioms", {}, Json::object()};
  const int n = c.modes;
  const int g = c.grid_nodes();
  const GridDomain torus = GridDomain::full_torus(1, g);
  const Box full{{0.0}, {kTwoPi}};

  {
    const auto seed = suite_seed(c, "axiom-PF");
    const auto gamma = sample(random_decaying_field(1, n, 1, seed, 0, 2.0), torus);
    const auto eta = sample(random_decaying_field(1, n, 1, seed, 1, 2.0), torus);
    const PointwiseMap f{1, 1, [](auto x, auto y, auto out) { out[0] = std::sin(y[0]) + 0.5 * std::cos(x[0]) * y[0] * y[0]; }};
    const double eps[] = {1e-2, 1e-3, 1e-4, 1e-5};
    const auto probe = nemytskij_continuity_probe(f, gamma, eta, eps);
    r.data["pf"] = probe_json(probe);
    r.checks.push_back(at_most("nemytskij-continuity-slope", "axiom-PF", std::abs(probe.slope - 1.0), c.tol("pf_slope")));
  }
  {
    const auto seed = suite_seed(c, "axiom-PB");
    const auto gamma = sample(random_decaying_field(1, n, 1, seed, 0, 2.0), torus);
    const auto outer = Diffeo::translation({0.4}, full);
    const auto inner = Diffeo::affine(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, 0.3), full);
    const auto composite =
        Diffeo::affine(Eigen::MatrixXd::Constant(1, 1, 0.5), Eigen::VectorXd::Constant(1, 0.7), full);
    const auto mid = GridDomain::window(Box{{0.2}, {3.5}}, {g});
    const auto target = GridDomain::window(Box{{1.0}, {4.0}}, {g});
    const double res = pullback_functoriality_residual(outer, inner, composite, gamma, mid, target);
    r.data["pb"] = {{"residual", res}};
    r.checks.push_back(at_most("pullback-functoriality", "axiom-PB", res, c.tol("pb_residual")));
  }
  {
    const auto seed = suite_seed(c, "axiom-GL");
    const auto small = GridDomain::window(Box{{1.0}, {4.0}}, {g});
    const auto big = GridDomain::window(Box{{0.1}, {6.0}}, {g});
    const auto field = cutoff_multiply(SmoothCutoff({2.5}, {1.2}),
                                       restrict_to(random_decaying_field(1, n, 1, seed, 0, 2.0), small));
    const double res = extension_by_zero_roundtrip(field, big);
    r.data["gl"] = {{"roundtrip", res}};
    r.checks.push_back(at_most("extension-by-zero-roundtrip", "axiom-GL", res, c.tol("gl_roundtrip")));
  }
  {
    const auto seed = suite_seed(c, "axiom-MU");
    const int samples = integer(c, "probe_samples", 200, 1, 100000);
    const SmoothCutoff h({3.0}, {2.0});
    const double coarse = cutoff_operator_bound(h, SobolevOrder(1.5), 1, n / 2, samples, seed, c.convention);
    const double fine = cutoff_operator_bound(h, SobolevOrder(1.5), 1, n, samples, seed, c.convention);
    r.data["mu"] = {{"coarse_modes", n / 2}, {"fine_modes", n}, {"coarse", coarse}, {"fine", fine}, {"samples", samples}};
    r.checks.push_back(at_most("cutoff-bound-stability", "axiom-MU", std::abs(fine / coarse - 1.0), c.tol("mu_stability")));
  }
  return r;
}

Report cmd_norms(const RunConfig& c) {
  Report r{"norms", {}, Json::object()};
  BandlimitedField f = random_decaying_field(1, c.modes, 1, suite_seed(c, "norms"), 0, 1.5);
  if (c.params.contains("field")) {
    const auto any = field_from_json(read_json_file(resolve(c, c.params.at("field").get<std::string>())));
    if (!std::holds_alternative<BandlimitedField>(any)) throw InputError("norms needs a band-limited field");
    f = std::get<BandlimitedField>(any);
  }
  auto orders = numbers(c, "orders", {0.0, 0.5, 1.0, 1.5, 2.0, 3.0});
  std::sort(orders.begin(), orders.end());
  std::vector<double> norms;
  std::ostringstream csv;
  csv << std::setprecision(17) << "s,norm\n";
  for (double s : orders) {
    norms.push_back(hs_norm(f, SobolevOrder(s), c.convention));
    csv << s << ',' << norms.back() << '\n';
  }
  double worst = 0;
  for (std::size_t i = 1; i < norms.size(); ++i)
    worst = std::max(worst, (norms[i - 1] - norms[i]) / std::max(norms[i], std::numeric_limits<double>::min()));
  r.data["orders"] = orders;
  r.data["norms"] = norms;
  write_text_file(c.out / "norms.csv", csv.str());
  r.checks.push_back(at_most("norm-monotone-in-order", "eq-norm-monotone", worst, c.tol("norm_monotone")));
  return r;
}

Report cmd_extend(const RunConfig& c) {
  Report r{"extend", {}, Json::object()};
  const SobolevOrder s(num(c, "s", 1.5));
  std::optional<SampledField> data;
  if (c.params.contains("field")) {
    auto any = field_from_json(read_json_file(resolve(c, c.params.at("field").get<std::string>())));
    if (!std::holds_alternative<SampledField>(any)) throw InputError("extend needs a sampled field");
    data = std::get<SampledField>(std::move(any));
  } else {
    const auto w = numbers(c, "window", {0.5, 3.5});
    if (w.size() != 2) throw InputError("window must be [lo, hi]");
    const int nodes = integer(c, "window_grid", c.modes, 1, 4097);
    const auto dom = GridDomain::window(Box{{w[0]}, {w[1]}}, {nodes});
    data = restrict_to(random_decaying_field(1, c.modes, 1, suite_seed(c, "extend"), 0, 2.0), dom).detached();
  }
  const ExtensionOperator ext(data->domain(), s, c.modes, c.convention);
  const auto e = ext.apply(*data);
  const auto back = restrict_to(e, data->domain());
  double residual = 0;
  for (std::size_t i = 0; i < back.values().size(); ++i)
    residual = std::max(residual, std::abs(back.values()[i] - data->values()[i]));
  // Extending the restriction of a minimal extension reproduces it.
  const auto again = ext.apply(back.detached());
  double idem = 0;
  for (std::size_t i = 0; i < e.coeffs().size(); ++i) idem = std::max(idem, std::abs(again.coeffs()[i] - e.coeffs()[i]));
  r.data["order"] = s.value();
  r.data["nodes"] = data->domain().size();
  r.data["rank"] = ext.rank();
  r.data["quotient_norm"] = hs_norm(e, s, c.convention);
  write_json_file(c.out / "extension.json", field_to_json(e, c.convention));
  r.checks.push_back(at_most("interpolation-residual", "prop-extension", residual, c.tol("extend_residual")));
  r.checks.push_back(at_most("extension-idempotence", "prop-extension", idem, c.tol("extend_idempotence")));
  return r;
}

Report cmd_group_demo(const RunConfig& c) {
  Report r{"group-demo", {}, Json::object()};
  const auto a = atlas_of(c);
  const auto grp = make_group(c.group);
  const auto seed = suite_seed(c, "group-demo");
  const int trials = integer(c, "trials", 5, 1, 1000);
  const int dim = grp->algebra_dim();
  const double v = std::min(grp->v_radius(), 1.0);
  const double q = std::min(grp->q_radius() - 0.2, 2.5);
  const auto e = GroupSection::identity(a, grp);
  double identity = 0, exp_log = 0, conj = 0, brk = 0, bch = std::numeric_limits<double>::infinity();
  Json slopes = Json::array();
  for (int t = 0; t < trials; ++t) {
    const std::int64_t base = 10 * t;
    const auto g1 = exp_section(random_algebra_section(a, dim, seed, base, v), grp);
    const auto g2 = exp_section(random_algebra_section(a, dim, seed, base + 1, v), grp);
    const auto g3 = exp_section(random_algebra_section(a, dim, seed, base + 2, v), grp);
    identity = std::max({identity, max_difference(group_multiply(g1, e), g1), max_difference(group_multiply(e, g1), g1),
                         max_difference(group_multiply(g1, group_invert(g1)), e),
                         max_difference(group_multiply(group_multiply(g1, g2), g3),
                                        group_multiply(g1, group_multiply(g2, g3)))});
    const auto big = random_algebra_section(a, dim, seed, base + 3, q);
    exp_log = std::max(exp_log, max_node_difference(log_section(exp_section(big, grp)), big));
    const auto eta = random_algebra_section(a, dim, seed, base + 4, 1.0);
    const auto lhs = group_multiply(group_multiply(g1, exp_section(eta, grp)), group_invert(g1));
    conj = std::max(conj, max_difference(lhs, exp_section(adjoint_operator(g1, eta), grp)));
    const auto x = random_algebra_section(a, dim, seed, base + 5, 1.0);
    const auto y = random_algebra_section(a, dim, seed, base + 6, 1.0);
    brk = std::max(brk, max_node_difference(bch_bracket(x, y, grp, 1e-3), bracket(x, y, *grp)));
    const double ts[] = {1e-1, 3e-2, 1e-2};
    const auto probe = bch_order2_probe(x, y, grp, ts);
    slopes.push_back(probe.slope);
    bch = std::min(bch, probe.slope);
  }
  r.data["trials"] = trials;
  r.data["bch_slopes"] = slopes;
  write_json_file(c.out / "group-exp.json",
                  group_section_to_json(exp_section(random_algebra_section(a, dim, seed, 0, v), grp), c.convention));
  r.checks.push_back(at_most("group-axioms", "prop-fi", identity, c.tol("group_identity")));
  r.checks.push_back(at_most("exp-log-roundtrip", "prop-fi", exp_log, c.tol("exp_log")));
  r.checks.push_back(at_most("conjugation-identity", "prop-fi", conj, c.tol("conjugation")));
  r.checks.push_back(at_least("bch-order2-slope", "prop-fi", bch, 3.0 - c.tol("bch_slope")));
  r.checks.push_back(at_most("pointwise-bracket", "prop-fi", brk, c.tol("bracket")));
  return r;
}

Report cmd_evolve(const RunConfig& c) {
  Report r{"evolve", {}, Json::object()};
  const auto grp = make_group(c.group);
  const auto seed = suite_seed(c, "evolve");
  TimeSampledCurve curve;
  std::shared_ptr<const Atlas> a;
  if (c.params.contains("curve")) {
    curve = curve_from_json(read_json_file(resolve(c, c.params.at("curve").get<std::string>())));
    a = curve.sections.front().atlas_ptr();
  } else {
    a = atlas_of(c);
    curve = constant_curve(random_algebra_section(a, grp->algebra_dim(), seed, 0, num(c, "radius", 1.0)));
  }
  if (curve.sections.front().components() != grp->algebra_dim())
    throw InputError("curve components do not match the algebra of " + grp->name());
  const int intervals = static_cast<int>(curve.times.size()) - 1;
  const int steps = integer(c, "steps", 64, std::max(1, intervals), 1 << 16);

  const auto eta = evolve(curve, grp, steps);
  write_json_file(c.out / "eta.json", group_section_to_json(eta, c.convention));
  r.data["steps"] = steps;
  r.data["samples"] = curve.times.size();
  r.data["projections"] = eta.projection_log().size();

  bool constant = true;
  for (const auto& s : curve.sections)
    constant = constant && max_node_difference(s, curve.sections.front()) == 0.0;
  r.data["constant_curve"] = constant;
  if (constant) {
    const double gap = max_difference(evolve_raw(curve, *grp, steps), node_matrices(exp_section(curve.sections.front(), grp)));
    r.data["exp_gap"] = gap;
    r.checks.push_back(at_most("constant-curve-matches-exp", "eq-inival", gap, c.tol("evolve_exp")));
  }

  // Richardson ratio |E(n) − E(2n)| / |E(2n) − E(4n)| tends to 16 for a fourth-order scheme.
  const int n0 = 8 * std::max(1, intervals);
  const auto e1 = evolve_raw(curve, *grp, n0), e2 = evolve_raw(curve, *grp, 2 * n0), e4 = evolve_raw(curve, *grp, 4 * n0);
  const double d1 = max_difference(e1, e2), d2 = max_difference(e2, e4);
  const double ratio = d2 > 0 ? d1 / d2 : 16.0;
  r.data["step_halving"] = {{"steps", {n0, 2 * n0, 4 * n0}}, {"differences", {d1, d2}}, {"ratio", ratio}};
  r.checks.push_back(at_most("fourth-order-step-halving", "eq-inival", std::abs(ratio - 16.0), c.tol("evolve_ratio")));

  TimeSampledCurve dir{curve.times, {}};
  for (std::size_t i = 0; i < curve.times.size(); ++i)
    dir.sections.push_back(random_algebra_section(a, grp->algebra_dim(), seed, 100 + static_cast<std::int64_t>(i), 1.0));
  const std::vector<double> eps{2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const auto probe = evolution_smoothness_probe(curve, dir, *grp, std::max(32, steps / 2), eps);
  r.data["smoothness"] = probe_json(probe);
  r.checks.push_back(at_most("evolution-smoothness-slope", "eq-inival", std::abs(probe.slope - 2.0), c.tol("smooth_slope")));
  return r;
}

Report cmd_ladder(const RunConfig& c) {
  Report r{"ladder", {}, Json::object()};
  const double s0 = num(c, "s0", 0.5);
  const int rungs = integer(c, "rungs", 3, 2, 64);
  const auto l = ladder(s0, rungs, 1);
  r.data["rungs"] = l.rungs;

  double rellich = 0;
  Json probes = Json::array();
  for (int j = 1; j < rungs; ++j) {
    const auto p = rung_compactness_probe(l, j, c.modes, c.convention);
    // Closed form over all wave numbers, sorted independently.
    const double e = (c.convention == WeightConvention::Paper ? 0.25 : 0.5) * (p.s - p.t);
    std::vector<double> closed;
    for (int k = -c.modes; k <= c.modes; ++k) closed.push_back(std::pow(1.0 + double(k) * k, -e));
    std::sort(closed.rbegin(), closed.rend());
    if (closed.size() != p.spectrum.size()) throw NumericError("spectrum length mismatch");
    for (std::size_t i = 0; i < closed.size(); ++i) rellich = std::max(rellich, std::abs(closed[i] - p.spectrum[i]));
    write_text_file(c.out / ("spectrum_rung" + std::to_string(j) + ".csv"), spectrum_csv(p.spectrum));
    probes.push_back({{"rung", j},
                      {"s", p.s},
                      {"t", p.t},
                      {"sigma_min", p.sigma_min},
                      {"strictly_decreasing", p.strictly_decreasing},
                      {"first_below", p.first_below},
                      {"threshold", p.threshold},
                      {"crossing_k", p.crossing_k}});
  }
  r.data["rung_probes"] = probes;
  r.checks.push_back(at_most("rellich-closed-form", "thm-dirlim-1", rellich, c.tol("rellich")));

  const auto f = random_decaying_field(1, c.modes, 1, suite_seed(c, "ladder"), 0, 1.0);
  double mono = 0;
  std::vector<double> norms;
  for (double s : l.rungs) norms.push_back(hs_norm(f, SobolevOrder(s), c.convention));
  for (std::size_t j = 1; j < norms.size(); ++j) mono = std::max(mono, (norms[j] - norms[j - 1]) / norms[j - 1]);
  r.data["rung_norms"] = norms;
  r.checks.push_back(at_most("adjacent-rung-norms", "thm-dirlim-1", mono, c.tol("ladder_monotone")));

  std::ostringstream csv;
  csv << std::setprecision(17) << "alpha,estimate,predicted\n";
  Json est = Json::array();
  double worst = 0;
  for (double alpha : numbers(c, "alphas", {1.0, 1.5, 2.0})) {
    const auto e = critical_order_estimate(alpha, {}, c.convention);
    csv << alpha << ',' << e.estimate << ',' << e.predicted << '\n';
    est.push_back({{"alpha", alpha},
                   {"estimate", e.estimate},
                   {"predicted", e.predicted},
                   {"contained", e.contained},
                   {"bisection_steps", e.bisection_steps}});
    worst = std::max(worst, e.contained ? std::abs(e.estimate - e.predicted) : std::numeric_limits<double>::infinity());
  }
  write_text_file(c.out / "critical_order.csv", csv.str());
  r.data["critical_order"] = est;
  r.checks.push_back(at_most("critical-order", "thm-dirlim-1", worst, c.tol("critical_order")));
  return r;
}

Report cmd_shrink_domain(const RunConfig& c) {
  Report r{"shrink-domain", {}, Json::object()};
  DomainSpec spec{LevelSetDomain::named("disc"), 0.5, 0.5};
  if (c.params.contains("domain")) {
    const auto& d = c.params.at("domain");
    if (d.is_string()) {
      const std::string name = d.get<std::string>();
      if (name.ends_with(".json"))
        spec = domain_from_json(read_json_file(resolve(c, name)));
      else
        spec.domain = LevelSetDomain::named(name);
    } else {
      Json doc = d;
      doc["type"] = "domain";
      if (!doc.contains(kConventionKey)) doc[kConventionKey] = convention_tag(c.convention);
      spec = domain_from_json(doc);
    }
  }
  const double t0 = num(c, "t0", 0.1);
  const int samples = integer(c, "samples", 200, 1, 1000000);
  const int steps = integer(c, "steps", 256, 16, 1 << 20);
  const auto field = spec.field();
  const auto seed = suite_seed(c, "shrink-domain");
  const auto cert = shrink_domain(field, t0, samples, seed, steps);
  write_json_file(c.out / "certificate.json", certificate_to_json(cert, c.convention));
  write_json_file(c.out / "domain.json", domain_to_json(spec, c.convention));

  const auto pts = boundary_samples(field.domain(), samples, seed);
  const auto descent = monotone_descent_check(field, pts);
  double law = 0;
  for (const auto& y : pts) {
    const auto one = flow(field, y, t0, steps);
    const auto two = flow(field, flow(field, y, t0 / 2, steps), t0 / 2, steps);
    law = std::max(law, std::hypot(one[0] - two[0], one[1] - two[1]));
  }
  r.data["domain"] = spec.domain.name();
  r.data["margin"] = cert.margin;
  r.data["k_displacement"] = cert.k_displacement;
  r.data["descent_max_deviation"] = descent.max_deviation;
  r.data["descent_all_negative"] = descent.all_negative;
  r.checks.push_back(above("shrink-margin", "eq-get-inside", cert.margin, c.tol("shrink_margin")));
  r.checks.push_back(at_most("k-points-fixed", "eq-get-inside", cert.k_displacement, 0.0));
  r.checks.push_back(at_most("descent-slope", "eq-get-inside", descent.all_negative ? descent.max_deviation
                                                                                    : std::numeric_limits<double>::infinity(),
                             c.tol("descent")));
  r.checks.push_back(at_most("flow-group-law", "eq-get-inside", law, c.tol("flow_group_law")));
  return r;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sobolev mapping groups: numerical checks and experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir, convention;
  std::uint64_t seed = 0;
  int modes = 0;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_seed = app.add_option("--seed", seed, "random seed");
  auto* o_modes = app.add_option("--modes", modes, "mode cutoff N");
  auto* o_conv = app.add_option("--convention", convention, "weight exponent convention")
                     ->check(CLI::IsMember({"paper", "standard"}));
  (void)o_config;
  app.fallthrough();

  using Command = Report (*)(const RunConfig&);
  const std::vector<std::pair<std::string, Command>> commands = {
      {"verify-axioms", cmd_verify_axioms}, {"norms", cmd_norms},   {"extend", cmd_extend},
      {"group-demo", cmd_group_demo},       {"evolve", cmd_evolve}, {"ladder", cmd_ladder},
      {"shrink-domain", cmd_shrink_domain}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  try {
    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  RunConfig cfg;
  Command command = nullptr;
  std::string name;
  for (const auto& [n, fn] : commands)
    if (app.got_subcommand(n)) {
      command = fn;
      name = n;
    }

  try {
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (o_out->count()) cfg.out = out_dir;
    if (o_seed->count()) cfg.seed = seed;
    if (o_modes->count()) cfg.modes = modes;
    if (o_conv->count()) cfg.convention = convention_from_tag(convention);
    validate(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  Report report;
  try {
    report = command(cfg);
    write_json_file(cfg.out / (name + ".json"), report.to_json(cfg));
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << name << ": check aborted: " << e.what() << '\n';
    return kExitCheckFailed;
  }

  for (const auto& k : report.checks)
    out << (k.passed ? "PASS " : "FAIL ") << k.anchor << ' ' << k.name << ": " << fmt(k.value) << ' ' << k.relation
        << ' ' << fmt(k.limit) << '\n';
  out << name << ": " << (report.passed() ? "passed" : "failed") << '\n';
  return report.passed() ? kExitPass : kExitCheckFailed;
}

}  // namespace mapgroups::cli
