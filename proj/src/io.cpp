#include "mapgroups/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mapgroups/errors.hpp"

namespace mapgroups {

namespace {

// Library exceptions from malformed documents become InputError.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed ") + what + ": " + e.what());
  }
}

Json header(const std::string& type, WeightConvention c) {
  Json j;
  j["type"] = type;
  j[kConventionKey] = convention_tag(c);
  return j;
}

Json box_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }
Box box_from(const Json& j) { return Box{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()}; }

std::vector<double> finite_array(const Json& j, const char* what) {
  auto v = j.get<std::vector<double>>();
  for (double x : v)
    if (!std::isfinite(x)) throw InputError(std::string("non-finite entry in ") + what);
  return v;
}

// Sampled payload without the document header.
Json sampled_payload(const SampledField& f) {
  const auto& d = f.domain();
  Json j;
  j["kind"] = "sampled";
  j["m"] = d.dim();
  j["components"] = f.components();
  j["grid"] = d.counts();
  j["window"] = d.is_full() ? Json(nullptr) : box_json(d.window_box());
  std::vector<std::size_t> mask(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mask[i] = d.grid_flat(i);
  j["mask"] = mask;
  j["values"] = f.values();
  return j;
}

SampledField sampled_from(const Json& j) {
  if (j.at("kind").get<std::string>() != "sampled") throw InputError("expected a sampled field");
  const int m = j.at("m").get<int>();
  auto counts = j.at("grid").get<std::vector<int>>();
  if (static_cast<int>(counts.size()) != m) throw InputError("grid must list one count per axis");
  const GridDomain d = j.at("window").is_null() ? GridDomain::full_torus(m, counts)
                                                : GridDomain::window(box_from(j.at("window")), counts);
  if (j.contains("mask")) {
    const auto mask = j.at("mask").get<std::vector<std::size_t>>();
    bool same = mask.size() == d.size();
    for (std::size_t i = 0; same && i < mask.size(); ++i) same = mask[i] == d.grid_flat(i);
    if (!same) throw InputError("mask does not match the window and grid");
  }
  const int comps = j.at("components").get<int>();
  auto values = finite_array(j.at("values"), "field values");
  if (comps < 1 || values.size() != d.size() * static_cast<std::size_t>(comps))
    throw InputError("field value count does not match the mask");
  return SampledField(d, comps, std::move(values));
}

Json bandlimited_payload(const BandlimitedField& f) {
  Json j;
  j["kind"] = "bandlimited";
  j["m"] = f.dim();
  j["modes"] = f.modes();
  j["components"] = f.components();
  j["reality"] = f.is_real() ? "real" : "complex";
  Json c = Json::array();
  for (const auto& z : f.coeffs()) c.push_back({z.real(), z.imag()});
  j["coeffs"] = std::move(c);
  return j;
}

BandlimitedField bandlimited_from(const Json& j) {
  const std::string reality = j.at("reality").get<std::string>();
  if (reality != "real" && reality != "complex") throw InputError("reality must be 'real' or 'complex'");
  std::vector<std::complex<double>> c;
  for (const auto& z : j.at("coeffs")) {
    const auto p = finite_array(z, "coefficients");
    if (p.size() != 2) throw InputError("coefficients are [re, im] pairs");
    c.emplace_back(p[0], p[1]);
  }
  return BandlimitedField(j.at("m").get<int>(), j.at("modes").get<int>(), j.at("components").get<int>(), std::move(c),
                          reality == "real");
}

Json section_payload(const Section& s) {
  Json j;
  j["atlas"] = atlas_to_json(s.atlas());
  j["atlas"].erase("type");
  j["atlas"].erase(kConventionKey);
  j["atlas_hash"] = s.atlas().fingerprint();
  j["components"] = s.components();
  j["tolerance"] = s.tolerance();
  j["interpolation"] = s.interpolation();
  Json pieces = Json::array();
  for (const auto& p : s.pieces()) pieces.push_back(sampled_payload(p));
  j["pieces"] = std::move(pieces);
  return j;
}

std::shared_ptr<const Atlas> atlas_of(const Json& j) {
  auto a = std::make_shared<const Atlas>(atlas_from_json(j.at("atlas")));
  if (j.contains("atlas_hash") && j.at("atlas_hash").get<std::string>() != a->fingerprint())
    throw InputError("atlas hash does not match the atlas descriptor");
  return a;
}

Section section_from_payload(const Json& j) {
  const auto atlas = atlas_of(j);
  std::vector<SampledField> pieces;
  for (const auto& p : j.at("pieces")) pieces.push_back(sampled_from(p));
  if (pieces.size() != atlas->size()) throw InputError("one piece per chart expected");
  for (std::size_t c = 0; c < pieces.size(); ++c)
    if (!(pieces[c].domain() == atlas->chart(c).witness_domain()))
      throw InputError("piece " + std::to_string(c) + " is not on its chart's witness grid");
  return Section(atlas, std::move(pieces), j.value("tolerance", kDefaultCompatibilityTol));
}

}  // namespace

WeightConvention expect_document(const Json& j, const std::string& type) {
  return guarded("document", [&] {
    if (!j.is_object()) throw InputError("expected a JSON object");
    if (j.at("type").get<std::string>() != type)
      throw InputError("expected a '" + type + "' document, got '" + j.at("type").get<std::string>() + "'");
    try {
      return convention_from_tag(j.at(kConventionKey).get<std::string>());
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
  });
}

Json field_to_json(const BandlimitedField& f, WeightConvention c) {
  Json j = header("field", c);
  j.update(bandlimited_payload(f));
  return j;
}

Json field_to_json(const SampledField& f, WeightConvention c) {
  Json j = header("field", c);
  j.update(sampled_payload(f));
  return j;
}

AnyField field_from_json(const Json& j) {
  expect_document(j, "field");
  return guarded("field", [&]() -> AnyField {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bandlimited") return bandlimited_from(j);
    if (kind == "sampled") return sampled_from(j);
    throw InputError("unknown field kind '" + kind + "'");
  });
}

Json atlas_to_json(const Atlas& a, WeightConvention c) {
  Json j = header("atlas", c);
  j["name"] = a.name();
  j["dim"] = a.dim();
  j["plateau"] = a.plateau_fraction();
  Json charts = Json::array();
  for (const auto& ch : a.charts())
    charts.push_back({{"sign", ch.sign},
                      {"shift", ch.shift},
                      {"codomain", box_json(ch.codomain)},
                      {"witness", box_json(ch.witness)},
                      {"grid", ch.grid}});
  j["charts"] = std::move(charts);
  Json tr = Json::array();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a.size(); ++k) {
      const auto& t = a.transition(i, k);
      tr.push_back({{"i", i}, {"j", k}, {"kind", t.kind()}, {"sign", t.sign}, {"offset", t.offset}});
    }
  j["transitions"] = std::move(tr);
  j["fingerprint"] = a.fingerprint();
  return j;
}

Atlas atlas_from_json(const Json& j) {
  return guarded("atlas", [&] {
    if (j.is_string()) return Atlas::builtin(j.get<std::string>());
    if (!j.contains("charts")) return Atlas::builtin(j.at("name").get<std::string>());
    std::vector<Chart> charts;
    for (const auto& c : j.at("charts"))
      charts.push_back(Chart{c.at("sign").get<std::vector<int>>(), finite_array(c.at("shift"), "chart shift"),
                             box_from(c.at("codomain")), box_from(c.at("witness")), c.at("grid").get<std::vector<int>>()});
    Atlas a(j.value("name", std::string("custom")), std::move(charts), j.value("plateau", 0.5));
    if (j.contains("transitions"))
      for (const auto& t : j.at("transitions")) {
        const auto i = t.at("i").get<std::size_t>(), k = t.at("j").get<std::size_t>();
        if (i >= a.size() || k >= a.size()) throw InputError("transition index out of range");
        Transition tr{t.at("sign").get<std::vector<int>>(), finite_array(t.at("offset"), "transition offset")};
        if (t.contains("kind") && t.at("kind").get<std::string>() != tr.kind())
          throw InputError("transition kind tag does not match its sign pattern");
        a.set_transition(i, k, std::move(tr));
      }
    if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != a.fingerprint())
      throw InputError("atlas fingerprint does not match its descriptor");
    return a;
  });
}

Json section_to_json(const Section& s, WeightConvention c) {
  Json j = header("section", c);
  j.update(section_payload(s));
  return j;
}

Section section_from_json(const Json& j) {
  expect_document(j, "section");
  return guarded("section", [&] { return section_from_payload(j); });
}

Json group_section_to_json(const GroupSection& g, WeightConvention c) {
  Json j = header("group-section", c);
  j["group"] = g.group().name();
  j["atlas"] = atlas_to_json(g.atlas());
  j["atlas"].erase("type");
  j["atlas"].erase(kConventionKey);
  j["atlas_hash"] = g.atlas().fingerprint();
  j["tolerance"] = g.tolerance();
  j["matrix_dim"] = g.group().matrix_dim();
  Json charts = Json::array();
  for (const auto& chart : g.values()) {
    Json nodes = Json::array();
    for (const auto& m : chart) {
      std::vector<double> flat;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index q = 0; q < m.cols(); ++q) flat.push_back(m(r, q));
      nodes.push_back(flat);
    }
    charts.push_back(std::move(nodes));
  }
  j["values"] = std::move(charts);
  j["projection_log"] = g.projection_log();
  return j;
}

GroupSection group_section_from_json(const Json& j) {
  expect_document(j, "group-section");
  return guarded("group section", [&] {
    const auto atlas = atlas_of(j);
    const auto group = make_group(j.at("group").get<std::string>());
    const int d = group->matrix_dim();
    std::vector<std::vector<Eigen::MatrixXd>> values;
    for (const auto& chart : j.at("values")) {
      auto& out = values.emplace_back();
      for (const auto& node : chart) {
        const auto flat = finite_array(node, "group section");
        if (flat.size() != static_cast<std::size_t>(d * d)) throw InputError("matrix entry count does not match the group");
        Eigen::MatrixXd m(d, d);
        for (int r = 0; r < d; ++r)
          for (int q = 0; q < d; ++q) m(r, q) = flat[r * d + q];
        out.push_back(std::move(m));
      }
    }
    GroupSection g(atlas, group, std::move(values), j.value("tolerance", kDefaultCompatibilityTol));
    if (j.contains("projection_log")) g.append_log(j.at("projection_log").get<std::vector<std::string>>());
    return g;
  });
}

Json curve_to_json(const TimeSampledCurve& curve, WeightConvention c) {
  Json j = header("curve", c);
  j["times"] = curve.times;
  Json s = Json::array();
  for (const auto& sec : curve.sections) s.push_back(section_payload(sec));
  j["sections"] = std::move(s);
  return j;
}

TimeSampledCurve curve_from_json(const Json& j) {
  expect_document(j, "curve");
  return guarded("curve", [&] {
    TimeSampledCurve c;
    c.times = finite_array(j.at("times"), "curve times");
    for (const auto& s : j.at("sections")) c.sections.push_back(section_from_payload(s));
    c.validate();
    return c;
  });
}

Json domain_to_json(const DomainSpec& d, WeightConvention c) {
  Json j = header("domain", c);
  j["name"] = d.domain.name();
  j["params"] = d.domain.params();
  j["scale"] = d.domain.scale();
  j["band"] = d.band;
  j["plateau"] = d.plateau;
  return j;
}

DomainSpec domain_from_json(const Json& j) {
  expect_document(j, "domain");
  return guarded("domain", [&] {
    const auto params = j.value("params", std::map<std::string, double>{});
    DomainSpec d{LevelSetDomain::named(j.at("name").get<std::string>(), params, j.value("scale", 1.0)),
                 j.value("band", 0.5), j.value("plateau", 0.5)};
    d.field();  // validates band and plateau
    return d;
  });
}

Json certificate_to_json(const ShrinkCertificate& cert, WeightConvention c) {
  Json j = header("certificate", c);
  j["domain"] = cert.domain;
  j["t0"] = cert.t0;
  j["steps"] = cert.steps;
  j["samples"] = cert.samples;
  j["seed"] = cert.seed;
  j["margin"] = cert.margin;
  j["k_displacement"] = cert.k_displacement;
  j["k_fixed"] = cert.k_fixed;
  j["passed"] = cert.passed;
  Json worst = Json::array();
  for (const auto& w : cert.worst)
    worst.push_back({{"index", w.index}, {"start", w.start}, {"end", w.end}, {"g", w.g_end}});
  j["worst"] = std::move(worst);
  return j;
}

std::string spectrum_csv(const std::vector<double>& sigma) {
  std::ostringstream os;
  os.precision(17);
  os << "k_index,sigma\n";
  for (std::size_t k = 0; k < sigma.size(); ++k) os << k << ',' << sigma[k] << '\n';
  return os.str();
}

std::vector<double> spectrum_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "k_index,sigma") throw InputError("spectrum CSV needs a k_index,sigma header");
  std::vector<double> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError("spectrum row without a comma: " + line);
    try {
      std::size_t used = 0;
      const long k = std::stol(line.substr(0, comma), &used);
      if (used != comma || k != static_cast<long>(out.size())) throw InputError("spectrum rows must be numbered 0, 1, ...");
      const std::string v = line.substr(comma + 1);
      const double s = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(s)) throw InputError("bad sigma value: " + v);
      out.push_back(s);
    } catch (const std::logic_error&) {
      throw InputError("unparseable spectrum row: " + line);
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace mapgroups
