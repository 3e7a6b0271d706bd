#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "mapgroups/errors.hpp"
#include "mapgroups/io.hpp"

using namespace mapgroups;

namespace {

std::shared_ptr<const Atlas> circle() { return std::make_shared<const Atlas>(Atlas::circle_two_charts()); }
std::shared_ptr<const Atlas> torus() { return std::make_shared<const Atlas>(Atlas::torus_four_charts()); }

Section random_section(const std::shared_ptr<const Atlas>& a, int comps, std::int64_t idx) {
  auto f = std::make_shared<const BandlimitedField>(random_decaying_field(a->dim(), 4, comps, 5, idx, 2.0));
  return Section::from_function(a, comps, [f](std::span<const double> p, std::span<double> o) { f->evaluate(p, o); });
}

// Text round trip through the serializer.
Json reparse(const Json& j) { return Json::parse(j.dump()); }

}  // namespace

TEST_CASE("field files") {
  const auto f = random_decaying_field(2, 3, 2, 1, 0, 1.5);
  const auto j = reparse(field_to_json(f, WeightConvention::Standard));
  CHECK(j.at(kConventionKey) == "standard-s");
  CHECK(j.at("kind") == "bandlimited");
  const auto back = std::get<BandlimitedField>(field_from_json(j));
  CHECK(back.coeffs() == f.coeffs());
  CHECK(back.is_real());

  const auto s = sample(f, GridDomain::window(Box{{0.5, 1.0}, {2.0, 3.0}}, {16, 16}));
  const auto js = reparse(field_to_json(s, WeightConvention::Paper));
  CHECK(js.at(kConventionKey) == "paper-s/2");
  const auto sb = std::get<SampledField>(field_from_json(js));
  CHECK(sb.values() == s.values());
  CHECK(sb.domain() == s.domain());
  CHECK_FALSE(sb.has_representative());

  auto bad = js;
  bad["mask"][0] = 0;
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = js;
  bad["values"].erase(0);
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = js;
  bad.erase(kConventionKey);
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = js;
  bad[kConventionKey] = "s";
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = js;
  bad["type"] = "section";
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = j;
  bad["coeffs"][0] = {1.0};
  CHECK_THROWS_AS(field_from_json(bad), InputError);
  bad = j;
  bad.erase("modes");
  CHECK_THROWS_AS(field_from_json(bad), InputError);
}

TEST_CASE("atlas descriptors") {
  for (const auto& a : {Atlas::circle_two_charts(), Atlas::torus_four_charts()}) {
    const auto j = reparse(atlas_to_json(a));
    const auto back = atlas_from_json(j);
    CHECK(back.fingerprint() == a.fingerprint());
    CHECK(atlas_from_json(Json{{"name", a.name()}}).fingerprint() == a.fingerprint());
  }
  const auto j = atlas_to_json(Atlas::circle_two_charts());
  CHECK(j.at("transitions")[1].at("kind") == "translation");

  auto tampered = j;
  tampered["charts"][0]["shift"][0] = 0.1;
  CHECK_THROWS_AS(atlas_from_json(tampered), InputError);
  tampered.erase("fingerprint");
  CHECK_NOTHROW(atlas_from_json(tampered));
  auto wrong_kind = j;
  wrong_kind["transitions"][1]["kind"] = "affine";
  CHECK_THROWS_AS(atlas_from_json(wrong_kind), InputError);
  CHECK_THROWS_AS(atlas_from_json(Json{{"name", "sphere"}}), InputError);

  // A corrupted transition survives loading so validation can catch it.
  auto corrupt = j;
  corrupt.erase("fingerprint");
  corrupt["transitions"][1]["offset"][0] = corrupt["transitions"][1]["offset"][0].get<double>() + 0.01;
  CHECK_FALSE(validate_atlas(atlas_from_json(corrupt)).passed);
}

TEST_CASE("section files") {
  for (const auto& a : {circle(), torus()}) {
    const auto s = random_section(a, 2, 3);
    const auto j = reparse(section_to_json(s, WeightConvention::Paper));
    CHECK(j.at("interpolation") == "representative");
    const auto back = section_from_json(j);
    CHECK(back.atlas().fingerprint() == a->fingerprint());
    for (std::size_t c = 0; c < a->size(); ++c) CHECK(back.piece(c).values() == s.piece(c).values());
    CHECK(back.interpolation() == "cubic");
    CHECK(section_to_json(back, WeightConvention::Paper).at("pieces") == j.at("pieces"));
  }
  auto j = section_to_json(random_section(circle(), 1, 4), WeightConvention::Paper);
  j["atlas_hash"] = "0000";
  CHECK_THROWS_AS(section_from_json(j), InputError);
  j = section_to_json(random_section(circle(), 1, 4), WeightConvention::Paper);
  j["pieces"][1]["values"][0] = j["pieces"][1]["values"][0].get<double>() + 1.0;
  CHECK_THROWS_AS(section_from_json(j), IncompatibilityError);
  j = section_to_json(random_section(circle(), 1, 4), WeightConvention::Paper);
  j["pieces"].erase(1);
  CHECK_THROWS_AS(section_from_json(j), InputError);
}

TEST_CASE("group section and curve files") {
  const auto a = circle();
  const auto so3 = make_group("SO3");
  const auto xi = random_section(a, 3, 6) * 0.5;
  const auto g = normalize(exp_section(xi, so3), 0.0);
  const auto j = reparse(group_section_to_json(g, WeightConvention::Paper));
  const auto back = group_section_from_json(j);
  CHECK(max_difference(back, g) == 0.0);
  CHECK(back.projection_log() == g.projection_log());
  CHECK(j.at("values")[0][0].size() == 9);

  auto bad = j;
  bad["values"][0][0][0] = 5.0;
  CHECK_THROWS_AS(group_section_from_json(bad), InputError);
  bad = j;
  bad["group"] = "SU2";
  CHECK_THROWS_AS(group_section_from_json(bad), InputError);

  const auto curve = constant_curve(xi, 2);
  const auto jc = reparse(curve_to_json(curve, WeightConvention::Paper));
  const auto cb = curve_from_json(jc);
  CHECK(cb.times == curve.times);
  CHECK(max_difference(evolve_raw(cb, *so3, 16), evolve_raw(curve, *so3, 16)) == 0.0);
  auto skew = jc;
  skew["times"][1] = 0.4;
  CHECK_THROWS_AS(curve_from_json(skew), InputError);
}

TEST_CASE("domain and certificate files") {
  const DomainSpec d{LevelSetDomain::named("ellipse", {{"a", 3.0}}), 0.4, 0.5};
  const auto j = reparse(domain_to_json(d));
  const auto back = domain_from_json(j);
  CHECK(back.domain.name() == "ellipse");
  CHECK(back.domain.params().at("a") == 3.0);
  CHECK(back.domain.params().at("b") == 1.0);
  CHECK(back.band == 0.4);
  CHECK(domain_from_json(Json{{"type", "domain"}, {kConventionKey, "paper-s/2"}, {"name", "disc"}}).domain.name() ==
        "disc");
  CHECK_THROWS_AS(domain_from_json(Json{{"type", "domain"}, {kConventionKey, "paper-s/2"}, {"name", "blob"}}),
                  InputError);
  CHECK_THROWS_AS(
      domain_from_json(Json{{"type", "domain"}, {kConventionKey, "paper-s/2"}, {"name", "disc"}, {"band", 9.0}}),
      InputError);

  const auto cert = shrink_domain(back.field(), 0.1, 20, 3);
  const auto jc = certificate_to_json(cert);
  CHECK(jc.at("samples") == 20);
  CHECK(jc.at("worst").size() == 5);
  CHECK(jc.at("margin").get<double>() == cert.margin);
  CHECK(jc.at(kConventionKey) == "paper-s/2");
}

TEST_CASE("spectrum csv and files") {
  const std::vector<double> sigma{1.0, 0.5, 1.0 / 3.0};
  const auto text = spectrum_csv(sigma);
  CHECK(text.rfind("k_index,sigma\n0,1\n", 0) == 0);
  CHECK(spectrum_from_csv(text) == sigma);
  CHECK_THROWS_AS(spectrum_from_csv("k,s\n0,1\n"), InputError);
  CHECK_THROWS_AS(spectrum_from_csv("k_index,sigma\n1,1\n"), InputError);
  CHECK_THROWS_AS(spectrum_from_csv("k_index,sigma\n0,abc\n"), InputError);

  const auto dir = std::filesystem::temp_directory_path() / "mapgroups_io_test";
  std::filesystem::remove_all(dir);
  const auto f = random_decaying_field(1, 3, 1, 2, 0, 1.0);
  write_json_file(dir / "nested" / "f.json", field_to_json(f, WeightConvention::Paper));
  const auto j = read_json_file(dir / "nested" / "f.json");
  CHECK(std::get<BandlimitedField>(field_from_json(j)).coeffs() == f.coeffs());
  write_text_file(dir / "broken.json", "{\"type\": ");
  CHECK_THROWS_AS(read_json_file(dir / "broken.json"), InputError);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), InputError);
  std::filesystem::remove_all(dir);
}
