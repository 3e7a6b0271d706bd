#pragma once

// JSON and CSV file formats. Every JSON document carries "type" and
// "weight_exponent_convention"; readers throw InputError on anything malformed.

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mapgroups/direct_limit.hpp"
#include "mapgroups/domain_flow.hpp"
#include "mapgroups/lie_group.hpp"
#include "mapgroups/section.hpp"
#include "mapgroups/sobolev.hpp"

namespace mapgroups {

using Json = nlohmann::json;

inline constexpr const char* kConventionKey = "weight_exponent_convention";

/// Checks "type" and returns the convention tag of a document.
WeightConvention expect_document(const Json& j, const std::string& type);

Json field_to_json(const BandlimitedField& f, WeightConvention c);
Json field_to_json(const SampledField& f, WeightConvention c);
using AnyField = std::variant<BandlimitedField, SampledField>;
/// Sampled fields come back values-only (cubic interpolation).
AnyField field_from_json(const Json& j);

Json atlas_to_json(const Atlas& a, WeightConvention c = WeightConvention::Paper);
/// A bare {"name": ...} selects a built-in; full descriptors are checked against
/// their "fingerprint" when one is present.
Atlas atlas_from_json(const Json& j);

Json section_to_json(const Section& s, WeightConvention c);
Section section_from_json(const Json& j);

Json group_section_to_json(const GroupSection& g, WeightConvention c);
GroupSection group_section_from_json(const Json& j);

Json curve_to_json(const TimeSampledCurve& curve, WeightConvention c);
TimeSampledCurve curve_from_json(const Json& j);

struct DomainSpec {
  LevelSetDomain domain;
  double band = 0.5;
  double plateau = 0.5;

  FlowField field() const { return FlowField(domain, band, plateau); }
};

Json domain_to_json(const DomainSpec& d, WeightConvention c = WeightConvention::Paper);
DomainSpec domain_from_json(const Json& j);

Json certificate_to_json(const ShrinkCertificate& cert, WeightConvention c = WeightConvention::Paper);

/// Rows (k_index, sigma) under a header line.
std::string spectrum_csv(const std::vector<double>& sigma);
std::vector<double> spectrum_from_csv(const std::string& text);

Json read_json_file(const std::filesystem::path& path);
/// Two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mapgroups
