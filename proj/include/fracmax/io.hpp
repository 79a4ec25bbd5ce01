#pragma once

// Domain and field specifications used by the command line, and deterministic
// file output.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fracmax/battery.hpp"
#include "fracmax/core.hpp"
#include "fracmax/domain_grid.hpp"
#include "fracmax/fields.hpp"

namespace fracmax {

/// "ball" (unit disc), "square" ((0,1)^2), "interval" ((0,1)), an inline JSON
/// descriptor, or a path to a JSON file holding one.
inline nlohmann::json domain_descriptor(const std::string& spec) {
  if (spec == "ball" || spec == "disc") return {{"type", "ball"}, {"center", {0.0, 0.0}}, {"radius", 1.0}};
  if (spec == "square") return {{"type", "box"}, {"lo", {0.0, 0.0}}, {"hi", {1.0, 1.0}}};
  if (spec == "interval") return {{"type", "box"}, {"lo", {0.0}}, {"hi", {1.0}}};
  if (!spec.empty() && spec.front() == '{') {
    try {
      return nlohmann::json::parse(spec);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("domain JSON: ") + e.what());
    }
  }
  std::ifstream in(spec);
  if (!in) throw ConfigError("unknown domain '" + spec + "' (not a name, JSON, or readable file)");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("domain file " + spec + ": " + e.what());
  }
}

/// Grid CSV as written by ScalarField::write_csv: ny lines of nx values,
/// "nan" off the domain.
inline ScalarField read_field_csv(const DomainPtr& dom, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read field file " + path);
  ScalarField f(dom);
  std::string line;
  int j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (j >= dom->ny) throw FieldError("field file has more rows than the grid");
    std::stringstream ss(line);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= dom->nx) throw FieldError("field file row longer than the grid");
      const std::size_t c = dom->index(i, j);
      if (dom->masked(c)) {
        if (cell == "nan") throw FieldError("field file has nan inside the domain");
        f[c] = parse_number(cell);
      }
      ++i;
    }
    if (i != dom->nx) throw FieldError("field file row shorter than the grid");
    ++j;
  }
  if (j != dom->ny) throw FieldError("field file has fewer rows than the grid");
  return f;
}

/// const:c | affine | bump_a | bump_b | band:seed | singular:p,beta
inline BatteryMember member_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "const") return constant_member(arg.empty() ? 1.0 : parse_number(arg));
  if (kind == "affine") return affine_member();
  if (kind == "bump_a") return bump_a();
  if (kind == "bump_b") return bump_b();
  if (kind == "band") return band_limited_member(static_cast<std::uint64_t>(arg.empty() ? 1.0 : parse_number(arg)));
  if (kind == "singular") {
    auto comma = arg.find(',');
    if (comma == std::string::npos) throw ConfigError("singular field needs p,beta");
    return singular_ball_member(parse_number(arg.substr(0, comma)), parse_number(arg.substr(comma + 1)));
  }
  throw ConfigError("unknown field '" + spec + "'");
}

/// A battery member spec or csv:path.
inline ScalarField field_from_spec(const DomainPtr& dom, const std::string& spec) {
  if (spec.rfind("csv:", 0) == 0) return read_field_csv(dom, spec.substr(4));
  return member_from_spec(spec).sample_on(dom);
}

/// Named subsets of the battery.
inline std::vector<BatteryMember> battery_from_spec(const std::string& spec) {
  if (spec == "all") return full_battery();
  if (spec == "band") return band_limited_battery();
  if (spec == "smooth") {
    std::vector<BatteryMember> out;
    for (auto& m : full_battery())
      if (m.smooth) out.push_back(m);
    return out;
  }
  if (spec == "metric") return {constant_member(1.0), bump_a(), bump_b()};
  return {member_from_spec(spec)};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

template <class Writer>
void write_with(const std::filesystem::path& path, Writer&& w) {
  std::ostringstream os;
  w(os);
  write_text(path, os.str());
}

}  // namespace fracmax
