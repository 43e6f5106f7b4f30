#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "framewright/error.hpp"
#include "framewright/library.hpp"

namespace framewright::forge {

using json = nlohmann::json;

void GateLibrary::put(Synthesis s) {
  const GateKind k = s.recipe.kind;
  gates_.insert_or_assign(k, std::move(s));
}

const Synthesis &GateLibrary::at(GateKind k) const {
  auto it = gates_.find(k);
  if (it == gates_.end())
    throw ValidationError("gate library has no entry for " + std::string(to_string(k)));
  return it->second;
}

Synthesis &GateLibrary::at(GateKind k) {
  return const_cast<Synthesis &>(std::as_const(*this).at(k));
}

std::string library_to_json(const DeviceModel &dev, const GateLibrary &lib) {
  json doc;
  doc["format"] = "framewright-library/1";
  json gates = json::object();
  for (const auto &[k, s] : lib.gates()) {
    const auto &in = s.instance;
    json e;
    e["driven"] = dev.qubit(s.recipe.driven).label;
    e["idle"] = dev.qubit(s.recipe.idle).label;
    e["params"] = s.recipe.params;
    e["duration_ns"] = in.duration_ns;
    e["phases_rad"] = in.calibrated_phases;
    e["static_post_rad"] = in.static_post;
    e["infidelity"] = s.infidelity;
    gates[std::string(to_string(k))] = e;
  }
  doc["gates"] = gates;
  return doc.dump(2) + "\n";
}

GateLibrary library_from_json(const DeviceModel &dev, const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("gate library: ") + e.what(), "");
  }
  if (doc.value("format", "") != "framewright-library/1")
    throw ParseError("gate library: unknown or missing format tag", "format");
  if (!doc.contains("gates") || !doc["gates"].is_object())
    throw ParseError("gate library: missing gates object", "gates");

  GateLibrary lib;
  for (const auto &[name, e] : doc["gates"].items()) {
    const std::string field = "gates." + name;
    GateRecipe r;
    try {
      r.kind = gate_kind_from_string(name);
      r.driven = dev.index_of(e.at("driven").get<std::string>());
      r.idle = dev.index_of(e.at("idle").get<std::string>());
      r.params = e.at("params").get<std::map<std::string, double>>();
    } catch (const json::exception &ex) {
      throw ParseError(std::string("gate library: ") + ex.what(), field);
    }
    Synthesis s = realize(dev, r);
    const double stored = e.value("duration_ns", -1.0);
    if (std::abs(stored - s.instance.duration_ns) > 1e-9)
      throw ParseError("gate library: stored duration does not match the recipe",
                       field + ".duration_ns");
    auto phases = e.value("phases_rad", std::vector<double>{});
    if (!phases.empty() && static_cast<int>(phases.size()) != traits(r.kind).phase_count)
      throw ParseError("gate library: wrong number of calibrated phases", field + ".phases_rad");
    s.instance.calibrated_phases = std::move(phases);
    lib.put(std::move(s));
  }
  return lib;
}

GateLibrary load_library_file(const DeviceModel &dev, const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open gate library '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return library_from_json(dev, ss.str());
}

} // namespace framewright::forge
