#pragma once

#include <map>
#include <string>

#include "framewright/forge.hpp"

namespace framewright::forge {

// Synthesized gates keyed by kind. Each entry is rebuilt from its recipe on load, so the
// file only stores drive parameters, durations and phases.
class GateLibrary {
public:
  void put(Synthesis s);
  bool contains(GateKind k) const { return gates_.count(k) != 0; }
  const Synthesis &at(GateKind k) const;
  Synthesis &at(GateKind k);
  const GateInstance &instance(GateKind k) const { return at(k).instance; }
  const std::map<GateKind, Synthesis> &gates() const { return gates_; }

private:
  std::map<GateKind, Synthesis> gates_;
};

// Deterministic text: keys sorted, doubles printed round-trip exact.
std::string library_to_json(const DeviceModel &dev, const GateLibrary &lib);
GateLibrary library_from_json(const DeviceModel &dev, const std::string &text);
GateLibrary load_library_file(const DeviceModel &dev, const std::string &path);

} // namespace framewright::forge
