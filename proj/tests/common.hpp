#pragma once

#include <string>

#include "framewright/device.hpp"
#include "framewright/library.hpp"

namespace fwtest {

inline std::string data_path(const std::string &rel) { return std::string(FW_DATA_DIR) + "/" + rel; }

inline const framewright::device::DeviceModel &table1() {
  static const auto dev = framewright::device::load_device_file(data_path("table1.json"));
  return dev;
}

// Synthesized and Ramsey-calibrated library checked into data/.
inline const framewright::forge::GateLibrary &bundled_library() {
  static const auto lib = framewright::forge::load_library_file(table1(), data_path("library.json"));
  return lib;
}

inline constexpr std::size_t kQ8 = 0, kQ9 = 1, kQ12 = 2;

} // namespace fwtest
