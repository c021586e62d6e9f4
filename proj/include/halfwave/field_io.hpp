//==============================================================================
// field_io.hpp
// Field persistence.
//   Binary container:  "HWFIELD1" | uint64 header bytes | JSON header |
//                      n_points x (double re, double im), little endian.
//   The JSON header carries grid parameters and arbitrary metadata.
//   CSV: columns x, Re, Im.
//==============================================================================
#pragma once

#include <string>

#include "halfwave/spectral.hpp"
#include "json.hpp"

namespace hw {

using json = nlohmann::json;

struct StoredField {
  Field field;
  json meta;
};

void write_field(const std::string& path, const Field& f, const json& meta = json::object());
// grid_hint lets callers reuse an existing compatible Grid instead of building a new one.
StoredField read_field(const std::string& path, const GridPtr& grid_hint = nullptr);
void write_field_csv(const std::string& path, const Field& f);

void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

}  // namespace hw
