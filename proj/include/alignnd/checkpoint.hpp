#pragma once

#include <string>

#include "alignnd/model.hpp"

namespace alignnd {

// Text checkpoint: a short config header, then one record per parameter
// (name, shape, row-major decimal values). Values are written with 17
// significant digits so a round trip is exact.
std::string serialize_checkpoint(const ModelState& state);
ModelState deserialize_checkpoint(const std::string& text);

void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace alignnd
