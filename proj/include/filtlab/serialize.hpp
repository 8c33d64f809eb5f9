#pragma once

// JSON forms used by the cache and the CLI:
//   {"kind": "semimetric", "size": n, "d": [[...], ...]}
//   {"kind": "measure",    "size": n, "w": [...]}
//   {"kind": "level",      "size": n, "level": k, "checksum": "...", "d": [[...]]}

#include <cstdint>
#include <string>

#include "json.hpp"
#include "filtlab/mmspace.hpp"

namespace filtlab {

nlohmann::json to_json(const SemimetricMatrix& d);
nlohmann::json to_json(const DiscreteMeasure& mu);
SemimetricMatrix semimetric_from_json(const nlohmann::json& j);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

// FNV-1a over the little-endian bytes of the entries.
std::uint64_t checksum(const SemimetricMatrix& d);
std::string hex64(std::uint64_t v);

nlohmann::json level_to_json(const SemimetricMatrix& d, std::size_t level);
// Verifies the checksum; throws StructuralError on mismatch.
SemimetricMatrix level_from_json(const nlohmann::json& j, std::size_t* level = nullptr);

}  // namespace filtlab
