#pragma once

// Content-addressed result cache. An entry is keyed by the hash of a
// canonical JSON description of what was computed; the description is
// stored next to the payload and checked on every hit, so a hash collision
// degrades to a miss. Eviction is manual (delete the directory).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "filtlab/mmspace.hpp"

namespace filtlab {

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
// Hash of the canonical (sorted-key, compact) dump.
std::string json_hash(const nlohmann::json& j);

// Write to a sibling temporary file, then rename over the target.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

class ResultCache {
 public:
  // An empty directory disables the cache.
  explicit ResultCache(std::filesystem::path dir = {});

  bool enabled() const { return !dir_.empty(); }
  std::optional<nlohmann::json> get(const nlohmann::json& key) const;
  void put(const nlohmann::json& key, const nlohmann::json& payload) const;

  std::optional<SemimetricMatrix> get_matrix(const nlohmann::json& key) const;
  void put_matrix(const nlohmann::json& key, const SemimetricMatrix& d) const;

  std::size_t hits() const { return hits_; }

 private:
  std::filesystem::path file_for(const nlohmann::json& key) const;

  std::filesystem::path dir_;
  mutable std::size_t hits_ = 0;
};

}  // namespace filtlab
