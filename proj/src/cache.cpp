#include "filtlab/cache.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "filtlab/serialize.hpp"

namespace filtlab {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string json_hash(const json& j) { return hex64(fnv1a(j.dump())); }

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResultCache::file_for(const json& key) const {
  return dir_ / (json_hash(key) + ".json");
}

std::optional<json> ResultCache::get(const json& key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(file_for(key));
  if (!in) return std::nullopt;
  json entry = json::parse(in, nullptr, false);
  if (entry.is_discarded() || !entry.contains("key") || entry["key"] != key || !entry.contains("payload"))
    return std::nullopt;
  ++hits_;
  return entry["payload"];
}

void ResultCache::put(const json& key, const json& payload) const {
  if (!enabled()) return;
  atomic_write(file_for(key), json{{"key", key}, {"payload", payload}}.dump());
}

std::optional<SemimetricMatrix> ResultCache::get_matrix(const json& key) const {
  auto p = get(key);
  if (!p) return std::nullopt;
  return semimetric_from_json(*p);
}

void ResultCache::put_matrix(const json& key, const SemimetricMatrix& d) const { put(key, to_json(d)); }

}  // namespace filtlab
