#include "filtlab/serialize.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace filtlab {

using nlohmann::json;

namespace {

void expect_kind(const json& j, const char* kind) {
  if (!j.is_object() || !j.contains("kind") || j.at("kind") != kind)
    throw StructuralError(std::string("json: expected kind \"") + kind + "\"");
}

std::size_t read_size(const json& j) {
  if (!j.contains("size") || !j.at("size").is_number_unsigned())
    throw StructuralError("json: missing or invalid \"size\"");
  return j.at("size").get<std::size_t>();
}

json matrix_rows(const SemimetricMatrix& d) {
  json rows = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto r = d.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

SemimetricMatrix matrix_from(const json& j, std::size_t n) {
  const auto rows = j.at("d").get<std::vector<std::vector<double>>>();
  if (rows.size() != n) throw StructuralError("json: \"d\" row count differs from \"size\"");
  return SemimetricMatrix::from_rows(rows);
}

}  // namespace

json to_json(const SemimetricMatrix& d) {
  return json{{"kind", "semimetric"}, {"size", d.size()}, {"d", matrix_rows(d)}};
}

json to_json(const DiscreteMeasure& mu) {
  auto w = mu.weights();
  return json{{"kind", "measure"},
              {"size", mu.size()},
              {"w", std::vector<double>(w.begin(), w.end())}};
}

SemimetricMatrix semimetric_from_json(const json& j) {
  expect_kind(j, "semimetric");
  return matrix_from(j, read_size(j));
}

DiscreteMeasure measure_from_json(const json& j) {
  expect_kind(j, "measure");
  const std::size_t n = read_size(j);
  auto w = j.at("w").get<std::vector<double>>();
  if (w.size() != n) throw StructuralError("json: \"w\" length differs from \"size\"");
  return DiscreteMeasure(std::move(w));
}

std::uint64_t checksum(const SemimetricMatrix& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : d.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

json level_to_json(const SemimetricMatrix& d, std::size_t level) {
  return json{{"kind", "level"},
              {"size", d.size()},
              {"level", level},
              {"checksum", hex64(checksum(d))},
              {"d", matrix_rows(d)}};
}

SemimetricMatrix level_from_json(const json& j, std::size_t* level) {
  expect_kind(j, "level");
  SemimetricMatrix d = matrix_from(j, read_size(j));
  if (j.at("checksum").get<std::string>() != hex64(checksum(d)))
    throw StructuralError("json: level checksum mismatch");
  if (level) *level = j.at("level").get<std::size_t>();
  return d;
}

}  // namespace filtlab
