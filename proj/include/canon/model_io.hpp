#pragma once

// Model files, canonical serialization, and run manifests.
//
// Model file (JSON), one of:
//   {"fermi":  {"k": 2, "m": 2, "beta": 1.0, "v": [0, 1], "n": [2, 2]}}
//   {"custom": {"k": 2, "m": 2, "phi": [[0, 0, "-inf"], [0, -1, -3]]}}
// Each phi row has k+1 entries; "-inf" marks zero weight. Unknown keys are
// rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "canon/measures.hpp"

namespace canon {

struct CustomTables {
  int k = 0;
  int m = 0;
  std::vector<std::vector<ExtReal>> phi;
};

struct ModelFile {
  std::optional<FermiSpec> fermi;
  std::optional<CustomTables> custom;
};

ModelFile parse_model(const nlohmann::json& j);
ModelFile load_model(const std::string& path);
nlohmann::json to_json(const ModelFile& model);
ModelSpec build_model(const ModelFile& model);

// 17 significant digits; infinities as "inf" / "-inf".
std::string format_real(double x);

// JSON number, or "inf"/"-inf" string for infinite values.
nlohmann::json real_to_json(double x);

// k, m, delta and every phi table, one line each.
std::string canonical_serialization(const ModelSpec& spec);

// FNV-1a 64 of the canonical serialization, 16 hex digits.
std::string model_hash(const ModelSpec& spec);

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace canon
