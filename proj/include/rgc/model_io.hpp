#pragma once

// Self-describing JSON archives for trained models. All numeric payloads are
// IEEE doubles written with round-trip precision; matrices are stored
// row-major together with their shape.

#include "rgc/classifiers.hpp"

#include <json.hpp>

#include <filesystem>

namespace rgc {

inline constexpr int kModelFormatVersion = 1;

nlohmann::json to_json(const RgcModel& model);
nlohmann::json to_json(const CspModel& model);

/// Throws FormatError on a missing field, wrong kind or unsupported version.
RgcModel rgc_model_from_json(const nlohmann::json& j);
CspModel csp_model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const RgcModel& model);
void save_model(const std::filesystem::path& path, const CspModel& model);
RgcModel load_rgc_model(const std::filesystem::path& path);
CspModel load_csp_model(const std::filesystem::path& path);

}  // namespace rgc
