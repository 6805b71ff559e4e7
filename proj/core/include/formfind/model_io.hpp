#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "formfind/model.hpp"

namespace formfind {

/// Parses a model document (JSON). Missing solver fields take their
/// defaults; elastic elements without `rest_metric` get the metric of the
/// document's own positions. Throws ParseError or ValidationError.
Model parse_model(std::string_view text);

/// Same as parse_model() on an already-decoded JSON value.
Model model_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const Model& model);

/// Canonical text form. Coordinates are written with round-trip precision,
/// so parse_model(serialize_model(m)) == m.
std::string serialize_model(const Model& model);

Model load_model(const std::filesystem::path& path);
void save_model(const Model& model, const std::filesystem::path& path);

}  // namespace formfind
