#pragma once

#include <filesystem>

#include "dollhouse/scene/bundle.hpp"

namespace dollhouse {

/// A bundle directory holds bundle.json, static.ply and object_<id>.ply.
/// bundle.json may carry a "manual_overrides" list of {"id", "label"?,
/// "movable"?} entries; load_bundle applies them after reading the objects.
void save_bundle(const SceneBundle& bundle, const std::filesystem::path& dir);

/// Throws io_failure, malformed_file and bundle_mismatch.
SceneBundle load_bundle(const std::filesystem::path& dir);

}  // namespace dollhouse
