#pragma once

#include <filesystem>
#include <string>

#include "dollhouse/scene/geometry.hpp"

namespace dollhouse {

/// Reads the `vertex` element of an ASCII or binary little-endian PLY file.
/// x/y/z may be any scalar type; an integer `label` property is picked up when
/// present. Elements after `vertex` are ignored.
PointCloud load_ply(const std::filesystem::path& path);
PointCloud parse_ply(const std::string& bytes);

/// Binary files store doubles, so a binary round trip is lossless.
void save_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary = true);
std::string serialize_ply(const PointCloud& cloud, bool binary = true);

}  // namespace dollhouse
