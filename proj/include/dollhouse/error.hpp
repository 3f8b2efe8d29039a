#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dollhouse {

enum class ErrorKind {
  malformed_file,
  unsupported_format,
  io_failure,
  empty_cloud,
  non_positive_voxel,
  invalid_spec,
  invalid_argument,
  degenerate_source,
  no_plane_found,
  overlapping_clusters,
  start_blocked,
  goal_blocked,
  no_path_found,
  insufficient_points,
  no_grasp_found,
  no_feasible_pose,
  illegal_command,
  empty_capture,
  bundle_mismatch,
};

/// snake_case name of the kind; doubles as the mission failure tag.
std::string_view to_tag(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_tag(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dollhouse
