#pragma once

#include <memory>

#include "dollhouse/scene/generator.hpp"

namespace dollhouse::testing {

/// Default generated scene without sensor noise, built once per process.
inline std::shared_ptr<const SceneBundle> default_bundle() {
  static const std::shared_ptr<const SceneBundle> bundle = [] {
    SceneSpec spec = default_scene_spec();
    spec.noise_sigma = 0.0;
    return std::make_shared<const SceneBundle>(generate_scene(spec).ground_truth);
  }();
  return bundle;
}

}  // namespace dollhouse::testing
