#pragma once

#include "a2d/nn.hpp"

namespace a2d {

// Write access to a model's parameters for the optimisers. Everything else
// sees models as immutable.
class ParameterAccess {
 public:
  static std::vector<Layer>& layers(Model& model) { return model.layers_; }
};

}  // namespace a2d
