#pragma once

#include <string>
#include <vector>

#include "fusecat/network.hpp"

namespace fusecat {

// Published architecture geometries. Supported (name, scale) pairs:
//   alexnet   227 (native), 451 (converted, dense evaluation)
//   vgg16     224 (native), 448 (converted)
//   vgg19     224 (native)
//   googlenet 224 (native)
//   tiny       32 (native; 4 weight layers, desk-scale testing)
// Jittered scales return the convolutionalized variant of the native graph.
NetworkSpec preset(const std::string& name, int scale);

std::vector<std::string> preset_names();

} // namespace fusecat
