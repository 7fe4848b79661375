#pragma once

#include <string_view>

namespace plantroute {

// Config text for the bundled 12-node test case.
std::string_view example_plant_config();
std::string_view example_sequences_config();

}  // namespace plantroute
