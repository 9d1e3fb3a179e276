#pragma once

// Internal JSON glue shared between translation units; not installed.

#include "json.hpp"
#include "mtrl/mdp.hpp"

namespace mtrl {

nlohmann::json mdp_to_json_obj(const TabularMdp& m);
TabularMdp mdp_from_json_obj(const nlohmann::json& j);

}  // namespace mtrl
