#pragma once

#include <nlohmann/json.hpp>

#include "rmt/ensembles.hpp"

namespace rmt {

using ojson = nlohmann::ordered_json;

// {"beta": 2, "N": 4, "factors": [{"kind": "ginibre", "offset": 0}, ...]}
ojson spec_to_json(const ProductSpec& spec);

// Rejects unknown keys with UsageError.
ProductSpec spec_from_json(const nlohmann::json& j);

}  // namespace rmt
