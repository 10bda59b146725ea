#pragma once

#include <json.hpp>

#include "pmaps/aconvex.hpp"
#include "pmaps/cylinders.hpp"
#include "pmaps/thermo.hpp"
#include "pmaps/transfer.hpp"

namespace pmaps {

/// Keys: cond1, condC, beta, n_star, beta_type, markov, identity_32.
nlohmann::json to_json(const ValidationReport& v);
/// Scalars only unless include_vectors (weights and density values).
nlohmann::json to_json(const SpectralResult& s, bool include_vectors = false);
nlohmann::json to_json(const ConditionBResult& b);
nlohmann::json to_json(const ParabolicScaling& p);
nlohmann::json to_json(const PressureCurve& c);
nlohmann::json verdict_json(const PressureCurve& c);
nlohmann::json to_json(const LasotaYorkeResult& r);

}  // namespace pmaps
