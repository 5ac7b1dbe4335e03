#pragma once

#include <json.hpp>

#include "orbitinv/helmholtz.hpp"
#include "orbitinv/invariants.hpp"
#include "orbitinv/resonance.hpp"

namespace orbitinv::cli {

nlohmann::json to_json(const PhaseState& s);
nlohmann::json to_json(const FrequencyEstimate& f);
nlohmann::json to_json(const ResonanceLabel& label);
/// Orbit summary; the trajectory and curve go to CSV instead.
nlohmann::json to_json(const PeriodicOrbit& orbit);
nlohmann::json to_json(const InvariantReport& rep);
nlohmann::json to_json(const GridGeometry& g);

const char* to_string(ResonanceLabel::Kind kind);

}  // namespace orbitinv::cli
