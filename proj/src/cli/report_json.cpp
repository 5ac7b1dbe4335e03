#include "cli/report_json.hpp"

namespace orbitinv::cli {

using nlohmann::json;

const char* to_string(ResonanceLabel::Kind kind) {
  return kind == ResonanceLabel::Kind::Periodic ? "periodic" : "quasi-periodic";
}

json to_json(const PhaseState& s) {
  return {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"p", s.p}, {"r", s.r}};
}

json to_json(const FrequencyEstimate& f) {
  return {{"f1", f.f1}, {"f2", f.f2}, {"confidence1", f.confidence1}, {"confidence2", f.confidence2}};
}

json to_json(const ResonanceLabel& label) {
  json j{{"kind", to_string(label.kind)}};
  if (label.periodic()) {
    j["m"] = label.m;
    j["n"] = label.n;
    j["period"] = label.period;
  }
  return j;
}

json to_json(const PeriodicOrbit& orbit) {
  json j{{"initial", to_json(orbit.initial)},
         {"period", orbit.period},
         {"closure", orbit.closure},
         {"iterations", orbit.iterations},
         {"self_intersecting", orbit.self_intersecting},
         {"curve_vertices", orbit.curve.vertices().size()},
         {"signed_area", orbit.curve.signed_area()},
         {"orientation", orbit.curve.orientation()}};
  if (orbit.label) j["label"] = to_json(*orbit.label);
  return j;
}

json to_json(const InvariantReport& rep) {
  return {{"I7", rep.I7},
          {"I8", rep.I8},
          {"I9", rep.I9},
          {"N7", rep.N7},
          {"N8", rep.N8},
          {"N9", rep.N9},
          {"residual_78", rep.residual_78},
          {"residual_89", rep.residual_89},
          {"tolerance", rep.tolerance},
          {"resolution", rep.resolution},
          {"holds_time", rep.holds_time},
          {"holds_contour", rep.holds_contour},
          {"holds", rep.holds},
          {"self_intersecting", rep.self_intersecting},
          {"period", rep.period},
          {"closure", rep.closure}};
}

json to_json(const GridGeometry& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"hx", g.hx}, {"hy", g.hy}};
}

}  // namespace orbitinv::cli
