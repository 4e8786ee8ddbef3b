#pragma once

#include <string>

#include <json.hpp>

#include "veq/conditions.hpp"
#include "veq/geometry.hpp"
#include "veq/solver.hpp"

namespace veq {

// JSON views of the result types. Keys are emitted in sorted order and numbers
// in shortest round-trip form, so identical runs produce identical bytes.
nlohmann::json to_json(const Counterexample& ce);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const GridDomain& grid);
nlohmann::json to_json(const SolutionSet& set);
nlohmann::json to_json(const CompareReport& report);
nlohmann::json to_json(const CoercivityCertificate& cert);

// Pretty two-space indent plus trailing newline.
std::string dump_report(const nlohmann::json& doc);

}  // namespace veq
