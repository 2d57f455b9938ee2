#pragma once

#include <json.hpp>

#include "recert/re_spectra.hpp"
#include "recert/solvers.hpp"

namespace recert {

// Stable snake_case JSON views of the report types. Non-finite values map to
// JSON null (so an infinite restricted-eigenvalue constant serializes as
// "k": null next to "inv_k": 0).
nlohmann::json to_json(const SparseEigResult& r);
nlohmann::json to_json(const ReEstimate& r);
nlohmann::json to_json(const MaureyResult& r);
nlohmann::json to_json(const IsometryReport& r);
nlohmann::json to_json(const ReductionReport& r);
nlohmann::json to_json(const HullCheckReport& r);
nlohmann::json to_json(const BernsteinReport& r);
nlohmann::json to_json(const SolveResult& r);

}  // namespace recert
