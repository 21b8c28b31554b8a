#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "caero/dataset.hpp"
#include "caero/ledger.hpp"
#include "caero/simlab.hpp"
#include "caero/solver.hpp"

namespace caero {

using Json = nlohmann::json;

// Readers leave absent keys at their defaults and reject unknown keys.
void to_json(Json& j, const HypothesisSpec& v);
void from_json(const Json& j, HypothesisSpec& v);
void to_json(Json& j, const TestParams& v);
void from_json(const Json& j, TestParams& v);
void to_json(Json& j, const WealthSnapshot& v);
void to_json(Json& j, const SpendingScheme& v);
void from_json(const Json& j, SpendingScheme& v);
void to_json(Json& j, const SolverConfig& v);
void from_json(const Json& j, SolverConfig& v);
void to_json(Json& j, const CaeroSolution& v);
void to_json(Json& j, const PriorModel& v);
void from_json(const Json& j, PriorModel& v);
void to_json(Json& j, const NRule& v);
void from_json(const Json& j, NRule& v);
void to_json(Json& j, const PolicyConfig& v);
void from_json(const Json& j, PolicyConfig& v);
void to_json(Json& j, const SimConfig& v);
void from_json(const Json& j, SimConfig& v);
void to_json(Json& j, const DatasetConfig& v);
void from_json(const Json& j, DatasetConfig& v);
void to_json(Json& j, const IterationRecord& v);
// Records are omitted; they can be large.
void to_json(Json& j, const AggregateReport& v);

// Applies "a.b.c=value" overrides; value is parsed as JSON, else taken as a string.
Json apply_overrides(Json config, const std::vector<std::string>& overrides);

std::string format_number(double x);

}  // namespace caero
