#pragma once

// JSON forms of configs, outcomes, detectors and reports. Readers throw
// FormatError on missing or mistyped fields.

#include <json.hpp>

#include "a2d/attacks.hpp"
#include "a2d/detectors.hpp"

namespace a2d {

using Json = nlohmann::ordered_json;

Json to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const Json& j);

Json to_json(const AttackOutcome& o, std::size_t example_id);

Json to_json(const ZScoreDetector& d);
ZScoreDetector zscore_from_json(const Json& j);

Json to_json(const EnsembleZ& e);
EnsembleZ ensemble_from_json(const Json& j);

Json to_json(const KnnDetector& k);
KnnDetector knn_from_json(const Json& j);

Json to_json(const DetectionReport& r);

}  // namespace a2d
