#pragma once

#include "tsbench/characterize.hpp"
#include "tsbench/metrics.hpp"
#include "tsbench/models.hpp"
#include "tsbench/synth.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace tsbench {

using json = nlohmann::json;

/// Throws ConfigError naming `where` if `obj` is not an object or holds a key
/// outside `allowed`.
void require_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where);

json to_json(const MetricReport& r);
MetricReport metric_report_from_json(const json& j);

json to_json(const CharacterizationReport& r);

json to_json(const Scaler& s);
Scaler scaler_from_json(const json& j);

json to_json(const ModelSpec& spec);
/// Strict parse; keys absent from `j` keep the values already in `base`.
ModelSpec model_spec_from_json(const json& j, const std::string& where, ModelSpec base = {});

json to_json(const TrainedModel& m);
TrainedModel trained_model_from_json(const json& j);

json to_json(const SynthSpec& s);
/// Strict parse. A "preset" key seeds the spec from that preset and the
/// remaining keys are merged over it.
SynthSpec synth_spec_from_json(const json& j, const std::string& where);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

}  // namespace tsbench
