#include "surgeflow/scenario.hpp"

#include <fstream>
#include <json.hpp>

#include "surgeflow/errors.hpp"

namespace surgeflow::sim {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string(key) + ": wrong type");
  }
}

std::set<alloc::Acuity> parse_capabilities(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw ValidationError(field + ": must be an array");
  std::set<alloc::Acuity> out;
  for (const json& item : arr) {
    auto level = alloc::acuity_from_string(item.get<std::string>());
    if (!level) throw ValidationError(field + ": unknown acuity level " + item.dump());
    out.insert(*level);
  }
  return out;
}

io::SyntheticSpec parse_synthetic_params(const json& j, const std::string& prefix) {
  io::SyntheticSpec spec;
  spec.days = get_or(j, "days", spec.days);
  spec.base_low = get_or(j, "base_low", spec.base_low);
  spec.base_high = get_or(j, "base_high", spec.base_high);
  spec.weekend_scale = get_or(j, "weekend_scale", spec.weekend_scale);
  spec.noise_sd = get_or(j, "noise_sd", spec.noise_sd);
  spec.seed = get_or(j, "seed", spec.seed);
  if (j.contains("trough_hours")) {
    spec.trough_hours.clear();
    for (const json& h : j.at("trough_hours")) {
      int hour = h.get<int>();
      if (hour < 0 || hour > 23)
        throw ValidationError(prefix + ".trough_hours: hour out of range");
      spec.trough_hours.insert(hour);
    }
  }
  if (j.contains("peak_hours")) {
    spec.peak_hours.clear();
    for (const json& h : j.at("peak_hours")) {
      int hour = h.get<int>();
      if (hour < 0 || hour > 23)
        throw ValidationError(prefix + ".peak_hours: hour out of range");
      spec.peak_hours.insert(hour);
    }
  }
  return spec;
}

json synthetic_to_json(const io::SyntheticSpec& spec) {
  json j;
  j["days"] = spec.days;
  j["base_low"] = spec.base_low;
  j["base_high"] = spec.base_high;
  j["trough_hours"] = spec.trough_hours;
  j["peak_hours"] = spec.peak_hours;
  j["weekend_scale"] = spec.weekend_scale;
  j["noise_sd"] = spec.noise_sd;
  j["seed"] = spec.seed;
  return j;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError("malformed scenario JSON: " + std::string(e.what()));
  }

  ScenarioConfig config;
  config.horizon_hours = get_or(doc, "horizon_hours", config.horizon_hours);
  config.w_max_hours = get_or(doc, "w_max_hours", config.w_max_hours);
  config.service_mean_min = get_or(doc, "service_mean_min", config.service_mean_min);
  config.service_sd_min = get_or(doc, "service_sd_min", config.service_sd_min);
  config.discharge_rate = get_or(doc, "discharge_rate", config.discharge_rate);
  config.deterministic_arrivals =
      get_or(doc, "deterministic_arrivals", config.deterministic_arrivals);
  config.seed = get_or(doc, "seed", config.seed);

  if (doc.contains("acuity_mix")) {
    const json& mix = doc.at("acuity_mix");
    if (!mix.is_object()) throw ValidationError("acuity_mix: must be an object");
    config.acuity_mix[0] = get_or(mix, "Low", 0.0);
    config.acuity_mix[1] = get_or(mix, "Medium", 0.0);
    config.acuity_mix[2] = get_or(mix, "High", 0.0);
  }

  if (doc.contains("hospitals")) {
    const json& hs = doc.at("hospitals");
    if (!hs.is_array()) throw ValidationError("hospitals: must be an array");
    config.hospitals.clear();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const json& hj = hs[i];
      const std::string prefix = "hospitals[" + std::to_string(i) + "]";
      alloc::Hospital h;
      if (!hj.contains("id")) throw ValidationError(prefix + ".id: required");
      h.id = hj.at("id").get<std::string>();
      if (!hj.contains("capacity")) throw ValidationError(prefix + ".capacity: required");
      h.capacity = hj.at("capacity").get<int>();
      h.transfer_cost = get_or(hj, "transfer_cost", 0.0);
      if (hj.contains("acuity_capabilities"))
        h.acuity_capabilities =
            parse_capabilities(hj.at("acuity_capabilities"), prefix + ".acuity_capabilities");
      h.occupancy = get_or(hj, "initial_occupancy", 0);
      config.hospitals.push_back(std::move(h));
    }
  } else {
    config.hospitals = default_hospitals();
  }

  if (doc.contains("arrival_source")) {
    const json& src = doc.at("arrival_source");
    const std::string kind = get_or<std::string>(src, "kind", "synthetic");
    if (kind == "csv") {
      config.arrival_source.kind = ArrivalSource::Kind::Csv;
      config.arrival_source.path = get_or<std::string>(src, "path", "");
    } else if (kind == "forecast") {
      config.arrival_source.kind = ArrivalSource::Kind::Forecast;
      config.arrival_source.path = get_or<std::string>(src, "path", "");
    } else if (kind == "synthetic") {
      config.arrival_source.kind = ArrivalSource::Kind::Synthetic;
      if (src.contains("params"))
        config.arrival_source.params =
            parse_synthetic_params(src.at("params"), "arrival_source.params");
    } else {
      throw ValidationError("arrival_source.kind: must be csv, forecast or synthetic");
    }
  }

  validate(config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text);
}

std::string canonical_json(const ScenarioConfig& config) {
  json doc;
  doc["horizon_hours"] = config.horizon_hours;
  doc["w_max_hours"] = config.w_max_hours;
  doc["service_mean_min"] = config.service_mean_min;
  doc["service_sd_min"] = config.service_sd_min;
  doc["discharge_rate"] = config.discharge_rate;
  doc["acuity_mix"] = {{"Low", config.acuity_mix[0]},
                       {"Medium", config.acuity_mix[1]},
                       {"High", config.acuity_mix[2]}};
  doc["deterministic_arrivals"] = config.deterministic_arrivals;
  doc["seed"] = config.seed;
  json hs = json::array();
  for (const alloc::Hospital& h : config.hospitals) {
    json caps = json::array();
    for (alloc::Acuity a : h.acuity_capabilities) caps.push_back(alloc::to_string(a));
    hs.push_back({{"id", h.id},
                  {"capacity", h.capacity},
                  {"transfer_cost", h.transfer_cost},
                  {"acuity_capabilities", caps},
                  {"initial_occupancy", h.occupancy}});
  }
  doc["hospitals"] = std::move(hs);
  json src;
  switch (config.arrival_source.kind) {
    case ArrivalSource::Kind::Csv: src["kind"] = "csv"; break;
    case ArrivalSource::Kind::Forecast: src["kind"] = "forecast"; break;
    case ArrivalSource::Kind::Synthetic: src["kind"] = "synthetic"; break;
  }
  if (config.arrival_source.kind == ArrivalSource::Kind::Synthetic)
    src["params"] = synthetic_to_json(config.arrival_source.params);
  else
    src["path"] = config.arrival_source.path;
  doc["arrival_source"] = std::move(src);
  return doc.dump();
}

std::string scenario_hash(const ScenarioConfig& config) {
  const std::string text = canonical_json(config);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace surgeflow::sim
