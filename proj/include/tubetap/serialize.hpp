#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "tubetap/errors.hpp"
#include "tubetap/market.hpp"

namespace tubetap {

/// Money is printed with 2 decimals everywhere it leaves the library.
inline std::string format_money(Money v) {
  if (v == 0.0) v = 0.0;  // never print "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

/// Ratios and other non-money reals are printed with 4 decimals.
inline std::string format_ratio(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline double round_money(Money v) { return std::round(v * 100.0) / 100.0; }

inline nlohmann::ordered_json scenario_to_json(const Scenario& scenario) {
  nlohmann::ordered_json doc;
  doc["seed"] = scenario.seed;
  doc["tasks"] = nlohmann::ordered_json::array();
  for (const Task& t : scenario.tasks) {
    doc["tasks"].push_back({{"id", t.id}, {"budget", round_money(t.budget)}});
  }
  doc["devices"] = nlohmann::ordered_json::array();
  for (const Device& d : scenario.devices) {
    nlohmann::ordered_json interests = nlohmann::ordered_json::array();
    for (TaskId t : d.interests) {
      interests.push_back(
          {{"task", t}, {"valuation", round_money(d.true_valuations.at(t))}});
    }
    doc["devices"].push_back({{"id", d.id},
                              {"quality", d.latent_quality},
                              {"interests", std::move(interests)}});
  }
  return doc;
}

inline void save_scenario(const Scenario& scenario, std::ostream& os) {
  os << scenario_to_json(scenario).dump(2) << "\n";
}

inline Scenario scenario_from_json(const nlohmann::json& doc) {
  Scenario scenario;
  try {
    scenario.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("tasks")) {
      scenario.tasks.push_back(
          {t.at("id").get<TaskId>(), t.at("budget").get<Money>()});
    }
    for (const auto& d : doc.at("devices")) {
      Device dev;
      dev.id = d.at("id").get<DeviceId>();
      dev.latent_quality = d.at("quality").get<double>();
      for (const auto& entry : d.at("interests")) {
        const auto task = entry.at("task").get<TaskId>();
        const auto valuation = entry.at("valuation").get<Money>();
        dev.interests.push_back(task);
        dev.true_valuations[task] = valuation;
        scenario.truthful_bids.set(dev.id, task, valuation);
      }
      std::sort(dev.interests.begin(), dev.interests.end());
      scenario.devices.push_back(std::move(dev));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("malformed scenario document: ") +
                          e.what());
  }
  for (std::size_t j = 0; j < scenario.tasks.size(); ++j) {
    if (scenario.tasks[j].id != j)
      throw InvalidScenario("task ids must be dense and ascending from 0");
    if (!(scenario.tasks[j].budget > 0))
      throw InvalidScenario("budgets must be positive");
  }
  for (std::size_t i = 0; i < scenario.devices.size(); ++i) {
    const Device& dev = scenario.devices[i];
    if (dev.id != i)
      throw InvalidScenario("device ids must be dense and ascending from 0");
    if (dev.latent_quality < 0.0 || dev.latent_quality > 1.0)
      throw InvalidScenario("latent quality must lie in [0, 1]");
    for (const auto& [task, v] : dev.true_valuations) {
      if (task >= scenario.tasks.size())
        throw InvalidScenario("interest references unknown task " +
                              std::to_string(task));
      if (!(v > 0)) throw InvalidScenario("valuations must be positive");
    }
  }
  return scenario;
}

inline Scenario load_scenario(std::istream& is) {
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(std::string("scenario is not valid JSON: ") +
                          e.what());
  }
  return scenario_from_json(doc);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidScenario("cannot open scenario file: " + path);
  return load_scenario(in);
}

}  // namespace tubetap
