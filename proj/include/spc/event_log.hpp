#pragma once
/*
  One JSON object per scheduler step. Field order is fixed so identical
  runs serialize to byte-identical lines.
*/

#include <cstdint>
#include <functional>
#include <string>

#include <json.hpp>

namespace spc {

struct EventRecord {
    std::int64_t t = 0;
    std::string config;
    std::string instance;
    double cap_s = 0.0;
    double measured_s = 0.0;
    bool completed = false;
    double lcb_s = 0.0;
    std::int64_t r = 0;
    std::int64_t q = 0;
    double charged_total_s = 0.0;
};

using EventSink = std::function<void(const EventRecord&)>;

inline nlohmann::ordered_json event_to_json(const EventRecord& e) {
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["config"] = e.config;
    j["instance"] = e.instance;
    j["cap_s"] = e.cap_s;
    j["measured_s"] = e.measured_s;
    j["completed"] = e.completed;
    j["lcb_s"] = e.lcb_s;
    j["r"] = e.r;
    j["q"] = e.q;
    j["charged_total_s"] = e.charged_total_s;
    return j;
}

inline std::string event_to_jsonl(const EventRecord& e) { return event_to_json(e).dump(); }

inline EventRecord event_from_json(const nlohmann::json& j) {
    EventRecord e;
    e.t = j.at("t").get<std::int64_t>();
    e.config = j.at("config").get<std::string>();
    e.instance = j.at("instance").get<std::string>();
    e.cap_s = j.at("cap_s").get<double>();
    e.measured_s = j.at("measured_s").get<double>();
    e.completed = j.at("completed").get<bool>();
    e.lcb_s = j.at("lcb_s").get<double>();
    e.r = j.at("r").get<std::int64_t>();
    e.q = j.at("q").get<std::int64_t>();
    e.charged_total_s = j.at("charged_total_s").get<double>();
    return e;
}

inline EventRecord event_from_jsonl(const std::string& line) {
    return event_from_json(nlohmann::json::parse(line));
}

}  // namespace spc
