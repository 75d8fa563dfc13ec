#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ptav {

enum class EventType { request, pass, fail, correct, replay, stale, v_change, beta_change, update };

inline constexpr std::array<std::string_view, 9> kEventNames{
    "request", "pass", "fail", "correct", "replay", "stale", "v_change", "beta_change", "update"};

inline std::string_view to_string(EventType t) { return kEventNames[static_cast<std::size_t>(t)]; }

inline std::optional<EventType> parse_event_type(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i) {
    if (kEventNames[i] == s) return static_cast<EventType>(i);
  }
  return std::nullopt;
}

struct Event {
  int frame = 0;
  EventType type = EventType::update;
  std::string details;  // space-separated key=value pairs

  std::string line() const {
    std::string out = "frame=" + std::to_string(frame) + " event=" + std::string(to_string(type));
    if (!details.empty()) out += " " + details;
    return out;
  }
};

// Fixed 4-decimal rendering so logs compare byte-for-byte.
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

/// Append-only record shared by both workers.
class EventLog {
 public:
  void record(int frame, EventType type, std::string details = {}) {
    std::lock_guard lock(mutex_);
    events_.push_back({frame, type, std::move(details)});
  }

  std::vector<Event> events() const {
    std::lock_guard lock(mutex_);
    return events_;
  }

  std::vector<Event> of_type(EventType t) const {
    std::vector<Event> out;
    for (const auto& e : events()) {
      if (e.type == t) out.push_back(e);
    }
    return out;
  }

  std::size_t count(EventType t) const { return of_type(t).size(); }

  std::map<std::string, std::size_t> summary() const {
    std::map<std::string, std::size_t> out;
    for (const auto& e : events()) ++out[std::string(to_string(e.type))];
    return out;
  }

  std::string text() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  void write(std::ostream& os) const {
    for (const auto& e : events()) os << e.line() << '\n';
  }

 private:
  mutable std::mutex mutex_;
  std::vector<Event> events_;
};

}  // namespace ptav
