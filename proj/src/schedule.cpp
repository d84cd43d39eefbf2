#include "mwforge/schedule.hpp"

#include <fmt/format.h>

#include <optional>
#include <tuple>

#include "json.hpp"
#include "mwforge/error.hpp"

namespace mwforge {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::SwitchOff: return "switch_off";
    case Action::RamStop: return "ram_stop";
    case Action::SetRegisters: return "set_registers";
    case Action::SelectProfile: return "select_profile";
    case Action::RamStart: return "ram_start";
    case Action::SwitchOn: return "switch_on";
  }
  return "ram_start";
}

Action action_from_string(std::string_view name) {
  for (auto a : {Action::SwitchOff, Action::RamStop, Action::SetRegisters, Action::SelectProfile,
                 Action::RamStart, Action::SwitchOn}) {
    if (to_string(a) == name) return a;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown schedule action '" + std::string(name) + "'");
}

std::int64_t snap_up(std::int64_t t_ns, std::int64_t grid_ns) {
  if (grid_ns <= 0) return t_ns;
  const std::int64_t r = t_ns % grid_ns;
  if (r == 0) return t_ns;
  return r > 0 ? t_ns + (grid_ns - r) : t_ns - r;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::OffGrid: return "off_grid";
    case ViolationKind::OutOfOrder: return "out_of_order";
    case ViolationKind::RegisterLatency: return "register_latency";
    case ViolationKind::ProfileLatency: return "profile_latency";
    case ViolationKind::UpdateDuringPlayback: return "update_during_playback";
    case ViolationKind::TruncatedPlayback: return "truncated_playback";
    case ViolationKind::MissingSetup: return "missing_setup";
    case ViolationKind::UnknownProfile: return "unknown_profile";
    case ViolationKind::BeyondDuration: return "beyond_duration";
  }
  return "unknown";
}

std::string ValidationReport::format() const {
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("event {} ({}): {}\n", v.event_index, to_string(v.kind), v.message);
  }
  return out;
}

ValidationReport validate_timing(const EventSchedule& schedule, const LatencyConfig& latency) {
  ValidationReport report;
  auto flag = [&report](ViolationKind kind, std::size_t at, std::size_t related, std::string msg) {
    report.violations.push_back({kind, at, related, std::move(msg)});
  };

  const std::int64_t grid = schedule.grid_ns > 0 ? schedule.grid_ns : latency.grid_ns;

  struct PendingUpdate {
    std::size_t index;
    std::int64_t t_ns;
    Action action;
  };
  std::vector<PendingUpdate> pending;
  bool registers_set = false;
  std::optional<int> selected;
  bool running = false;
  std::size_t running_since_index = 0;
  std::int64_t running_since = 0;
  std::int64_t running_length = 0;

  for (std::size_t i = 0; i < schedule.events.size(); ++i) {
    const Event& e = schedule.events[i];

    if (e.t_ns < 0 || e.t_ns % grid != 0) {
      flag(ViolationKind::OffGrid, i, i, fmt::format("t={} ns is not on the {} ns grid", e.t_ns, grid));
    }
    if (i > 0) {
      const Event& prev = schedule.events[i - 1];
      if (std::tuple(e.t_ns, e.action) <= std::tuple(prev.t_ns, prev.action)) {
        flag(ViolationKind::OutOfOrder, i, i - 1,
             fmt::format("{} at {} ns does not follow {} at {} ns", to_string(e.action), e.t_ns,
                         to_string(prev.action), prev.t_ns));
      }
    }
    if (e.t_ns > schedule.total_duration_ns) {
      flag(ViolationKind::BeyondDuration, i, i,
           fmt::format("t={} ns is past the schedule end {} ns", e.t_ns, schedule.total_duration_ns));
    }

    switch (e.action) {
      case Action::SetRegisters:
      case Action::SelectProfile: {
        if (running) {
          flag(ViolationKind::UpdateDuringPlayback, i, running_since_index,
               fmt::format("{} at {} ns while RAM playback is running", to_string(e.action), e.t_ns));
        }
        if (e.action == Action::SetRegisters) {
          registers_set = true;
        } else {
          if (e.profile < 0 || static_cast<std::size_t>(e.profile) >= schedule.profiles.size()) {
            flag(ViolationKind::UnknownProfile, i, i,
                 fmt::format("profile {} is not in the RAM image ({} profiles)", e.profile,
                             schedule.profiles.size()));
          } else {
            selected = e.profile;
          }
        }
        pending.push_back({i, e.t_ns, e.action});
        break;
      }
      case Action::RamStart: {
        if (!registers_set || !selected) {
          flag(ViolationKind::MissingSetup, i, i, "ram_start before registers and profile are programmed");
        }
        if (running && e.t_ns - running_since < running_length) {
          flag(ViolationKind::TruncatedPlayback, i, running_since_index,
               fmt::format("playback restarted after {} ns of a {} ns profile", e.t_ns - running_since,
                           running_length));
        }
        for (const auto& u : pending) {
          const bool regs = u.action == Action::SetRegisters;
          const std::int64_t need = regs ? latency.register_update_ns : latency.profile_change_ns;
          if (e.t_ns - u.t_ns < need) {
            flag(regs ? ViolationKind::RegisterLatency : ViolationKind::ProfileLatency, i, u.index,
                 fmt::format("{} at {} ns needs {} ns before the next pulse, got {} ns",
                             to_string(u.action), u.t_ns, need, e.t_ns - u.t_ns));
          }
        }
        pending.clear();
        running = true;
        running_since_index = i;
        running_since = e.t_ns;
        running_length = selected ? schedule.profiles[static_cast<std::size_t>(*selected)].duration_ns() : 0;
        break;
      }
      case Action::RamStop:
        if (running && e.t_ns - running_since < running_length) {
          flag(ViolationKind::TruncatedPlayback, i, running_since_index,
               fmt::format("playback stopped after {} ns of a {} ns profile", e.t_ns - running_since,
                           running_length));
        }
        running = false;
        break;
      case Action::SwitchOn:
      case Action::SwitchOff:
        break;
    }
  }
  return report;
}

std::vector<PulseTiming> pulse_timeline(const EventSchedule& schedule) {
  std::vector<PulseTiming> pulses;
  RegisterWords regs{};
  int profile = 0;
  bool regs_changed = false;
  bool profile_changed = false;
  std::int64_t prev_end = 0;
  bool open = false;

  auto close = [&](std::int64_t t) {
    if (open) {
      pulses.back().end_ns = t;
      prev_end = t;
      open = false;
    }
  };

  for (std::size_t i = 0; i < schedule.events.size(); ++i) {
    const Event& e = schedule.events[i];
    switch (e.action) {
      case Action::SetRegisters:
        regs = e.registers;
        regs_changed = true;
        break;
      case Action::SelectProfile:
        profile = e.profile;
        profile_changed = true;
        break;
      case Action::RamStart:
        close(e.t_ns);
        pulses.push_back({i, e.t_ns, schedule.total_duration_ns, e.t_ns - prev_end, profile, regs,
                          regs_changed, profile_changed});
        open = true;
        regs_changed = profile_changed = false;
        break;
      case Action::RamStop:
        close(e.t_ns);
        break;
      case Action::SwitchOn:
      case Action::SwitchOff:
        break;
    }
  }
  return pulses;
}

std::string timing_report(const EventSchedule& schedule, const SysClock& clk) {
  std::string out = fmt::format("{:>5} {:>10} {:>10} {:>8} {:>7} {:>11} {:>7} {:>9}  {}\n", "pulse",
                                "start_ns", "end_ns", "gap_ns", "profile", "freq_MHz", "amp",
                                "phase_rad", "update");
  const auto pulses = pulse_timeline(schedule);
  for (std::size_t k = 0; k < pulses.size(); ++k) {
    const auto& p = pulses[k];
    const auto s = dequantize(p.registers, clk);
    std::string why;
    if (k == 0) {
      why = "initial setup";
    } else if (p.registers_changed && p.profile_changed) {
      why = "registers + profile";
    } else if (p.registers_changed) {
      why = "registers";
    } else if (p.profile_changed) {
      why = "profile";
    } else {
      why = p.gap_before_ns == 0 ? "repeat" : "wait";
    }
    out += fmt::format("{:>5} {:>10} {:>10} {:>8} {:>7} {:>11.6f} {:>7.5f} {:>9.6f}  {}\n", k,
                       p.start_ns, p.end_ns, p.gap_before_ns, p.profile, s.frequency_hz / 1e6,
                       s.amplitude, s.phase_rad, why);
  }
  out += fmt::format("total duration: {} ns, {} events, {} profiles\n", schedule.total_duration_ns,
                     schedule.events.size(), schedule.profiles.size());
  return out;
}

namespace {

using Json = nlohmann::ordered_json;

std::string hex_word(std::uint32_t w) { return fmt::format("0x{:08X}", w); }

}  // namespace

std::string to_json(const EventSchedule& schedule) {
  Json root;
  root["grid_ns"] = schedule.grid_ns;
  root["total_duration_ns"] = schedule.total_duration_ns;
  Json profiles = Json::array();
  for (std::size_t i = 0; i < schedule.profiles.size(); ++i) {
    const auto& p = schedule.profiles[i];
    Json words = Json::array();
    for (auto w : p.words) words.push_back(hex_word(w));
    profiles.push_back(Json{{"index", i}, {"mode", to_string(p.mode)}, {"step_ns", p.step_ns}, {"words", words}});
  }
  root["profiles"] = profiles;
  Json events = Json::array();
  for (const auto& e : schedule.events) {
    Json args = Json::object();
    if (e.action == Action::SetRegisters) {
      args = Json{{"ftw", e.registers.ftw}, {"asf", e.registers.asf}, {"pow", e.registers.pow}};
    } else if (e.action == Action::SelectProfile) {
      args = Json{{"index", e.profile}};
    }
    events.push_back(Json{{"t", e.t_ns}, {"action", to_string(e.action)}, {"args", args}});
  }
  root["events"] = events;
  return root.dump(2) + "\n";
}

EventSchedule schedule_from_json(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, std::string("schedule JSON: ") + e.what());
  }
  try {
    EventSchedule s;
    s.grid_ns = root.value("grid_ns", kGridNs);
    s.total_duration_ns = root.at("total_duration_ns").get<std::int64_t>();
    for (const auto& p : root.value("profiles", Json::array())) {
      RamProfile profile;
      profile.mode = ram_mode_from_string(p.at("mode").get<std::string>());
      profile.step_ns = p.at("step_ns").get<std::int64_t>();
      for (const auto& w : p.at("words")) {
        profile.words.push_back(w.is_string()
                                    ? static_cast<std::uint32_t>(std::stoul(w.get<std::string>(), nullptr, 16))
                                    : w.get<std::uint32_t>());
      }
      s.profiles.push_back(std::move(profile));
    }
    for (const auto& ev : root.at("events")) {
      Event e;
      e.t_ns = ev.at("t").get<std::int64_t>();
      e.action = action_from_string(ev.at("action").get<std::string>());
      const Json args = ev.value("args", Json::object());
      if (e.action == Action::SetRegisters) {
        e.registers.ftw = args.at("ftw").get<std::uint32_t>();
        e.registers.asf = args.at("asf").get<std::uint16_t>();
        e.registers.pow = args.at("pow").get<std::uint16_t>();
      } else if (e.action == Action::SelectProfile) {
        e.profile = args.at("index").get<int>();
      }
      s.events.push_back(e);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SemanticError, std::string("schedule JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::SemanticError, std::string("schedule JSON word: ") + e.what());
  }
}

}  // namespace mwforge
