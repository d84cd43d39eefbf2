#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mwforge/dds.hpp"

namespace mwforge {

/// Actions are listed in the order they take effect when several share a
/// time stamp: the output is gated off before registers change, and the
/// next playback starts before the switch opens.
enum class Action { SwitchOff, RamStop, SetRegisters, SelectProfile, RamStart, SwitchOn };

std::string_view to_string(Action action);
Action action_from_string(std::string_view name);

struct Event {
  std::int64_t t_ns = 0;
  Action action = Action::RamStart;
  RegisterWords registers{};  // SetRegisters only
  int profile = 0;            // SelectProfile only

  bool operator==(const Event&) const = default;
};

/// Dead times the hardware needs before the next pulse can start.
struct LatencyConfig {
  std::int64_t register_update_ns = 700;
  std::int64_t profile_change_ns = 400;
  std::int64_t grid_ns = kGridNs;
};

std::int64_t snap_up(std::int64_t t_ns, std::int64_t grid_ns = kGridNs);

struct EventSchedule {
  std::int64_t grid_ns = kGridNs;
  std::int64_t total_duration_ns = 0;
  std::vector<RamProfile> profiles;  // RAM image, indexed by profile number
  std::vector<Event> events;

  bool operator==(const EventSchedule&) const = default;
};

enum class ViolationKind {
  OffGrid,
  OutOfOrder,
  RegisterLatency,
  ProfileLatency,
  UpdateDuringPlayback,
  TruncatedPlayback,
  MissingSetup,
  UnknownProfile,
  BeyondDuration,
};

std::string_view to_string(ViolationKind kind);

struct TimingViolation {
  ViolationKind kind;
  std::size_t event_index = 0;
  std::size_t related_index = 0;  // the event the constraint is measured from
  std::string message;
};

struct ValidationReport {
  std::vector<TimingViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string format() const;
};

/// Re-derives every latency and grid constraint from the event stream alone.
ValidationReport validate_timing(const EventSchedule& schedule, const LatencyConfig& latency = {});

/// One played pulse as seen in the event stream.
struct PulseTiming {
  std::size_t start_event = 0;
  std::int64_t start_ns = 0;
  std::int64_t end_ns = 0;
  std::int64_t gap_before_ns = 0;  // from the previous pulse end (or schedule start)
  int profile = 0;
  RegisterWords registers{};
  bool registers_changed = false;
  bool profile_changed = false;
};

std::vector<PulseTiming> pulse_timeline(const EventSchedule& schedule);
std::string timing_report(const EventSchedule& schedule, const SysClock& clk = {});

std::string to_json(const EventSchedule& schedule);
EventSchedule schedule_from_json(std::string_view text);

}  // namespace mwforge
