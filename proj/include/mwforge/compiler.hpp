#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mwforge/dds.hpp"
#include "mwforge/pulse_program.hpp"
#include "mwforge/schedule.hpp"

namespace mwforge {

/// One played sequence item (an invocation or a merge block).
struct PulseSlot {
  std::string label;
  int profile = 0;
  RegisterWords registers{};
  std::int64_t duration_ns = 0;
  SourceLoc loc;
};

struct RamAllocation {
  std::vector<RamProfile> profiles;  // index = profile number, first-use order
  std::vector<PulseSlot> slots;      // one per non-wait sequence item
};

/// RAM words and register values for a single resolved invocation. Pulses
/// with a mid-pulse phase flip use a polar profile with unit register
/// amplitude and zero register phase; plain pulses keep amplitude and phase
/// in the registers and play a peak-normalized amplitude profile.
RamProfile waveform_profile(const WaveformParams& params, const SysClock& clk = {});
RegisterWords waveform_registers(const WaveformParams& params, const SysClock& clk = {});

/// Concatenates segments into one polar profile; all segments must share
/// frequency and step.
RamProfile merged_profile(const std::vector<WaveformParams>& segments, const SysClock& clk = {});

/// Assigns distinct waveforms to profiles 0..7 in first-use order. Throws
/// CompileError with CapacityExceeded (profile over 1024 words) or
/// ProfileOverflow (more than eight distinct waveforms).
RamAllocation allocate_profiles(const PulseProgram& program, const SysClock& clk = {});

/// Emits the event stream. The gap before each pulse is
/// max(latency floor, requested wait), snapped up to the grid, where the
/// floor is 0 for an identical repeat, the profile latency for a profile
/// change and the register latency for any register change.
EventSchedule schedule(const PulseProgram& program, const RamAllocation& allocation,
                       const LatencyConfig& latency = {});

struct Compilation {
  PulseProgram program;
  RamAllocation allocation;
  EventSchedule schedule;
};

Compilation compile(std::string_view source, const LatencyConfig& latency = {}, const SysClock& clk = {});

}  // namespace mwforge
