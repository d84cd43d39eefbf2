#include "mwforge/compiler.hpp"

#include <algorithm>
#include <optional>

#include "mwforge/error.hpp"

namespace mwforge {

namespace {

bool polar_required(const WaveformParams& p) {
  return p.kind == DefinitionKind::Pulse && p.flip_rad.has_value();
}

/// Absolute amplitude/phase per RAM word, register contribution included.
std::vector<PolarPoint> segment_points(const WaveformParams& p) {
  const std::int64_t n = p.duration_ns / p.step_ns;
  std::vector<PolarPoint> points(static_cast<std::size_t>(n));
  if (p.kind == DefinitionKind::Ramp) {
    const double span = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (std::int64_t k = 0; k < n; ++k) {
      const double x = n > 1 ? static_cast<double>(k) / span : 1.0;
      const double s = p.shape == WindowKind::Blackman ? std::max(0.0, blackman(x / 2.0)) : x;
      points[static_cast<std::size_t>(k)] = {p.ramp_start + (p.ramp_end - p.ramp_start) * s, p.phase_rad};
    }
    return points;
  }
  const auto window = sample_window(Window{p.shape, p.edge_ns}, p.duration_ns, p.step_ns);
  const std::int64_t flip_word =
      p.flip_rad ? p.flip_at_ns.value_or(p.duration_ns / 2 / p.step_ns * p.step_ns) / p.step_ns : n;
  for (std::int64_t k = 0; k < n; ++k) {
    const double phase = p.phase_rad + (k >= flip_word ? p.flip_rad.value_or(0.0) : 0.0);
    points[static_cast<std::size_t>(k)] = {p.amplitude * window[static_cast<std::size_t>(k)], phase};
  }
  return points;
}

[[noreturn]] void located(ErrorCode code, SourceLoc loc, const std::string& message) {
  throw CompileError({Diagnostic{code, loc.line, loc.column, message}});
}

std::string strip_code(const Error& e) {
  std::string msg = e.what();
  const auto colon = msg.find(": ");
  return colon == std::string::npos ? msg : msg.substr(colon + 2);
}

}  // namespace

RamProfile waveform_profile(const WaveformParams& p, const SysClock& clk) {
  if (polar_required(p)) {
    return build_ram_profile(segment_points(p), p.duration_ns, p.step_ns, RamMode::Polar, clk);
  }
  if (p.kind == DefinitionKind::Ramp) {
    std::vector<double> levels;
    for (const auto& pt : segment_points(p)) levels.push_back(pt.amplitude);
    return build_ram_profile(levels, p.duration_ns, p.step_ns, RamMode::Amplitude, clk);
  }
  return build_ram_profile(Window{p.shape, p.edge_ns}, p.duration_ns, p.step_ns, RamMode::Amplitude, clk);
}

RegisterWords waveform_registers(const WaveformParams& p, const SysClock& clk) {
  if (polar_required(p)) return quantize_settings(p.frequency_hz, 1.0, 0.0, clk);
  if (p.kind == DefinitionKind::Ramp) return quantize_settings(p.frequency_hz, 1.0, p.phase_rad, clk);
  return quantize_settings(p.frequency_hz, p.amplitude, p.phase_rad, clk);
}

RamProfile merged_profile(const std::vector<WaveformParams>& segments, const SysClock& clk) {
  if (segments.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to merge");
  std::vector<PolarPoint> points;
  std::int64_t duration = 0;
  for (const auto& s : segments) {
    if (s.step_ns != segments.front().step_ns || s.frequency_hz != segments.front().frequency_hz) {
      throw Error(ErrorCode::SemanticError, "merged segments must share frequency and RAM step");
    }
    const auto seg = segment_points(s);
    points.insert(points.end(), seg.begin(), seg.end());
    duration += s.duration_ns;
  }
  return build_ram_profile(points, duration, segments.front().step_ns, RamMode::Polar, clk);
}

RamAllocation allocate_profiles(const PulseProgram& program, const SysClock& clk) {
  RamAllocation alloc;

  auto assign = [&](RamProfile profile, SourceLoc loc) -> int {
    const auto it = std::find(alloc.profiles.begin(), alloc.profiles.end(), profile);
    if (it != alloc.profiles.end()) return static_cast<int>(it - alloc.profiles.begin());
    if (alloc.profiles.size() == kProfileCount) {
      located(ErrorCode::ProfileOverflow, loc,
              "a ninth distinct waveform does not fit the " + std::to_string(kProfileCount) + " RAM profiles");
    }
    alloc.profiles.push_back(std::move(profile));
    return static_cast<int>(alloc.profiles.size() - 1);
  };

  for (const auto& item : program.sequence) {
    if (std::holds_alternative<Wait>(item)) continue;
    PulseSlot slot;
    RamProfile profile;
    try {
      if (const auto* inv = std::get_if<Invocation>(&item)) {
        slot.label = inv->name;
        slot.loc = inv->loc;
        profile = waveform_profile(inv->params, clk);
        slot.registers = waveform_registers(inv->params, clk);
      } else {
        const auto& m = std::get<MergeBlock>(item);
        slot.loc = m.loc;
        slot.label = "merge{";
        std::vector<WaveformParams> segments;
        for (const auto& part : m.parts) {
          if (segments.size()) slot.label += ",";
          slot.label += part.name;
          segments.push_back(part.params);
        }
        slot.label += "}";
        profile = merged_profile(segments, clk);
        slot.registers = quantize_settings(segments.front().frequency_hz, 1.0, 0.0, clk);
      }
    } catch (const CompileError&) {
      throw;
    } catch (const Error& e) {
      located(e.code(), slot.loc, "'" + slot.label + "': " + strip_code(e));
    }
    slot.duration_ns = profile.duration_ns();
    slot.profile = assign(std::move(profile), slot.loc);
    alloc.slots.push_back(std::move(slot));
  }
  return alloc;
}

EventSchedule schedule(const PulseProgram& program, const RamAllocation& allocation,
                       const LatencyConfig& latency) {
  EventSchedule out;
  out.grid_ns = latency.grid_ns;
  out.profiles = allocation.profiles;

  std::optional<RegisterWords> regs;
  std::optional<int> profile;
  std::int64_t prev_end = 0;
  bool have_prev = false;
  std::int64_t requested_wait = 0;
  std::size_t slot_index = 0;

  auto emit = [&out](std::int64_t t, Action a) -> Event& {
    out.events.push_back(Event{t, a, {}, 0});
    return out.events.back();
  };

  for (const auto& item : program.sequence) {
    if (const auto* w = std::get_if<Wait>(&item)) {
      requested_wait += w->duration_ns;
      continue;
    }
    if (slot_index >= allocation.slots.size()) {
      throw Error(ErrorCode::InvalidArgument, "allocation does not cover every sequence item");
    }
    const PulseSlot& slot = allocation.slots[slot_index++];

    const bool new_regs = !regs || *regs != slot.registers;
    const bool new_profile = !profile || *profile != slot.profile;
    std::int64_t floor = 0;
    if (new_regs) floor = std::max(floor, latency.register_update_ns);
    if (new_profile) floor = std::max(floor, latency.profile_change_ns);
    const std::int64_t gap = snap_up(std::max(floor, requested_wait), latency.grid_ns);
    const std::int64_t start = prev_end + gap;

    const bool stop = have_prev && (gap > 0 || new_regs || new_profile);
    if (stop) {
      emit(prev_end, Action::SwitchOff);
      emit(prev_end, Action::RamStop);
    }
    if (new_regs) emit(prev_end, Action::SetRegisters).registers = slot.registers;
    if (new_profile) emit(prev_end, Action::SelectProfile).profile = slot.profile;
    emit(start, Action::RamStart);
    if (!have_prev || stop) emit(start, Action::SwitchOn);

    regs = slot.registers;
    profile = slot.profile;
    prev_end = start + slot.duration_ns;
    have_prev = true;
    requested_wait = 0;
  }
  if (slot_index != allocation.slots.size()) {
    throw Error(ErrorCode::InvalidArgument, "allocation has slots the program does not play");
  }
  if (have_prev) {
    emit(prev_end, Action::SwitchOff);
    emit(prev_end, Action::RamStop);
  }
  out.total_duration_ns = snap_up(prev_end + requested_wait, latency.grid_ns);
  return out;
}

Compilation compile(std::string_view source, const LatencyConfig& latency, const SysClock& clk) {
  Compilation c;
  c.program = parse_program(source);
  c.allocation = allocate_profiles(c.program, clk);
  c.schedule = schedule(c.program, c.allocation, latency);
  return c;
}

}  // namespace mwforge
