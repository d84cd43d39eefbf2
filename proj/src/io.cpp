#include "mwforge/io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "mwforge/error.hpp"

namespace mwforge {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string to_csv(const RamProfile& p) {
  std::string s = fmt::format("# mode={} step_ns={}\nindex,word_hex\n", to_string(p.mode), p.step_ns);
  for (std::size_t i = 0; i < p.words.size(); ++i) s += fmt::format("{},0x{:08X}\n", i, p.words[i]);
  return s;
}

RamProfile ram_profile_from_csv(std::string_view csv) {
  RamProfile p;
  bool have_mode = false;
  std::istringstream in{std::string(csv)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      for (std::string kv; meta >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const auto key = kv.substr(0, eq);
        const auto value = kv.substr(eq + 1);
        try {
          if (key == "mode") {
            p.mode = ram_mode_from_string(value);
            have_mode = true;
          } else if (key == "step_ns") {
            p.step_ns = std::stoll(value);
          }
        } catch (const std::exception&) {
          throw Error(ErrorCode::SyntaxError, fmt::format("RAM csv line {}: bad {} '{}'", line_no, key, value));
        }
      }
      continue;
    }
    if (line.rfind("index", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::SyntaxError, fmt::format("RAM csv line {}: expected index,word_hex", line_no));
    try {
      const auto index = std::stoul(line.substr(0, comma));
      if (index != p.words.size()) {
        throw Error(ErrorCode::SemanticError, fmt::format("RAM csv line {}: index {} out of sequence", line_no, index));
      }
      p.words.push_back(static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1), nullptr, 16)));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::SyntaxError, fmt::format("RAM csv line {}: not a number", line_no));
    }
  }
  if (!have_mode) throw Error(ErrorCode::SemanticError, "RAM csv lacks '# mode=' metadata");
  validate(p);
  return p;
}

std::string to_csv(const ComplexEnvelope& env, std::size_t stride) {
  stride = std::max<std::size_t>(1, stride);
  std::string s = "t_ns,re,im\n";
  for (std::size_t i = 0; i < env.samples.size(); i += stride) {
    s += fmt::format("{:.6f},{:.9g},{:.9g}\n", env.time_s(i) * 1e9, env.samples[i].real(), env.samples[i].imag());
  }
  return s;
}

std::string to_csv(const SpectrumEstimate& spectrum) {
  std::string s = "f_Hz,dBc\n";
  for (const auto& b : spectrum.bins) s += fmt::format("{:.3f},{:.4f}\n", b.f_hz, b.power_dbc);
  return s;
}

std::string to_csv(const Trajectory& traj) {
  std::string s = "t_s,u,v,w,p_excited\n";
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& b = traj.states[i];
    s += fmt::format("{:.9e},{:.12f},{:.12f},{:.12f},{:.12f}\n", traj.t[i], b.u, b.v, b.w, b.excited_population());
  }
  return s;
}

std::string to_csv(const std::vector<ProfilePoint>& profile) {
  std::string s = "detuning_rad_s,p_excited\n";
  for (const auto& p : profile) s += fmt::format("{:.9e},{:.12e}\n", p.detuning, p.excited);
  return s;
}

std::string to_csv(const FidelityMap& map) {
  std::string s = "eps\\delta_rad_s";
  for (double d : map.detunings) s += fmt::format(",{:.9e}", d);
  s += '\n';
  for (std::size_t r = 0; r < map.amp_errors.size(); ++r) {
    s += fmt::format("{:.6f}", map.amp_errors[r]);
    for (double f : map.fidelity[r]) s += fmt::format(",{:.12f}", f);
    s += '\n';
  }
  return s;
}

}  // namespace mwforge
