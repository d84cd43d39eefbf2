#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mwforge::cli {

struct CompileArgs {
  std::string program;
  std::string out;  // schedule JSON; stdout when empty
  bool quiet = false;
};

struct SpectrumArgs {
  std::string input;  // program source or schedule JSON
  std::string config;
  std::string out;
  double rbw = 10e3;
  double sample_rate = 800e6;
  bool with_phase_noise = false;
  std::string noise_table;
  std::uint64_t seed = 1;
};

struct NoiseArgs {
  std::string config;  // budget JSON
  std::string table;   // single table instead of a budget
  std::string band = "10:100000";
};

struct SynthNoiseArgs {
  std::string table;
  std::string out;
  double duration = 1.0;
  double sample_rate = 1e6;
  std::uint64_t seed = 1;
  bool extend_flat = false;
};

struct BlochArgs {
  std::string input;  // program or schedule; optional with --composite
  std::string config;
  std::string out;
  std::string profile;    // "from:to:count" detunings in rad/s
  std::string composite;  // composite scan JSON
};

struct RippleArgs {
  std::string config;
  std::string out;
  double span = 25e6;
  double step = 1e6;
};

int run_compile(const CompileArgs& args);
int run_spectrum(const SpectrumArgs& args);
int run_noise(const NoiseArgs& args);
int run_synth_noise(const SynthNoiseArgs& args);
int run_bloch(const BlochArgs& args);
int run_calibrate_ripple(const RippleArgs& args);

/// Resolves a config path: as given if it exists, else under
/// $MWFORGE_CONFIG_DIR; an empty name selects fallback inside that directory.
std::string resolve_config(const std::string& name, const std::string& fallback);

}  // namespace mwforge::cli
