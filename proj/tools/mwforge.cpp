#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mwforge/error.hpp"

namespace {

std::string_view module_of(mwforge::ErrorCode code) {
  using mwforge::ErrorCode;
  switch (code) {
    case ErrorCode::FrequencyOutOfRange:
    case ErrorCode::AmplitudeOutOfRange:
    case ErrorCode::CapacityExceeded:
    case ErrorCode::GridViolation:
    case ErrorCode::UnvalidatedSchedule: return "dds_core";
    case ErrorCode::SyntaxError:
    case ErrorCode::SemanticError:
    case ErrorCode::ProfileOverflow: return "pulse_compiler";
    case ErrorCode::InsufficientLength: return "rf_chain";
    case ErrorCode::NonMonotonicFrequency:
    case ErrorCode::EmptyTable:
    case ErrorCode::RangeOutsideTable:
    case ErrorCode::DisjointRanges:
    case ErrorCode::NyquistViolation: return "noise_model";
    case ErrorCode::StepTooLarge:
    case ErrorCode::UndefinedMixingAngle:
    case ErrorCode::MissingCalibration: return "atom_sim";
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io: return "cli";
  }
  return "cli";
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = mwforge::cli;
  CLI::App app{"Pulse compiler, waveform synthesis and analysis for a DDS-based microwave source"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mwforge 0.1.0");

  cli::CompileArgs compile_args;
  auto* compile = app.add_subcommand("compile", "Compile a pulse program to a schedule JSON and timing report");
  compile->add_option("program", compile_args.program, "Pulse program source")->required();
  compile->add_option("-o,--out", compile_args.out, "Schedule JSON output (default: stdout, report to stderr)");
  compile->add_flag("-q,--quiet", compile_args.quiet, "Suppress the timing report");

  cli::SpectrumArgs spectrum_args;
  auto* spectrum = app.add_subcommand("spectrum", "Synthesize a schedule and write the RF output spectrum as CSV");
  spectrum->add_option("input", spectrum_args.input, "Pulse program or schedule JSON")->required();
  spectrum->add_option("-c,--config", spectrum_args.config, "Chain config JSON (default: pulse_path.json)");
  spectrum->add_option("-o,--out", spectrum_args.out, "Spectrum CSV output (default: stdout)");
  spectrum->add_option("--rbw", spectrum_args.rbw, "Resolution bandwidth in Hz")->capture_default_str();
  spectrum->add_option("--sample-rate", spectrum_args.sample_rate, "Envelope sample rate in Hz")->capture_default_str();
  spectrum->add_flag("--with-phase-noise", spectrum_args.with_phase_noise, "Add synthesized phase noise");
  spectrum->add_option("--noise-table", spectrum_args.noise_table, "Phase-noise table (default: output_path.csv)");
  spectrum->add_option("--seed", spectrum_args.seed, "Noise seed")->capture_default_str();

  cli::NoiseArgs noise_args;
  auto* noise = app.add_subcommand("noise", "Integrated phase noise per source over a band");
  noise->add_option("-c,--config", noise_args.config, "Noise budget JSON (default: budget.json)");
  noise->add_option("--table", noise_args.table, "Integrate a single table instead of a budget");
  noise->add_option("--band", noise_args.band, "Integration band f1:f2 in Hz")->capture_default_str();

  cli::SynthNoiseArgs synth_args;
  auto* synth = app.add_subcommand("synth-noise", "Synthesize a phase-noise time series from a table");
  synth->add_option("table", synth_args.table, "Phase-noise table CSV")->required();
  synth->add_option("-o,--out", synth_args.out, "Series CSV output (default: stdout)");
  synth->add_option("--duration", synth_args.duration, "Duration in s")->capture_default_str();
  synth->add_option("--sample-rate", synth_args.sample_rate, "Sample rate in Hz")->capture_default_str();
  synth->add_option("--seed", synth_args.seed, "RNG seed")->capture_default_str();
  synth->add_flag("--extend-flat", synth_args.extend_flat, "Hold end levels beyond the table");

  cli::BlochArgs bloch_args;
  auto* bloch = app.add_subcommand("bloch", "Drive a two-level atom with a compiled schedule or run a composite scan");
  bloch->add_option("input", bloch_args.input, "Pulse program or schedule JSON");
  bloch->add_option("-c,--config", bloch_args.config, "Atom config JSON (default: atom.json)");
  bloch->add_option("-o,--out", bloch_args.out, "CSV output (default: stdout)");
  bloch->add_option("--profile", bloch_args.profile, "Excitation profile over detunings from:to:count (rad/s)");
  bloch->add_option("--composite", bloch_args.composite, "Composite-pulse scan spec JSON");

  cli::RippleArgs ripple_args;
  auto* ripple = app.add_subcommand("calibrate-ripple", "Passband gain and amplitude-correction table");
  ripple->add_option("-c,--config", ripple_args.config, "Chain config JSON (default: pulse_path.json)");
  ripple->add_option("-o,--out", ripple_args.out, "CSV output (default: stdout)");
  ripple->add_option("--span", ripple_args.span, "Half span around the filter center in Hz")->capture_default_str();
  ripple->add_option("--step", ripple_args.step, "Frequency step in Hz")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*compile) return cli::run_compile(compile_args);
    if (*spectrum) return cli::run_spectrum(spectrum_args);
    if (*noise) return cli::run_noise(noise_args);
    if (*synth) return cli::run_synth_noise(synth_args);
    if (*bloch) return cli::run_bloch(bloch_args);
    if (*ripple) return cli::run_calibrate_ripple(ripple_args);
  } catch (const mwforge::CompileError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "mwforge: " << module_of(d.code) << ": " << d.format() << '\n';
    return mwforge::exit_code(e.code());
  } catch (const mwforge::Error& e) {
    std::cerr << "mwforge: " << module_of(e.code()) << ": " << e.what() << '\n';
    return mwforge::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mwforge: internal error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
