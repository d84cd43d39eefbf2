#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mwforge/atom.hpp"
#include "mwforge/dds.hpp"
#include "mwforge/rf_chain.hpp"
#include "mwforge/synth.hpp"

namespace mwforge {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// "# mode=polar step_ns=4" then index,word_hex rows.
std::string to_csv(const RamProfile& profile);
RamProfile ram_profile_from_csv(std::string_view csv);

/// t_ns,re,im; every stride-th sample.
std::string to_csv(const ComplexEnvelope& envelope, std::size_t stride = 1);
/// f_Hz,dBc
std::string to_csv(const SpectrumEstimate& spectrum);
/// t_s,u,v,w,p_excited
std::string to_csv(const Trajectory& trajectory);
/// detuning_rad_s,p_excited
std::string to_csv(const std::vector<ProfilePoint>& profile);
/// First row: "eps\delta" then detunings; each following row: eps, fidelities.
std::string to_csv(const FidelityMap& map);

}  // namespace mwforge
