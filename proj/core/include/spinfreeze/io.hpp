#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "spinfreeze/engine.hpp"
#include "spinfreeze/protocol.hpp"
#include "spinfreeze/spectral.hpp"

namespace spinfreeze {

// Shortest round-trip decimal representation (std::to_chars), so that
// written files are byte-deterministic and parse back to the same bits.
std::string format_double(double value);

// FNV-1a 64-bit, hex-encoded; used for config hashes and file checksums.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

// Decay curves, schema `storage_time_s,intensity,label,source`.
std::string decay_curve_csv(const DecayCurve& curve);
void write_decay_curve_csv(const DecayCurve& curve, const std::filesystem::path& path);
DecayCurve read_decay_curve_csv(const std::filesystem::path& path);

// Experimental-data schema `storage_time_us,counts_normalized` (the
// loader lives in fitting.hpp).
std::string experimental_csv(const DecayCurve& curve);
void write_experimental_csv(const DecayCurve& curve, const std::filesystem::path& path);

// Fourier maps: a long-format CSV `t_tau,k_over_k0,amplitude_abs` and a
// dense magnitude matrix (rows = time samples) with axis headers. Bins
// outside [k_min, k_max] are dropped.
std::string fourier_map_csv(const FourierMap& map, double k_min, double k_max);
std::string fourier_map_matrix(const FourierMap& map, double k_min, double k_max);

// Phase-space snapshot, little-endian binary: magic "SFPS", u32 version,
// u32 nz, u32 nv, f64 z_half_span, v_half_span, cloud_sigma, t, k0, then
// nz*nv complex amplitudes (re, im as f64), velocity-major rows.
void write_state_snapshot(const PhaseSpaceState& state, std::ostream& out);
void write_state_snapshot(const PhaseSpaceState& state, const std::filesystem::path& path);
PhaseSpaceState read_state_snapshot(std::istream& in);
PhaseSpaceState read_state_snapshot(const std::filesystem::path& path);

}  // namespace spinfreeze
