#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spinfreeze/engine.hpp"

namespace spinfreeze {

// Declarative experiment timeline: store, then waits / lattice
// modulations, then readout. All times in units of tau, wavenumbers in
// units of k0.
struct Event {
  enum class Kind { store, wait, storage_wait, modulate, readout };

  Kind kind = Kind::wait;
  double dt = 0.0;        // wait duration
  double q = 0.0;         // modulate: lattice wavenumber
  double area = 0.0;      // modulate: accumulated phase amplitude, rad
  double duration = 0.0;  // modulate: pulse duration
  int substeps = 1;       // modulate: Trotter slices

  static Event store() { return {Kind::store, 0, 0, 0, 0, 1}; }
  static Event wait(double dt) { return {Kind::wait, dt, 0, 0, 0, 1}; }
  // Placeholder whose duration is filled per point by scan_storage.
  static Event storage_wait() { return {Kind::storage_wait, 0, 0, 0, 0, 1}; }
  static Event modulate(double q, double area, double duration, int substeps) {
    return {Kind::modulate, 0, q, area, duration, substeps};
  }
  static Event readout() { return {Kind::readout, 0, 0, 0, 0, 1}; }
};

// How a requested storage time maps onto the wait placeholder:
//   wait_only:     the placeholder wait lasts exactly the storage time.
//   total_elapsed: storage time counts everything between store and
//                  readout; the placeholder absorbs what the pulses do
//                  not use (clamped at zero when they exceed it).
enum class TimingConvention { wait_only, total_elapsed };

struct Sequence {
  std::vector<Event> events;
  double gamma = 0.0;     // intensity decay rate, units of 1/tau
  GridSpec grid;
  double eta_acs = 1.0;   // per-modulation efficiency factor in (0, 1]
  TimingConvention timing = TimingConvention::total_elapsed;
  double tau_seconds = 1.0;  // physical seconds per unit of tau

  void validate() const;  // throws std::invalid_argument
  int modulate_count() const;
  // Total clock advance of all non-placeholder events.
  double fixed_duration() const;
};

// Hooks for observers (spectrum maps, debugging). on_step fires after
// every state advance; on_boundary after each completed event with its
// index. max_step > 0 splits waits into chunks no longer than that.
struct TraceHooks {
  std::function<void(const PhaseSpaceState&)> on_step;
  std::function<void(std::size_t, const PhaseSpaceState&)> on_boundary;
  double max_step = 0.0;
};

// Executes store -> events -> readout on a fresh state. Decay at rate
// gamma runs over all elapsed time; the reported intensity carries one
// factor of eta_acs per modulate event.
ReadoutSample run_sequence(const Sequence& seq);
ReadoutSample run_sequence_traced(const Sequence& seq, const TraceHooks& hooks);

struct DecayCurve {
  enum class Source { simulated, experimental };
  std::vector<double> storage_times;  // seconds, strictly increasing
  std::vector<double> intensities;    // normalized readout, >= 0
  std::string label;
  Source source = Source::simulated;

  void validate() const;
};

// One run per storage time (seconds). The template must contain exactly
// one storage_wait placeholder. Intensities are normalized to an
// unmodulated zero-storage-time run of the same grid. Points are
// independent; `threads` > 1 runs them in parallel with results in
// input order (0 picks the hardware concurrency).
DecayCurve scan_storage(const Sequence& seq_template, std::span<const double> times_s,
                        int threads = 1);

// Ceiling curve eta_max * exp(-gamma t): the fourth power of the peak
// second-order diffraction amplitude, decaying radiatively.
DecayCurve theoretical_limit(std::span<const double> times_s, double gamma_per_s);

}  // namespace spinfreeze
