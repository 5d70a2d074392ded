#include "spinfreeze/protocol.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spinfreeze/bessel.hpp"

namespace spinfreeze {

void Sequence::validate() const {
  if (events.size() < 2) throw std::invalid_argument("sequence: need at least store and readout");
  if (events.front().kind != Event::Kind::store)
    throw std::invalid_argument("sequence: first event must be store");
  if (events.back().kind != Event::Kind::readout)
    throw std::invalid_argument("sequence: last event must be readout");
  int placeholders = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    switch (e.kind) {
      case Event::Kind::store:
        if (i != 0) throw std::invalid_argument("sequence: store only allowed first");
        break;
      case Event::Kind::readout:
        if (i + 1 != events.size())
          throw std::invalid_argument("sequence: readout only allowed last");
        break;
      case Event::Kind::wait:
        if (!(e.dt >= 0.0)) throw std::invalid_argument("sequence: wait duration must be >= 0");
        break;
      case Event::Kind::storage_wait:
        ++placeholders;
        break;
      case Event::Kind::modulate:
        if (!(e.duration >= 0.0))
          throw std::invalid_argument("sequence: modulate duration must be >= 0");
        if (e.substeps < 1) throw std::invalid_argument("sequence: substeps must be >= 1");
        if (!std::isfinite(e.q) || !std::isfinite(e.area))
          throw std::invalid_argument("sequence: modulate q and area must be finite");
        break;
    }
  }
  if (placeholders > 1)
    throw std::invalid_argument("sequence: at most one storage_wait placeholder");
  if (!(gamma >= 0.0)) throw std::invalid_argument("sequence: gamma must be >= 0");
  if (!(eta_acs > 0.0 && eta_acs <= 1.0))
    throw std::invalid_argument("sequence: eta_acs must be in (0, 1]");
  if (!(tau_seconds > 0.0)) throw std::invalid_argument("sequence: tau_seconds must be > 0");
}

int Sequence::modulate_count() const {
  int n = 0;
  for (const Event& e : events)
    if (e.kind == Event::Kind::modulate) ++n;
  return n;
}

double Sequence::fixed_duration() const {
  double total = 0.0;
  for (const Event& e : events) {
    if (e.kind == Event::Kind::wait) total += e.dt;
    if (e.kind == Event::Kind::modulate) total += e.duration;
  }
  return total;
}

namespace {

void run_wait(PhaseSpaceState& state, double dt, double gamma, const TraceHooks& hooks) {
  if (dt == 0.0) return;
  double remaining = dt;
  const double chunk = hooks.max_step > 0.0 ? hooks.max_step : dt;
  while (remaining > 0.0) {
    const double step = std::min(chunk, remaining);
    state.free_evolve(step);
    state.apply_decay(step, gamma);
    if (hooks.on_step) hooks.on_step(state);
    remaining -= step;
  }
}

void run_modulate(PhaseSpaceState& state, const Event& e, double gamma,
                  const TraceHooks& hooks) {
  const double slice_area = e.area / e.substeps;
  const double slice_dt = e.duration / e.substeps;
  for (int s = 0; s < e.substeps; ++s) {
    state.apply_lattice(e.q, slice_area, slice_dt, 1);
    state.apply_decay(slice_dt, gamma);
    if (hooks.on_step) hooks.on_step(state);
  }
}

}  // namespace

ReadoutSample run_sequence_traced(const Sequence& seq, const TraceHooks& hooks) {
  seq.validate();
  for (const Event& e : seq.events)
    if (e.kind == Event::Kind::storage_wait)
      throw std::invalid_argument(
          "sequence: unresolved storage_wait placeholder (use scan_storage)");

  PhaseSpaceState state(seq.grid);
  if (hooks.on_step) hooks.on_step(state);
  if (hooks.on_boundary) hooks.on_boundary(0, state);

  for (std::size_t i = 1; i + 1 < seq.events.size(); ++i) {
    const Event& e = seq.events[i];
    if (e.kind == Event::Kind::wait)
      run_wait(state, e.dt, seq.gamma, hooks);
    else
      run_modulate(state, e, seq.gamma, hooks);
    if (hooks.on_boundary) hooks.on_boundary(i, state);
  }

  ReadoutSample sample = state.readout();
  const double eta_amp = std::pow(std::sqrt(seq.eta_acs), seq.modulate_count());
  sample.amplitude *= eta_amp;
  sample.intensity = std::norm(sample.amplitude);
  if (hooks.on_boundary) hooks.on_boundary(seq.events.size() - 1, state);
  return sample;
}

ReadoutSample run_sequence(const Sequence& seq) { return run_sequence_traced(seq, {}); }

void DecayCurve::validate() const {
  if (storage_times.size() != intensities.size())
    throw std::invalid_argument("decay curve: times and intensities must have equal length");
  for (std::size_t i = 0; i < storage_times.size(); ++i) {
    if (i > 0 && !(storage_times[i] > storage_times[i - 1]))
      throw std::invalid_argument("decay curve: storage times must be strictly increasing");
    if (!(intensities[i] >= 0.0))
      throw std::invalid_argument("decay curve: intensities must be >= 0");
  }
}

namespace {

// The events before the placeholder are point-independent; run them once
// and clone the state per point.
struct ScanPlan {
  std::size_t placeholder_index = 0;
  double fixed = 0.0;  // clock advance of the non-placeholder events
};

ScanPlan analyze_template(const Sequence& tpl) {
  ScanPlan plan;
  int found = 0;
  for (std::size_t i = 0; i < tpl.events.size(); ++i) {
    if (tpl.events[i].kind == Event::Kind::storage_wait) {
      plan.placeholder_index = i;
      ++found;
    }
  }
  if (found != 1)
    throw std::invalid_argument("scan_storage: template needs exactly one storage_wait placeholder");
  plan.fixed = tpl.fixed_duration();
  return plan;
}

double placeholder_wait(const Sequence& tpl, const ScanPlan& plan, double t_tau) {
  if (tpl.timing == TimingConvention::wait_only) return t_tau;
  return std::max(0.0, t_tau - plan.fixed);
}

}  // namespace

DecayCurve scan_storage(const Sequence& seq_template, std::span<const double> times_s,
                        int threads) {
  Sequence tpl = seq_template;
  const ScanPlan plan = analyze_template(tpl);
  {
    // Validate the rest of the template with the placeholder resolved.
    Sequence probe = tpl;
    probe.events[plan.placeholder_index] = Event::wait(0.0);
    probe.validate();
  }
  if (times_s.empty()) throw std::invalid_argument("scan_storage: empty times list");
  for (std::size_t i = 0; i < times_s.size(); ++i) {
    if (!(times_s[i] >= 0.0)) throw std::invalid_argument("scan_storage: times must be >= 0");
    if (i > 0 && !(times_s[i] > times_s[i - 1]))
      throw std::invalid_argument("scan_storage: times must be strictly increasing");
  }

  // Normalization anchor: unmodulated zero-storage-time run.
  Sequence anchor_seq = tpl;
  anchor_seq.events = {Event::store(), Event::wait(0.0), Event::readout()};
  const double anchor = run_sequence(anchor_seq).intensity;

  // Shared prefix: everything before the placeholder is point-independent.
  PhaseSpaceState prefix_state(tpl.grid);
  {
    TraceHooks hooks;
    for (std::size_t i = 1; i < plan.placeholder_index; ++i) {
      const Event& e = tpl.events[i];
      if (e.kind == Event::Kind::wait)
        run_wait(prefix_state, e.dt, tpl.gamma, hooks);
      else
        run_modulate(prefix_state, e, tpl.gamma, hooks);
    }
  }

  const double eta_amp = std::pow(std::sqrt(tpl.eta_acs), tpl.modulate_count());
  std::vector<double> intensities(times_s.size(), 0.0);

  auto run_point = [&](std::size_t idx) {
    PhaseSpaceState state = prefix_state;
    TraceHooks hooks;
    const double t_tau = times_s[idx] / tpl.tau_seconds;
    run_wait(state, placeholder_wait(tpl, plan, t_tau), tpl.gamma, hooks);
    for (std::size_t i = plan.placeholder_index + 1; i + 1 < tpl.events.size(); ++i) {
      const Event& e = tpl.events[i];
      if (e.kind == Event::Kind::wait)
        run_wait(state, e.dt, tpl.gamma, hooks);
      else
        run_modulate(state, e, tpl.gamma, hooks);
    }
    ReadoutSample sample = state.readout();
    intensities[idx] = std::norm(sample.amplitude * eta_amp) / anchor;
  };

  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, static_cast<int>(times_s.size())));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < times_s.size(); ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < times_s.size(); i = next.fetch_add(1))
          run_point(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  DecayCurve curve;
  curve.storage_times.assign(times_s.begin(), times_s.end());
  curve.intensities = std::move(intensities);
  curve.source = DecayCurve::Source::simulated;
  curve.validate();
  return curve;
}

DecayCurve theoretical_limit(std::span<const double> times_s, double gamma_per_s) {
  if (!(gamma_per_s >= 0.0))
    throw std::invalid_argument("theoretical_limit: gamma must be >= 0");
  const BesselPeak peak = find_first_peak(2);
  const double eta_max = std::pow(peak.value, 4);
  DecayCurve curve;
  curve.storage_times.assign(times_s.begin(), times_s.end());
  curve.intensities.reserve(times_s.size());
  for (double t : times_s) curve.intensities.push_back(eta_max * std::exp(-gamma_per_s * t));
  curve.label = "limit";
  curve.source = DecayCurve::Source::simulated;
  curve.validate();
  return curve;
}

}  // namespace spinfreeze
