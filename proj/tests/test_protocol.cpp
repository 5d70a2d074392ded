#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinfreeze/bessel.hpp"
#include "spinfreeze/protocol.hpp"

using namespace spinfreeze;

namespace {

constexpr double kAreaPeak2 = 3.0542369282271404;

GridSpec small_grid() {
  GridSpec g;
  g.nz = 512;
  g.nv = 100;
  return g;
}

Sequence base_sequence() {
  Sequence seq;
  seq.grid = small_grid();
  seq.gamma = 0.0;
  seq.eta_acs = 1.0;
  seq.tau_seconds = 2.3e-6;
  return seq;
}

}  // namespace

TEST_CASE("store then immediate readout gives unity") {
  Sequence seq = base_sequence();
  seq.events = {Event::store(), Event::wait(0.0), Event::readout()};
  CHECK(run_sequence(seq).intensity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("storage combines thermal and radiative decay") {
  Sequence seq = base_sequence();
  seq.gamma = 0.2;
  const double t = 1.5;
  seq.events = {Event::store(), Event::wait(t), Event::readout()};
  const double expected = std::exp(-t * t) * std::exp(-seq.gamma * t);
  CHECK(run_sequence(seq).intensity == doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("two optimal pulses revive the wave at the Bessel ceiling") {
  Sequence seq = base_sequence();
  seq.gamma = 0.0151847;  // default physical gamma in tau units
  const double wait = 12.0;
  seq.events = {Event::store(), Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::wait(wait),
                Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::readout()};
  const double j2 = bessel_j(2, kAreaPeak2);
  const double expected = std::pow(j2, 4) * std::exp(-seq.gamma * wait);
  CHECK(run_sequence(seq).intensity == doctest::Approx(expected).epsilon(1e-2));
}

TEST_CASE("sequence modulation matches the engine's own slicing") {
  // The runner interleaves decay between slices; the engine applies the
  // pulse whole. Same Trotter scheme, so the readouts must agree to
  // rounding.
  const double q = 0.485, area = kAreaPeak2, duration = 0.54, gamma = 0.2;
  PhaseSpaceState whole(small_grid());
  whole.apply_lattice(q, area, duration, 8);
  whole.apply_decay(duration, gamma);

  Sequence seq = base_sequence();
  seq.gamma = gamma;
  seq.events = {Event::store(), Event::modulate(q, area, duration, 8), Event::readout()};
  const double via_runner = run_sequence(seq).intensity;
  CHECK(via_runner == doctest::Approx(whole.readout().intensity).epsilon(1e-13));
}

TEST_CASE("reported intensity scales exactly with eta_acs squared") {
  Sequence seq = base_sequence();
  seq.events = {Event::store(), Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::wait(4.0),
                Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::readout()};
  const double full = run_sequence(seq).intensity;
  seq.eta_acs = 0.71;
  const double scaled = run_sequence(seq).intensity;
  CHECK(scaled / full == doctest::Approx(0.71 * 0.71).epsilon(1e-12));
}

TEST_CASE("optimal-area runs stay below the theoretical limit") {
  Sequence seq = base_sequence();
  seq.gamma = 0.0151847;
  const std::vector<double> waits = {0.0, 1.0, 3.0, 8.0, 15.0};
  for (double wait : waits) {
    seq.events = {Event::store(), Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::wait(wait),
                  Event::modulate(0.5, kAreaPeak2, 0.0, 1), Event::readout()};
    const double intensity = run_sequence(seq).intensity;
    const double t_s = wait * seq.tau_seconds;
    const double limit =
        theoretical_limit(std::vector<double>{t_s}, seq.gamma / seq.tau_seconds).intensities[0];
    CHECK(intensity <= limit * 1.01 + 1e-12);
  }
}

TEST_CASE("unmodulated scan follows the analytic law pointwise") {
  Sequence tpl = base_sequence();
  tpl.events = {Event::store(), Event::storage_wait(), Event::readout()};
  std::vector<double> times;
  for (int i = 0; i <= 8; ++i) times.push_back(i * 0.375 * tpl.tau_seconds);
  const DecayCurve curve = scan_storage(tpl, times, 1);
  REQUIRE(curve.storage_times.size() == times.size());
  CHECK(curve.source == DecayCurve::Source::simulated);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t_tau = times[i] / tpl.tau_seconds;
    CHECK(std::abs(curve.intensities[i] - std::exp(-t_tau * t_tau)) < 1e-2);
  }
}

TEST_CASE("scan points are independent of batch composition and thread count") {
  Sequence tpl = base_sequence();
  tpl.gamma = 0.0151847;
  tpl.events = {Event::store(), Event::modulate(0.485, kAreaPeak2, 0.54, 8),
                Event::storage_wait(), Event::modulate(0.485, kAreaPeak2, 0.54, 8),
                Event::readout()};
  std::vector<double> times;
  for (int i = 0; i < 6; ++i) times.push_back((2.0 + i) * 1e-6);

  const DecayCurve serial = scan_storage(tpl, times, 1);
  const DecayCurve parallel = scan_storage(tpl, times, 4);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(serial.intensities[i] == parallel.intensities[i]);  // bitwise

  const std::vector<double> just_one = {times[3]};
  const DecayCurve single = scan_storage(tpl, just_one, 1);
  CHECK(single.intensities[0] == serial.intensities[3]);  // bitwise
}

TEST_CASE("timing conventions map storage time onto the placeholder wait") {
  Sequence tpl = base_sequence();
  tpl.events = {Event::store(), Event::modulate(0.485, kAreaPeak2, 0.54, 4),
                Event::storage_wait(), Event::modulate(0.485, kAreaPeak2, 0.54, 4),
                Event::readout()};
  const double t_tau = 10.0;
  const double t_s = t_tau * tpl.tau_seconds;

  tpl.timing = TimingConvention::wait_only;
  const double wait_only = scan_storage(tpl, std::vector<double>{t_s}, 1).intensities[0];
  tpl.timing = TimingConvention::total_elapsed;
  const double total = scan_storage(tpl, std::vector<double>{t_s}, 1).intensities[0];

  Sequence direct = tpl;
  direct.events[2] = Event::wait(t_tau);
  const double expect_wait_only = run_sequence(direct).intensity;
  direct.events[2] = Event::wait(t_tau - 2.0 * 0.54);
  const double expect_total = run_sequence(direct).intensity;

  CHECK(wait_only == doctest::Approx(expect_wait_only).epsilon(1e-12));
  CHECK(total == doctest::Approx(expect_total).epsilon(1e-12));
  CHECK(wait_only != total);
}

TEST_CASE("total-elapsed clamps the wait for storage shorter than the pulses") {
  Sequence tpl = base_sequence();
  tpl.timing = TimingConvention::total_elapsed;
  tpl.events = {Event::store(), Event::modulate(0.485, kAreaPeak2, 0.54, 4),
                Event::storage_wait(), Event::modulate(0.485, kAreaPeak2, 0.54, 4),
                Event::readout()};
  const DecayCurve curve = scan_storage(tpl, std::vector<double>{0.0}, 1);
  Sequence direct = tpl;
  direct.events[2] = Event::wait(0.0);
  CHECK(curve.intensities[0] == doctest::Approx(run_sequence(direct).intensity).epsilon(1e-12));
}

TEST_CASE("q closer to half k0 keeps more tail intensity") {
  Sequence tpl = base_sequence();
  tpl.events = {Event::store(), Event::modulate(0.5, kAreaPeak2, 0.0, 1),
                Event::storage_wait(), Event::modulate(0.5, kAreaPeak2, 0.0, 1),
                Event::readout()};
  const std::vector<double> tail = {20.0 * tpl.tau_seconds};
  auto tail_intensity = [&](double q) {
    Sequence s = tpl;
    s.events[1].q = q;
    s.events[3].q = q;
    return scan_storage(s, tail, 1).intensities[0];
  };
  const double best = tail_intensity(0.5);
  const double mid = tail_intensity(0.485);
  const double worst = tail_intensity(0.456);
  CHECK(best > mid);
  CHECK(mid > worst);
}

TEST_CASE("theoretical limit starts at the Bessel ceiling") {
  const std::vector<double> times = {0.0, 10e-6, 24.1e-6};
  const double gamma = 1.0 / 24.1e-6;
  const DecayCurve limit = theoretical_limit(times, gamma);
  CHECK(limit.intensities[0] == doctest::Approx(0.056).epsilon(0.01));
  CHECK(limit.intensities[2] ==
        doctest::Approx(limit.intensities[0] * std::exp(-1.0)).epsilon(1e-12));
  const DecayCurve flat = theoretical_limit(times, 0.0);
  CHECK(flat.intensities[0] == flat.intensities[2]);
}

TEST_CASE("sequence validation rejects malformed timelines") {
  Sequence seq = base_sequence();
  seq.events = {Event::wait(1.0), Event::readout()};
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);
  seq.events = {Event::store(), Event::wait(1.0)};
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);
  seq.events = {Event::store(), Event::wait(-1.0), Event::readout()};
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);
  seq.events = {Event::store(), Event::storage_wait(), Event::readout()};
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);  // unresolved placeholder
  seq.events = {Event::store(), Event::wait(1.0), Event::readout()};
  seq.eta_acs = 0.0;
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);
  seq = base_sequence();
  seq.events = {Event::store(), Event::wait(1.0), Event::readout()};
  seq.gamma = -0.1;
  CHECK_THROWS_AS(run_sequence(seq), std::invalid_argument);
}

TEST_CASE("scan validation") {
  Sequence tpl = base_sequence();
  tpl.events = {Event::store(), Event::wait(1.0), Event::readout()};
  CHECK_THROWS_AS(scan_storage(tpl, std::vector<double>{0.0, 1e-6}, 1), std::invalid_argument);
  tpl.events = {Event::store(), Event::storage_wait(), Event::readout()};
  CHECK_THROWS_AS(scan_storage(tpl, std::vector<double>{}, 1), std::invalid_argument);
  CHECK_THROWS_AS(scan_storage(tpl, std::vector<double>{1e-6, 1e-6}, 1), std::invalid_argument);
  CHECK_THROWS_AS(scan_storage(tpl, std::vector<double>{-1e-6, 1e-6}, 1), std::invalid_argument);
}
