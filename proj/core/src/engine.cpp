#include "spinfreeze/engine.hpp"

#include <cmath>
#include <stdexcept>

namespace spinfreeze {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Split-table evaluation of exp(i*c*u) for u = 0..u_max: u = a + 256*b,
// one complex multiply per point instead of a sincos. Keeps phase
// accuracy at the ulp level for any dt without per-element libm calls.
struct PhaseTable {
  std::vector<std::complex<double>> low;   // exp(i c a), a < 256
  std::vector<std::complex<double>> high;  // exp(i c 256 b)
  PhaseTable(double c, int u_max) {
    const int nlow = std::min(u_max + 1, 256);
    low.resize(nlow);
    for (int a = 0; a < nlow; ++a) low[a] = std::polar(1.0, c * a);
    const int nhigh = u_max / 256 + 1;
    high.resize(nhigh);
    for (int b = 0; b < nhigh; ++b) high[b] = std::polar(1.0, c * 256.0 * b);
  }
  std::complex<double> operator()(int u) const { return low[u & 255] * high[u >> 8]; }
};

}  // namespace

void GridSpec::validate() const {
  if (!is_power_of_two(nz) || nz < 256)
    throw std::invalid_argument("grid: nz must be a power of two >= 256");
  if (nv < 16) throw std::invalid_argument("grid: nv must be >= 16");
  if (!(z_half_span > 0.0) || !(v_half_span > 0.0))
    throw std::invalid_argument("grid: spans must be > 0");
  if (!(cloud_sigma > 0.0)) throw std::invalid_argument("grid: cloud_sigma must be > 0");
  // The stored wave must be resolved; below two points per period the
  // k0 oscillation aliases and the simulation is meaningless.
  if (!(points_per_wave() > 2.0))
    throw std::invalid_argument("grid: z sampling does not resolve k0 (need > 2 points per wave)");
}

PhaseSpaceState::PhaseSpaceState(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  const int nz = grid_.nz, nv = grid_.nv;
  const double L = grid_.cloud_sigma;
  const double zmax = grid_.z_half_span * L;
  const double dz = grid_.dz();
  const double dv = grid_.dv();

  z_.resize(nz);
  for (int j = 0; j < nz; ++j) z_[j] = -zmax + j * dz;  // periodic, right end open

  v_.resize(nv);
  w_.resize(nv);
  double wsum = 0.0;
  for (int i = 0; i < nv; ++i) {
    v_[i] = -grid_.v_half_span + i * dv;
    w_[i] = std::exp(-0.5 * v_[i] * v_[i]);
    wsum += w_[i];
  }
  for (int i = 0; i < nv; ++i) w_[i] /= wsum;

  readout_phase_.resize(nz);
  norm_anchor_ = 0.0;
  std::vector<double> envelope(nz);
  for (int j = 0; j < nz; ++j) {
    envelope[j] = std::exp(-0.5 * z_[j] * z_[j] / (L * L));
    norm_anchor_ += envelope[j];
    readout_phase_[j] = std::polar(1.0, -k0_ * z_[j]);
  }

  data_.resize(std::size_t(nz) * nv);
  for (int i = 0; i < nv; ++i) {
    std::complex<double>* r = row(i);
    for (int j = 0; j < nz; ++j)
      r[j] = std::polar(envelope[j] * w_[i], k0_ * z_[j]);
  }

  plan_ = FftPlan::get(nz);
}

void PhaseSpaceState::free_evolve(double dt) {
  if (dt < 0.0) throw std::invalid_argument("free_evolve: dt must be >= 0");
  if (dt == 0.0) return;
  const int nz = grid_.nz, nv = grid_.nv;
  const int half = nz / 2;
  const double dk = grid_.dk();
  const double inv_n = 1.0 / nz;

  for (int i = 0; i < nv; ++i) {
    std::complex<double>* r = row(i);
    plan_->forward(r);
    // rho_hat(k) *= exp(-i k v dt); bins j < half carry k = j*dk, the
    // rest k = (j - nz)*dk. The inverse-transform 1/nz is folded in.
    const PhaseTable table(-dk * v_[i] * dt, half);
    for (int j = 0; j < half; ++j) r[j] *= table(j) * inv_n;
    for (int j = half; j < nz; ++j) r[j] *= std::conj(table(nz - j)) * inv_n;
    plan_->inverse(r);
  }
  t_ += dt;
}

void PhaseSpaceState::apply_lattice(double q, double area, double duration, int substeps) {
  if (duration < 0.0) throw std::invalid_argument("apply_lattice: duration must be >= 0");
  if (substeps < 1) throw std::invalid_argument("apply_lattice: substeps must be >= 1");
  const int nz = grid_.nz, nv = grid_.nv;

  const double slice_area = area / substeps;
  const double slice_dt = duration / substeps;
  std::vector<std::complex<double>> imprint(nz);
  for (int j = 0; j < nz; ++j)
    imprint[j] = std::polar(1.0, slice_area * std::sin(q * z_[j]));

  for (int s = 0; s < substeps; ++s) {
    free_evolve(slice_dt);
    for (int i = 0; i < nv; ++i) {
      std::complex<double>* r = row(i);
      for (int j = 0; j < nz; ++j) r[j] *= imprint[j];
    }
  }
}

void PhaseSpaceState::apply_decay(double dt, double gamma) {
  if (dt < 0.0 || gamma < 0.0)
    throw std::invalid_argument("apply_decay: dt and gamma must be >= 0");
  if (dt == 0.0 || gamma == 0.0) return;
  const double scale = std::exp(-0.5 * gamma * dt);
  for (auto& c : data_) c *= scale;
}

ReadoutSample PhaseSpaceState::readout() const {
  const int nz = grid_.nz, nv = grid_.nv;
  std::complex<double> acc{0.0, 0.0};
  for (int i = 0; i < nv; ++i) {  // fixed reduction order
    const std::complex<double>* r = row(i);
    std::complex<double> rowsum{0.0, 0.0};
    for (int j = 0; j < nz; ++j) rowsum += r[j] * readout_phase_[j];
    acc += rowsum;
  }
  ReadoutSample out;
  out.amplitude = acc / norm_anchor_;
  out.intensity = std::norm(out.amplitude);
  return out;
}

std::vector<std::complex<double>> PhaseSpaceState::v_averaged_profile() const {
  const int nz = grid_.nz, nv = grid_.nv;
  std::vector<std::complex<double>> profile(nz, {0.0, 0.0});
  for (int i = 0; i < nv; ++i) {
    const std::complex<double>* r = row(i);
    for (int j = 0; j < nz; ++j) profile[j] += r[j];
  }
  return profile;
}

double PhaseSpaceState::norm2() const {
  double acc = 0.0;
  for (const auto& c : data_) acc += std::norm(c);
  return acc;
}

}  // namespace spinfreeze
