#include "spinfreeze/fft.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace spinfreeze {

namespace {
std::mutex g_plan_mutex;
std::map<int, std::shared_ptr<const FftPlan>>& plan_cache() {
  static std::map<int, std::shared_ptr<const FftPlan>> cache;
  return cache;
}
}  // namespace

FftPlan::FftPlan(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("FftPlan: length must be >= 2");
  AlignedComplexVector scratch(static_cast<std::size_t>(n));
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  fwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!fwd_ || !inv_) throw std::runtime_error("FftPlan: planner failed");
}

FftPlan::~FftPlan() {
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
}

std::shared_ptr<const FftPlan> FftPlan::get(int n) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::shared_ptr<const FftPlan>(new FftPlan(n));
  cache.emplace(n, plan);
  return plan;
}

void FftPlan::forward(std::complex<double>* row) const {
  auto* buf = reinterpret_cast<fftw_complex*>(row);
  fftw_execute_dft(fwd_, buf, buf);
}

void FftPlan::inverse(std::complex<double>* row) const {
  auto* buf = reinterpret_cast<fftw_complex*>(row);
  fftw_execute_dft(inv_, buf, buf);
}

}  // namespace spinfreeze
