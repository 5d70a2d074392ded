#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <vector>

namespace spinfreeze {

// Allocator backed by fftw_malloc so rows handed to FFTW carry the SIMD
// alignment the plans were created with.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept {
    return true;
  }
};

using AlignedComplexVector =
    std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

// In-place complex 1D transforms of a fixed length. Plans are created
// with FFTW_ESTIMATE (deterministic plan choice) and cached per length;
// execution through the new-array interface is thread-safe on disjoint
// rows. Transforms are unnormalized: inverse(forward(x)) == n * x.
class FftPlan {
 public:
  // Shared, process-wide plan for length n (power of two expected by
  // callers but not required here). Creation is mutex-guarded.
  static std::shared_ptr<const FftPlan> get(int n);

  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int size() const { return n_; }
  void forward(std::complex<double>* row) const;  // e^{-ikz} convention
  void inverse(std::complex<double>* row) const;

 private:
  explicit FftPlan(int n);
  int n_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace spinfreeze
