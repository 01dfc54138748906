#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

#include "declip/signal.hpp"

namespace declip {

enum class FftDirection { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

namespace detail {

// FFTW planning is not thread-safe, execution with the new-array interface
// is. Plans are created once per (size, direction) and live for the process.
inline fftw_plan cached_plan(int n, FftDirection dir) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(n, static_cast<int>(dir));
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan p = fftw_plan_dft_1d(n, scratch, scratch, static_cast<int>(dir), FFTW_ESTIMATE);
  fftw_free(scratch);
  if (p == nullptr) throw Error("FFTW planning failed for size " + std::to_string(n));
  plans.emplace(key, p);
  return p;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace detail

/// In-place complex DFT of fixed size on an aligned scratch buffer. Forward
/// uses exp(-2*pi*i*k*n/N); backward is unnormalized. One instance per thread.
class Fft {
 public:
  Fft(std::size_t n, FftDirection dir)
      : n_(n), plan_(detail::cached_plan(static_cast<int>(n), dir)), buf_(fftw_alloc_complex(n)) {}

  std::size_t size() const { return n_; }

  std::span<std::complex<double>> buffer() {
    return {reinterpret_cast<std::complex<double>*>(buf_.get()), n_};
  }

  void execute() { fftw_execute_dft(plan_, buf_.get(), buf_.get()); }

 private:
  std::size_t n_;
  fftw_plan plan_;
  std::unique_ptr<fftw_complex, detail::FftwFree> buf_;
};

}  // namespace declip
