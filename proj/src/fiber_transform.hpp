#pragma once

#include <cstddef>
#include <span>

namespace finsler::bundle::detail {

/// Batched real FFT along contiguous lines of length n (FFTW). Plans are cached
/// per (lines, n) and executed on per-call buffers, so concurrent use is safe.
class FiberTransform {
 public:
  static const FiberTransform& get(std::size_t lines, int n);

  /// outs[q] receives the orders[q]-th derivative of every line.
  void derivatives(const double* in, std::span<double* const> outs, std::span<const int> orders) const;
  /// Zeroes every harmonic above max_harmonic in place.
  void bandlimit(double* data, int max_harmonic) const;

  FiberTransform(const FiberTransform&) = delete;
  FiberTransform& operator=(const FiberTransform&) = delete;
  ~FiberTransform();

 private:
  FiberTransform(std::size_t lines, int n);
  std::size_t lines_;
  int n_;
  void* forward_;
  void* backward_;
};

}  // namespace finsler::bundle::detail
