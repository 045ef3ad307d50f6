#include "fiber_transform.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace finsler::bundle::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealBuffer {
  explicit RealBuffer(std::size_t n) : p(fftw_alloc_real(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~RealBuffer() { fftw_free(p); }
  double* p;
};

struct ComplexBuffer {
  explicit ComplexBuffer(std::size_t n) : p(fftw_alloc_complex(n)) {
    if (!p) throw std::bad_alloc();
  }
  ~ComplexBuffer() { fftw_free(p); }
  fftw_complex* p;
};

}  // namespace

FiberTransform::FiberTransform(std::size_t lines, int n) : lines_(lines), n_(n) {
  const int nc = n / 2 + 1;
  RealBuffer r(lines * n);
  ComplexBuffer c(lines * nc);
  int len[1] = {n};
  std::lock_guard<std::mutex> lock(planner_mutex());
  forward_ = fftw_plan_many_dft_r2c(1, len, static_cast<int>(lines), r.p, nullptr, 1, n, c.p, nullptr, 1, nc,
                                    FFTW_ESTIMATE);
  backward_ = fftw_plan_many_dft_c2r(1, len, static_cast<int>(lines), c.p, nullptr, 1, nc, r.p, nullptr, 1, n,
                                     FFTW_ESTIMATE);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

FiberTransform::~FiberTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

const FiberTransform& FiberTransform::get(std::size_t lines, int n) {
  static std::mutex m;
  static std::map<std::pair<std::size_t, int>, std::unique_ptr<FiberTransform>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[{lines, n}];
  if (!slot) slot.reset(new FiberTransform(lines, n));
  return *slot;
}

void FiberTransform::derivatives(const double* in, std::span<double* const> outs, std::span<const int> orders) const {
  const int n = n_;
  const int nc = n / 2 + 1;
  const std::size_t total = lines_ * n;
  RealBuffer r(total);
  ComplexBuffer spec(lines_ * nc);
  ComplexBuffer work(lines_ * nc);
  std::memcpy(r.p, in, total * sizeof(double));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), r.p, spec.p);
  const double norm = 1.0 / n;
  for (std::size_t q = 0; q < outs.size(); ++q) {
    const int p = orders[q];
    // (i m)^p as a complex multiplier per harmonic; odd orders drop Nyquist.
    std::vector<std::complex<double>> mult(nc);
    for (int m = 0; m < nc; ++m) {
      std::complex<double> im(0.0, static_cast<double>(m));
      std::complex<double> v = 1.0;
      for (int e = 0; e < p; ++e) v *= im;
      if (m == n / 2 && p % 2 == 1) v = 0.0;
      mult[m] = v * norm;
    }
    for (std::size_t l = 0; l < lines_; ++l) {
      fftw_complex* s = spec.p + l * nc;
      fftw_complex* w = work.p + l * nc;
      for (int m = 0; m < nc; ++m) {
        const double a = s[m][0], b = s[m][1];
        const double cr = mult[m].real(), ci = mult[m].imag();
        w[m][0] = a * cr - b * ci;
        w[m][1] = a * ci + b * cr;
      }
    }
    fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), work.p, r.p);
    std::memcpy(outs[q], r.p, total * sizeof(double));
  }
}

void FiberTransform::bandlimit(double* data, int max_harmonic) const {
  const int n = n_;
  const int nc = n / 2 + 1;
  const std::size_t total = lines_ * n;
  RealBuffer r(total);
  ComplexBuffer spec(lines_ * nc);
  std::memcpy(r.p, data, total * sizeof(double));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_), r.p, spec.p);
  const double norm = 1.0 / n;
  for (std::size_t l = 0; l < lines_; ++l) {
    fftw_complex* s = spec.p + l * nc;
    for (int m = 0; m < nc; ++m) {
      const double f = m <= max_harmonic ? norm : 0.0;
      s[m][0] *= f;
      s[m][1] *= f;
    }
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(backward_), spec.p, r.p);
  std::memcpy(data, r.p, total * sizeof(double));
}

}  // namespace finsler::bundle::detail
