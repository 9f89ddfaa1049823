#include "dgp/fft.hpp"

#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace dgp {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft1d::Fft1d(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("Fft1d: n must be >= 1");
  buf_in_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * std::size_t(n)));
  buf_out_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * std::size_t(n)));
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_ESTIMATE keeps planning deterministic and leaves buffers untouched.
  fwd_plan_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_in_),
                               reinterpret_cast<fftw_complex*>(buf_out_),
                               FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_plan_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_in_),
                               reinterpret_cast<fftw_complex*>(buf_out_),
                               FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft1d::~Fft1d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_plan_));
  fftw_free(buf_in_);
  fftw_free(buf_out_);
}

Eigen::VectorXcd Fft1d::forward(const Eigen::VectorXcd& in) const {
  if (in.size() != n_) throw std::invalid_argument("Fft1d::forward: size mismatch");
  for (int i = 0; i < n_; ++i) buf_in_[i] = in[i];
  fftw_execute(static_cast<fftw_plan>(fwd_plan_));
  Eigen::VectorXcd out(n_);
  for (int i = 0; i < n_; ++i) out[i] = buf_out_[i];
  return out;
}

Eigen::VectorXcd Fft1d::inverse(const Eigen::VectorXcd& in) const {
  if (in.size() != n_) throw std::invalid_argument("Fft1d::inverse: size mismatch");
  for (int i = 0; i < n_; ++i) buf_in_[i] = in[i];
  fftw_execute(static_cast<fftw_plan>(bwd_plan_));
  Eigen::VectorXcd out(n_);
  for (int i = 0; i < n_; ++i) out[i] = buf_out_[i] / double(n_);
  return out;
}

}  // namespace dgp
