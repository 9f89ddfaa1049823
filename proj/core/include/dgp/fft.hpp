#pragma once

#include <complex>

#include <Eigen/Core>

namespace dgp {

// Thin RAII wrapper over FFTW complex 1-d transforms. Plan creation is
// serialized behind a global mutex (the FFTW planner is not thread-safe);
// execution uses per-object buffers, so distinct instances may run
// concurrently.
class Fft1d {
 public:
  explicit Fft1d(int n);
  ~Fft1d();
  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;

  int size() const noexcept { return n_; }

  // out_k = sum_j in_j exp(-2 pi i j k / n)  (unnormalized)
  Eigen::VectorXcd forward(const Eigen::VectorXcd& in) const;
  // out_j = (1/n) sum_k in_k exp(+2 pi i j k / n)
  Eigen::VectorXcd inverse(const Eigen::VectorXcd& in) const;

 private:
  int n_;
  void* fwd_plan_;
  void* bwd_plan_;
  std::complex<double>* buf_in_;
  std::complex<double>* buf_out_;
};

}  // namespace dgp
