#pragma once

#include "ucahar/types.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <complex>
#include <vector>

namespace ucahar {

// Fourier-domain resampling of a uniformly sampled, periodic-assumed signal
// to `target_len` samples. The spectrum is truncated (downsampling) or
// zero-padded (upsampling); an even-length Nyquist bin is folded or split so
// the output stays real. Amplitudes are rescaled by target_len / n, which
// keeps the signal mean exactly.
template <typename Derived>
Vector<typename Derived::Scalar> resample_fourier(const Eigen::MatrixBase<Derived>& signal,
                                                  Index target_len) {
  using Scalar = typename Derived::Scalar;
  using Complex = std::complex<Scalar>;

  const Index n = signal.size();
  require(n >= 2, "resample_fourier needs at least 2 input samples");
  require(target_len >= 2, "resample_fourier needs a target length of at least 2");

  const Vector<Scalar> contiguous = signal;
  const std::vector<Scalar> input(contiguous.data(), contiguous.data() + n);

  Eigen::FFT<Scalar> fft;
  std::vector<Complex> spectrum;
  fft.fwd(spectrum, input);

  const Index m = target_len;
  const Index shared = std::min(m, n);
  const Index nyq = shared / 2 + 1;
  std::vector<Complex> resized(static_cast<size_t>(m), Complex(0, 0));
  for (Index k = 0; k < nyq; ++k) resized[k] = spectrum[k];
  const Index negative = shared - nyq;
  for (Index k = 1; k <= negative; ++k) resized[m - k] = spectrum[n - k];

  if (shared % 2 == 0 && m != n) {
    const Index half = shared / 2;
    if (m < n) {
      // Fold the -N/2 component into the retained +N/2 bin.
      resized[half] += spectrum[n - half];
    } else {
      resized[half] *= Scalar(0.5);
      resized[m - half] = resized[half];
    }
  }

  std::vector<Complex> restored;
  fft.inv(restored, resized);

  Vector<Scalar> out(m);
  const Scalar gain = static_cast<Scalar>(m) / static_cast<Scalar>(n);
  for (Index i = 0; i < m; ++i) out(i) = restored[i].real() * gain;
  return out;
}

}  // namespace ucahar
