#pragma once

// Fourier transform along the third mode.
//
// Forward kernel exp(-2 pi i / n3), unnormalized; the inverse carries 1/n3.
// A real tensor's spectrum is Hermitian along every tube:
//   slice 0 is real and conj(slice k) == slice n3 - k,
// so slice-wise kernels only need slices [0, half_spectrum_size(n3)) and
// mirror_fill reconstructs the rest.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "tcomplete/error.hpp"
#include "tcomplete/fft.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

/// ceil((n3 + 1) / 2): number of leading Fourier slices that determine the rest.
constexpr std::size_t half_spectrum_size(std::size_t n3) noexcept { return n3 / 2 + 1; }

/// Slice 0 and, for even n3, slice n3/2 are their own mirrors, hence real.
constexpr bool is_self_conjugate_slice(std::size_t k, std::size_t n3) noexcept {
  return k == 0 || (n3 % 2 == 0 && k == n3 / 2);
}

/// Mirror-partner weight of slice k in sums over the full spectrum.
constexpr double spectrum_multiplicity(std::size_t k, std::size_t n3) noexcept {
  return is_self_conjugate_slice(k, n3) ? 1.0 : 2.0;
}

inline ComplexTensor3 complexify(const Tensor3& t) {
  ComplexTensor3 c(t.dims());
  for (std::size_t n = 0; n < t.size(); ++n) c[n] = t[n];
  return c;
}

inline ComplexTensor3 dft_mode3(const Tensor3& t) {
  ComplexTensor3 c = complexify(t);
  fft::transform_tubes(c, fft::Sign::Forward);
  return c;
}

/// Inverse along mode 3, keeping the real part.
///
/// Throws NumericalError if the imaginary residue exceeds 1e-8 times the
/// Frobenius norm of the inverse, which means the spectrum was not Hermitian.
inline Tensor3 idft_mode3(const ComplexTensor3& c) {
  ComplexTensor3 work = c;
  fft::transform_tubes(work, fft::Sign::Backward);
  const double scale = 1.0 / static_cast<double>(c.dims().n3);
  Tensor3 out(c.dims());
  double imag_sq = 0.0;
  double total_sq = 0.0;
  for (std::size_t n = 0; n < work.size(); ++n) {
    const std::complex<double> v = work[n] * scale;
    out[n] = v.real();
    imag_sq += v.imag() * v.imag();
    total_sq += std::norm(v);
  }
  if (std::sqrt(imag_sq) > 1e-8 * std::sqrt(total_sq)) {
    throw NumericalError("idft_mode3: imaginary residue " + std::to_string(std::sqrt(imag_sq)) +
                         " exceeds tolerance; spectrum is not conjugate-symmetric");
  }
  return out;
}

/// Completes a half spectrum: slices [half_spectrum_size(n3), n3) become the
/// conjugates of their mirrors, and self-conjugate slices are made exactly
/// real. `computed_upto` is the number of leading slices already populated.
inline ComplexTensor3 mirror_fill(ComplexTensor3 c, std::size_t computed_upto) {
  const Dims d = c.dims();
  const std::size_t half = half_spectrum_size(d.n3);
  if (computed_upto < half || computed_upto > d.n3) {
    throw ParameterError("mirror_fill: need " + std::to_string(half) +
                         " leading slices, got " + std::to_string(computed_upto));
  }
  for (std::size_t k = half; k < d.n3; ++k) {
    auto dst = c.slice(k);
    const auto src = c.slice(d.n3 - k);
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = std::conj(src[n]);
  }
  for (std::size_t k = 0; k < half; ++k) {
    if (!is_self_conjugate_slice(k, d.n3)) continue;
    for (auto& v : c.slice(k)) v = v.real();
  }
  return c;
}

}  // namespace tcomplete
