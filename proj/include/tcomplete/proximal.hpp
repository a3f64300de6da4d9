#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "tcomplete/error.hpp"
#include "tcomplete/mode3.hpp"
#include "tcomplete/parallel.hpp"
#include "tcomplete/tensor.hpp"
#include "tcomplete/tproduct.hpp"

namespace tcomplete {

/// The two stacked gradient-direction blocks (horizontal, vertical).
struct ShrinkPair {
  Tensor3 y1;
  Tensor3 y2;
};

inline double frobenius_norm(const ShrinkPair& p) {
  return std::hypot(frobenius_norm(p.y1), frobenius_norm(p.y2));
}

struct ThresholdResult {
  Tensor3 value;
  double nuclear_norm = 0.0;  // tensor nuclear norm of `value`
};

/// Tensor singular value thresholding, the proximal map of tau * TNN:
///   argmin_X  tau * ||X||_*  +  1/2 ||a - X||_F^2.
/// Soft-thresholds the singular values of each Fourier slice by tau. Also
/// returns the nuclear norm of the result, which falls out of the shrunk
/// singular values for free.
inline ThresholdResult tsvt_with_norm(const Tensor3& a, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ParameterError("tsvt: tau must be positive and finite, got " + std::to_string(tau));
  }
  const Dims d = a.dims();
  ComplexTensor3 spectrum = dft_mode3(a);
  const std::size_t half = half_spectrum_size(d.n3);
  std::vector<double> slice_norms(half, 0.0);

  parallel_for(half, [&](std::size_t k) {
    auto m = detail::slice_matrix(spectrum, k);
    Eigen::BDCSVD<MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_svd(svd.info(), k);
    const Eigen::VectorXd& sigma = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sigma.size() && sigma(keep) > tau) ++keep;
    if (keep == 0) {
      m.setZero();
      return;
    }
    const Eigen::VectorXd shrunk = sigma.head(keep).array() - tau;
    slice_norms[k] = shrunk.sum() * spectrum_multiplicity(k, d.n3);
    m.noalias() = svd.matrixU().leftCols(keep) * shrunk.cast<std::complex<double>>().asDiagonal() *
                  svd.matrixV().leftCols(keep).adjoint();
  });

  double total = 0.0;
  for (double v : slice_norms) total += v;
  return {idft_mode3(mirror_fill(std::move(spectrum), half)), total / static_cast<double>(d.n3)};
}

inline Tensor3 tsvt(const Tensor3& a, double tau) { return tsvt_with_norm(a, tau).value; }

/// Isotropic 2-D shrinkage applied entrywise to the vector (s1, s2):
///   max(r - kappa, 0) * (s1, s2) / r,  r = |(s1, s2)|,  with 0 * (0/0) = 0.
inline ShrinkPair group_shrink(const Tensor3& s1, const Tensor3& s2, double kappa) {
  require_same_dims(s1, s2, "group_shrink");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw ParameterError("group_shrink: kappa must be nonnegative and finite");
  }
  ShrinkPair out{Tensor3(s1.dims()), Tensor3(s1.dims())};
  for (std::size_t n = 0; n < s1.size(); ++n) {
    const double r = std::hypot(s1[n], s2[n]);
    if (r > kappa) {
      const double factor = (r - kappa) / r;
      out.y1[n] = factor * s1[n];
      out.y2[n] = factor * s2[n];
    }
  }
  return out;
}

}  // namespace tcomplete
