#pragma once

// t-product algebra for third-order tensors.
//
// Every product and factorization here works on Fourier-domain frontal
// slices: transform along mode 3, process slices [0, half_spectrum_size(n3))
// independently, mirror the rest, transform back. A t-product of
// n1 x k x n3 by k x n2 x n3 costs O(n1 n2 k n3 / 2) for the slice products
// plus the FFTs, instead of O(n1 n2 k n3^2) through the block-circulant
// matrix. bcirc/bdiag materialize the block matrices and exist for tests and
// small diagnostics only: bcirc needs O(n1 n2 n3^2) memory.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tcomplete/error.hpp"
#include "tcomplete/mode3.hpp"
#include "tcomplete/parallel.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace detail {

inline Eigen::Map<MatrixXcd> slice_matrix(ComplexTensor3& t, std::size_t k) {
  const Dims& d = t.dims();
  return {t.slice(k).data(), static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2)};
}

inline Eigen::Map<const MatrixXcd> slice_matrix(const ComplexTensor3& t, std::size_t k) {
  const Dims& d = t.dims();
  return {t.slice(k).data(), static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2)};
}

inline Eigen::Map<const MatrixXd> slice_matrix(const Tensor3& t, std::size_t k) {
  const Dims& d = t.dims();
  return {t.slice(k).data(), static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2)};
}

inline void check_svd(Eigen::ComputationInfo info, std::size_t slice) {
  if (info != Eigen::Success) {
    throw NumericalError("SVD did not converge on Fourier slice " + std::to_string(slice + 1));
  }
}

// Singular values of one Fourier slice, descending.
inline Eigen::VectorXd slice_singular_values(const ComplexTensor3& spectrum, std::size_t k) {
  const auto m = slice_matrix(spectrum, k);
  if (is_self_conjugate_slice(k, spectrum.dims().n3)) {
    const MatrixXd real = m.real();
    Eigen::BDCSVD<MatrixXd> svd(real);
    check_svd(svd.info(), k);
    return svd.singularValues();
  }
  Eigen::BDCSVD<MatrixXcd> svd(m);
  check_svd(svd.info(), k);
  return svd.singularValues();
}

}  // namespace detail

struct TSVDFactors {
  Tensor3 u;  // n1 x n1 x n3, orthogonal
  Tensor3 s;  // n1 x n2 x n3, f-diagonal
  Tensor3 v;  // n2 x n2 x n3, orthogonal
};

/// Numerical-rank tolerance relative to the largest singular value.
inline double default_rank_tolerance(const Dims& d) {
  return static_cast<double>(std::max(d.n1, d.n2)) * std::numeric_limits<double>::epsilon();
}

inline Tensor3 tprod(const Tensor3& a, const Tensor3& b) {
  const Dims da = a.dims();
  const Dims db = b.dims();
  if (da.n2 != db.n1 || da.n3 != db.n3) {
    throw DimensionError("tprod: cannot multiply " + to_string(da) + " by " + to_string(db));
  }
  const ComplexTensor3 fa = dft_mode3(a);
  const ComplexTensor3 fb = dft_mode3(b);
  ComplexTensor3 fc(Dims{da.n1, db.n2, da.n3});
  const std::size_t half = half_spectrum_size(da.n3);
  for (std::size_t k = 0; k < half; ++k) {
    detail::slice_matrix(fc, k).noalias() = detail::slice_matrix(fa, k) * detail::slice_matrix(fb, k);
  }
  return idft_mode3(mirror_fill(std::move(fc), half));
}

/// Transposes every frontal slice and reverses the order of slices 2..n3.
inline Tensor3 conj_transpose(const Tensor3& a) {
  const Dims d = a.dims();
  Tensor3 out(Dims{d.n2, d.n1, d.n3});
  for (std::size_t k = 0; k < d.n3; ++k) {
    const std::size_t src = (d.n3 - k) % d.n3;
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t i = 0; i < d.n1; ++i) out(j, i, k) = a(i, j, src);
    }
  }
  return out;
}

inline Tensor3 identity_tensor(std::size_t l, std::size_t n3) {
  Tensor3 e(Dims{l, l, n3});
  for (std::size_t i = 0; i < l; ++i) e(i, i, 0) = 1.0;
  return e;
}

/// Frontal slices stacked vertically: (n1 n3) x n2.
inline MatrixXd unfold(const Tensor3& a) {
  const Dims d = a.dims();
  MatrixXd m(d.n1 * d.n3, d.n2);
  for (std::size_t k = 0; k < d.n3; ++k) {
    m.middleRows(static_cast<Eigen::Index>(k * d.n1), static_cast<Eigen::Index>(d.n1)) =
        detail::slice_matrix(a, k);
  }
  return m;
}

inline Tensor3 fold(const MatrixXd& m, const Dims& d) {
  if (static_cast<std::size_t>(m.rows()) != d.n1 * d.n3 ||
      static_cast<std::size_t>(m.cols()) != d.n2) {
    throw DimensionError("fold: matrix shape does not match " + to_string(d));
  }
  Tensor3 t(d);
  for (std::size_t k = 0; k < d.n3; ++k) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t i = 0; i < d.n1; ++i) {
        t(i, j, k) = m(static_cast<Eigen::Index>(k * d.n1 + i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return t;
}

/// Block-circulant matrix: block (r, c) is frontal slice (r - c) mod n3.
/// O(n1 n2 n3^2) memory.
inline MatrixXd bcirc(const Tensor3& a) {
  const Dims d = a.dims();
  MatrixXd m(d.n1 * d.n3, d.n2 * d.n3);
  for (std::size_t r = 0; r < d.n3; ++r) {
    for (std::size_t c = 0; c < d.n3; ++c) {
      m.block(static_cast<Eigen::Index>(r * d.n1), static_cast<Eigen::Index>(c * d.n2),
              static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2)) =
          detail::slice_matrix(a, (r + d.n3 - c) % d.n3);
    }
  }
  return m;
}

/// Block-diagonal matrix of the frontal slices.
inline MatrixXcd bdiag(const ComplexTensor3& c) {
  const Dims d = c.dims();
  MatrixXcd m = MatrixXcd::Zero(d.n1 * d.n3, d.n2 * d.n3);
  for (std::size_t k = 0; k < d.n3; ++k) {
    m.block(static_cast<Eigen::Index>(k * d.n1), static_cast<Eigen::Index>(k * d.n2),
            static_cast<Eigen::Index>(d.n1), static_cast<Eigen::Index>(d.n2)) =
        detail::slice_matrix(c, k);
  }
  return m;
}

/// Singular values of every Fourier slice (all n3 of them; mirrored slices
/// repeat their partner's values), each sorted descending.
inline std::vector<Eigen::VectorXd> fourier_singular_values(const Tensor3& a) {
  const Dims d = a.dims();
  const ComplexTensor3 spectrum = dft_mode3(a);
  const std::size_t half = half_spectrum_size(d.n3);
  std::vector<Eigen::VectorXd> values(d.n3);
  parallel_for(half, [&](std::size_t k) { values[k] = detail::slice_singular_values(spectrum, k); });
  for (std::size_t k = half; k < d.n3; ++k) values[k] = values[d.n3 - k];
  return values;
}

/// t-SVD a = u * s * v^T. Self-conjugate Fourier slices are factored in real
/// arithmetic so that u, s and v come back real.
inline TSVDFactors tsvd(const Tensor3& a) {
  const Dims d = a.dims();
  const ComplexTensor3 spectrum = dft_mode3(a);
  ComplexTensor3 fu(Dims{d.n1, d.n1, d.n3});
  ComplexTensor3 fs(d);
  ComplexTensor3 fv(Dims{d.n2, d.n2, d.n3});
  const std::size_t half = half_spectrum_size(d.n3);
  const std::size_t rank = std::min(d.n1, d.n2);

  parallel_for(half, [&](std::size_t k) {
    const auto m = detail::slice_matrix(spectrum, k);
    auto u = detail::slice_matrix(fu, k);
    auto v = detail::slice_matrix(fv, k);
    Eigen::VectorXd sigma;
    if (is_self_conjugate_slice(k, d.n3)) {
      const MatrixXd real = m.real();
      Eigen::BDCSVD<MatrixXd> svd(real, Eigen::ComputeFullU | Eigen::ComputeFullV);
      detail::check_svd(svd.info(), k);
      u = svd.matrixU().cast<std::complex<double>>();
      v = svd.matrixV().cast<std::complex<double>>();
      sigma = svd.singularValues();
    } else {
      Eigen::BDCSVD<MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      detail::check_svd(svd.info(), k);
      u = svd.matrixU();
      v = svd.matrixV();
      sigma = svd.singularValues();
    }
    for (std::size_t i = 0; i < rank; ++i) fs(i, i, k) = sigma(static_cast<Eigen::Index>(i));
  });

  return TSVDFactors{idft_mode3(mirror_fill(std::move(fu), half)),
                     idft_mode3(mirror_fill(std::move(fs), half)),
                     idft_mode3(mirror_fill(std::move(fv), half))};
}

inline double spectral_norm(const Tensor3& a) {
  double best = 0.0;
  for (const auto& sigma : fourier_singular_values(a)) {
    if (sigma.size() > 0) best = std::max(best, sigma(0));
  }
  return best;
}

/// (1/n3) * sum of the nuclear norms of all Fourier slices.
inline double tnn(const Tensor3& a) {
  double sum = 0.0;
  for (const auto& sigma : fourier_singular_values(a)) sum += sigma.sum();
  return sum / static_cast<double>(a.dims().n3);
}

/// Same quantity from a t-SVD: the sum of the first-slice diagonal of s.
inline double tnn(const TSVDFactors& f) {
  const Dims d = f.s.dims();
  double sum = 0.0;
  for (std::size_t i = 0; i < std::min(d.n1, d.n2); ++i) sum += f.s(i, i, 0);
  return sum;
}

/// Number of singular tubes s(i, i, :) whose 2-norm exceeds tol times the
/// largest Fourier-slice singular value. Tube norms come from the Fourier
/// singular values through Parseval, so no singular vectors are formed.
inline std::size_t tubal_rank(const Tensor3& a, double tol) {
  if (!(tol >= 0.0)) throw ParameterError("tubal_rank: tol must be nonnegative");
  const auto values = fourier_singular_values(a);
  const Dims d = a.dims();
  const std::size_t rank = std::min(d.n1, d.n2);
  double largest = 0.0;
  for (const auto& sigma : values) largest = std::max(largest, sigma(0));
  std::size_t count = 0;
  for (std::size_t i = 0; i < rank; ++i) {
    double sq = 0.0;
    for (const auto& sigma : values) sq += sigma(static_cast<Eigen::Index>(i)) * sigma(static_cast<Eigen::Index>(i));
    const double tube_norm = std::sqrt(sq / static_cast<double>(d.n3));
    if (tube_norm > tol * largest) ++count;
  }
  return count;
}

inline std::size_t tubal_rank(const Tensor3& a) { return tubal_rank(a, default_rank_tolerance(a.dims())); }

/// rank(bcirc(a)) / n3, counted slice by slice in the Fourier domain.
inline double average_rank(const Tensor3& a, double tol) {
  if (!(tol >= 0.0)) throw ParameterError("average_rank: tol must be nonnegative");
  const auto values = fourier_singular_values(a);
  double largest = 0.0;
  for (const auto& sigma : values) largest = std::max(largest, sigma(0));
  std::size_t count = 0;
  for (const auto& sigma : values) {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
      if (sigma(i) > tol * largest) ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(a.dims().n3);
}

inline double average_rank(const Tensor3& a) { return average_rank(a, default_rank_tolerance(a.dims())); }

}  // namespace tcomplete
