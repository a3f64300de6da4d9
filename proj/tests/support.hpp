#pragma once

// Test-only generators and brute-force oracles. Nothing here goes through the
// FFT or the Fourier-slice kernels of the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

#include "tcomplete/difference.hpp"
#include "tcomplete/random.hpp"
#include "tcomplete/tensor.hpp"
#include "tcomplete/tproduct.hpp"

namespace tcomplete::testing {

inline Tensor3 random_tensor(const Dims& d, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor3 t(d);
  for (auto& v : t) v = rng.uniform(lo, hi);
  return t;
}

inline Tensor3 random_normal_tensor(const Dims& d, Rng& rng) {
  Tensor3 t(d);
  for (auto& v : t) v = rng.normal();
  return t;
}

inline Dims random_dims(Rng& rng, std::size_t max1, std::size_t max2, std::size_t max3) {
  return {1 + rng.below(max1), 1 + rng.below(max2), 1 + rng.below(max3)};
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

inline double max_abs_diff(const ComplexTensor3& a, const ComplexTensor3& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

inline double relative_error(const Tensor3& got, const Tensor3& want) {
  const double scale = frobenius_norm(want);
  const double diff = std::sqrt(squared_distance(got, want));
  return scale == 0.0 ? diff : diff / scale;
}

inline double loop_frobenius(const Tensor3& t) {
  double s = 0.0;
  const auto d = t.dims();
  for (std::size_t k = 0; k < d.n3; ++k)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t i = 0; i < d.n1; ++i) s += t(i, j, k) * t(i, j, k);
  return std::sqrt(s);
}

inline double loop_inner(const Tensor3& a, const Tensor3& b) {
  double s = 0.0;
  const auto d = a.dims();
  for (std::size_t k = 0; k < d.n3; ++k)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t i = 0; i < d.n1; ++i) s += a(i, j, k) * b(i, j, k);
  return s;
}

/// O(n3^2) DFT along mode 3 with kernel exp(-2 pi i / n3).
inline ComplexTensor3 naive_dft_mode3(const Tensor3& t) {
  const auto d = t.dims();
  ComplexTensor3 out(d);
  for (std::size_t i = 0; i < d.n1; ++i)
    for (std::size_t j = 0; j < d.n2; ++j)
      for (std::size_t f = 0; f < d.n3; ++f) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < d.n3; ++k) {
          const double ang = -2.0 * std::numbers::pi * static_cast<double>(f * k) / static_cast<double>(d.n3);
          acc += t(i, j, k) * std::polar(1.0, ang);
        }
        out(i, j, f) = acc;
      }
  return out;
}

/// Dense n x n DFT matrix F(j, k) = exp(-2 pi i j k / n).
inline Eigen::MatrixXcd dft_matrix(std::size_t n) {
  Eigen::MatrixXcd f(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      f(j, k) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n));
  return f;
}

inline Eigen::MatrixXd slice_matrix(const Tensor3& t, std::size_t k) {
  const auto d = t.dims();
  Eigen::MatrixXd m(d.n1, d.n2);
  for (std::size_t j = 0; j < d.n2; ++j)
    for (std::size_t i = 0; i < d.n1; ++i) m(i, j) = t(i, j, k);
  return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// t-product through the materialized block-circulant matrix.
inline Tensor3 bcirc_tprod(const Tensor3& a, const Tensor3& b) {
  const Eigen::MatrixXd prod = bcirc(a) * unfold(b);
  return fold(prod, Dims{a.dims().n1, b.dims().n2, a.dims().n3});
}

/// Singular values of a dense matrix by one-sided Jacobi (independent of the
/// BDCSVD path used by the library), sorted descending.
inline Eigen::VectorXd jacobi_singular_values(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double tol) {
  const Eigen::VectorXd s = jacobi_singular_values(m);
  if (s.size() == 0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

/// Vectorized normal operator beta1 I + beta2 (K1^T K1 + K2^T K2), where
/// K1 = C_h^T (x) I_{n1} and K2 = I_{n2} (x) C_v act on column-major vec.
inline Eigen::MatrixXd dense_normal_matrix(std::size_t n1, std::size_t n2, double beta1, double beta2, DiffOrder order) {
  const Eigen::MatrixXd ch = build_circulant(n2, order, tcomplete::Direction::Horizontal);
  const Eigen::MatrixXd cv = build_circulant(n1, order, tcomplete::Direction::Vertical);
  const std::size_t n = n1 * n2;
  Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd k2 = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t l = 0; l < n2; ++l)
      for (std::size_t i = 0; i < n1; ++i) k1(i + n1 * j, i + n1 * l) = ch(l, j);
  for (std::size_t j = 0; j < n2; ++j)
    for (std::size_t i = 0; i < n1; ++i)
      for (std::size_t l = 0; l < n1; ++l) k2(i + n1 * j, l + n1 * j) = cv(i, l);
  return beta1 * Eigen::MatrixXd::Identity(n, n) + beta2 * (k1.transpose() * k1 + k2.transpose() * k2);
}

inline Tensor3 dense_solve(const Tensor3& r, double beta1, double beta2, DiffOrder order) {
  const Dims d = r.dims();
  const Eigen::MatrixXd m = dense_normal_matrix(d.n1, d.n2, beta1, beta2, order);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Tensor3 out(d);
  for (std::size_t k = 0; k < d.n3; ++k) {
    const Eigen::Map<const Eigen::VectorXd> rhs(r.data() + k * d.slice_size(), static_cast<Eigen::Index>(d.slice_size()));
    Eigen::Map<Eigen::VectorXd>(out.data() + k * d.slice_size(), static_cast<Eigen::Index>(d.slice_size())) = lu.solve(rhs);
  }
  return out;
}

/// tprod(G1, G2) with G1: n1 x r x n3, G2: r x n2 x n3, entries uniform [0, 1).
inline Tensor3 low_tubal_rank_tensor(const Dims& d, std::size_t r, Rng& rng) {
  const Tensor3 g1 = random_tensor(Dims{d.n1, r, d.n3}, rng, 0.0, 1.0);
  const Tensor3 g2 = random_tensor(Dims{r, d.n2, d.n3}, rng, 0.0, 1.0);
  return tprod(g1, g2);
}

/// Piecewise-smooth synthetic image stack in [0, 1]: smooth gradients, a
/// disc and a bar whose intensities differ per slice.
inline Tensor3 piecewise_smooth_image(std::size_t n1, std::size_t n2, std::size_t n3) {
  Tensor3 t(Dims{n1, n2, n3});
  for (std::size_t k = 0; k < n3; ++k) {
    const double kk = static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n3, 1));
    for (std::size_t j = 0; j < n2; ++j) {
      for (std::size_t i = 0; i < n1; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n1);
        const double y = static_cast<double>(j) / static_cast<double>(n2);
        double v = 0.25 + 0.3 * x + 0.15 * y * (1.0 + kk);
        if ((x - 0.45) * (x - 0.45) + (y - 0.55) * (y - 0.55) < 0.06) v = 0.85 - 0.2 * kk;
        if (y > 0.15 && y < 0.3 && x > 0.2 && x < 0.8) v = 0.1 + 0.3 * kk;
        t(i, j, k) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return t;
}

}  // namespace tcomplete::testing
