#pragma once

// Periodic difference operators applied to every frontal slice.
//
// The operators are circulant, so each is fully described by its first
// column c: C(i, j) = c[(i - j) mod n].
//   First order,  horizontal (C^1, n2 x n2): c = (-1, 1, 0, ..., 0)
//   First order,  vertical   (C^2, n1 x n1): c = (-1, 0, ..., 0, 1)
//   Second order, either direction  (C):    c = (-1, 1/2, 0, ..., 0, 1/2)
// Horizontal operators act from the right (D X = X C), vertical ones from
// the left (D X = C X). Both first-order operators are forward differences
// with wraparound.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tcomplete/error.hpp"
#include "tcomplete/fft.hpp"
#include "tcomplete/proximal.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

enum class DiffOrder { First, Second };

enum class Direction {
  Horizontal = 1,  // along the second index, X * C
  Vertical = 2,    // along the first index, C * X
};

inline std::vector<double> circulant_first_column(std::size_t n, DiffOrder order, Direction dir) {
  if (n < 2) throw ParameterError("difference operator needs n >= 2, got " + std::to_string(n));
  std::vector<double> c(n, 0.0);
  c[0] = -1.0;
  if (order == DiffOrder::First) {
    c[dir == Direction::Horizontal ? 1 : n - 1] += 1.0;
  } else {
    c[1] += 0.5;
    c[n - 1] += 0.5;
  }
  return c;
}

inline Eigen::MatrixXd build_circulant(std::size_t n, DiffOrder order, Direction dir) {
  const auto c = circulant_first_column(n, order, dir);
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c[(i + n - j) % n];
    }
  }
  return m;
}

namespace detail {

struct StencilTap {
  std::size_t offset;
  double weight;
};

inline std::vector<StencilTap> stencil(std::size_t n, DiffOrder order, Direction dir) {
  std::vector<StencilTap> taps;
  const auto c = circulant_first_column(n, order, dir);
  for (std::size_t d = 0; d < n; ++d) {
    if (c[d] != 0.0) taps.push_back({d, c[d]});
  }
  return taps;
}

// out = D t (transpose = false) or D^T t (transpose = true), slice by slice.
//   horizontal D:   out(:, j) = sum_d c[d] t(:, j + d)
//   horizontal D^T: out(:, j) = sum_d c[d] t(:, j - d)
//   vertical D:     out(i, :) = sum_d c[d] t(i - d, :)
//   vertical D^T:   out(i, :) = sum_d c[d] t(i + d, :)
inline Tensor3 apply_stencil(const Tensor3& t, DiffOrder order, Direction dir, bool transpose) {
  const Dims d = t.dims();
  const std::size_t n = dir == Direction::Horizontal ? d.n2 : d.n1;
  if (n < 2) {
    throw DimensionError(std::string("difference operator along ") +
                         (dir == Direction::Horizontal ? "mode 2" : "mode 1") +
                         " needs at least 2 entries, tensor is " + to_string(d));
  }
  const auto taps = stencil(n, order, dir);
  const bool forward = (dir == Direction::Horizontal) != transpose;
  Tensor3 out(d);
  for (std::size_t k = 0; k < d.n3; ++k) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      for (std::size_t i = 0; i < d.n1; ++i) {
        double acc = 0.0;
        for (const auto& tap : taps) {
          const std::size_t shift = forward ? tap.offset : n - tap.offset;
          if (dir == Direction::Horizontal) {
            acc += tap.weight * t(i, (j + shift) % n, k);
          } else {
            acc += tap.weight * t((i + shift) % n, j, k);
          }
        }
        out(i, j, k) = acc;
      }
    }
  }
  return out;
}

}  // namespace detail

inline Tensor3 apply_diff(const Tensor3& t, DiffOrder order, Direction dir) {
  return detail::apply_stencil(t, order, dir, false);
}

inline Tensor3 apply_diff_transpose(const Tensor3& t, DiffOrder order, Direction dir) {
  return detail::apply_stencil(t, order, dir, true);
}

/// (D^1 t, D^2 t): horizontal and vertical differences stacked.
inline ShrinkPair gradient(const Tensor3& t, DiffOrder order) {
  return {apply_diff(t, order, Direction::Horizontal), apply_diff(t, order, Direction::Vertical)};
}

/// Adjoint of gradient: (D^1)^T y1 + (D^2)^T y2.
inline Tensor3 gradient_adjoint(const ShrinkPair& y, DiffOrder order) {
  Tensor3 out = apply_diff_transpose(y.y1, order, Direction::Horizontal);
  out += apply_diff_transpose(y.y2, order, Direction::Vertical);
  return out;
}

/// Isotropic total variation summed over every frontal slice.
inline double total_variation(const Tensor3& t, DiffOrder order) {
  const ShrinkPair g = gradient(t, order);
  double sum = 0.0;
  for (std::size_t n = 0; n < t.size(); ++n) sum += std::hypot(g.y1[n], g.y2[n]);
  return sum;
}

/// Eigenvalues of the left-acting (n1) and right-acting (n2) circulants:
/// lambda_k = DFT of the first column with kernel exp(-2 pi i / n).
struct OperatorSpectra {
  std::vector<std::complex<double>> lambda1;
  std::vector<std::complex<double>> lambda2;
  DiffOrder order = DiffOrder::First;
};

namespace detail {

inline std::vector<std::complex<double>> circulant_eigenvalues(const std::vector<double>& c) {
  const std::size_t n = c.size();
  std::vector<std::complex<double>> lambda(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (c[j] == 0.0) continue;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += c[j] * std::polar(1.0, angle);
    }
    lambda[k] = acc;
  }
  return lambda;
}

}  // namespace detail

inline OperatorSpectra compute_spectra(std::size_t n1, std::size_t n2, DiffOrder order) {
  return {detail::circulant_eigenvalues(circulant_first_column(n1, order, Direction::Vertical)),
          detail::circulant_eigenvalues(circulant_first_column(n2, order, Direction::Horizontal)),
          order};
}

/// beta1 a + beta2 (D^1)^T D^1 a + beta2 (D^2)^T D^2 a.
inline Tensor3 apply_normal_operator(const Tensor3& a, double beta1, double beta2, DiffOrder order) {
  Tensor3 out = a * beta1;
  out += gradient_adjoint(gradient(a, order), order) * beta2;
  return out;
}

/// Solves beta1 A + beta2 (D^1)^T D^1 A + beta2 (D^2)^T D^2 A = r slice by
/// slice. The operator is diagonal under the 2-D DFT of each slice with
/// symbol beta1 + beta2 (|lambda1_i|^2 + |lambda2_j|^2) >= beta1 > 0.
/// O(n1 n2 n3 log(n1 n2)).
inline Tensor3 solve_a_subproblem(const Tensor3& r, double beta1, double beta2,
                                  const OperatorSpectra& spectra) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0) || !std::isfinite(beta1) || !std::isfinite(beta2)) {
    throw ParameterError("solve_a_subproblem: beta1 and beta2 must be positive");
  }
  const Dims d = r.dims();
  if (spectra.lambda1.size() != d.n1 || spectra.lambda2.size() != d.n2) {
    throw DimensionError("solve_a_subproblem: spectra sized for " +
                         std::to_string(spectra.lambda1.size()) + "x" +
                         std::to_string(spectra.lambda2.size()) + ", tensor is " + to_string(d));
  }
  ComplexTensor3 work = complexify(r);
  fft::transform_slices(work, fft::Sign::Forward);
  const double scale = 1.0 / static_cast<double>(d.slice_size());
  for (std::size_t k = 0; k < d.n3; ++k) {
    for (std::size_t j = 0; j < d.n2; ++j) {
      const double h = std::norm(spectra.lambda2[j]);
      for (std::size_t i = 0; i < d.n1; ++i) {
        const double denom = beta1 + beta2 * (h + std::norm(spectra.lambda1[i]));
        work(i, j, k) *= scale / denom;
      }
    }
  }
  fft::transform_slices(work, fft::Sign::Backward);

  Tensor3 out(d);
  double imag_sq = 0.0;
  double total_sq = 0.0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = work[n].real();
    imag_sq += work[n].imag() * work[n].imag();
    total_sq += std::norm(work[n]);
  }
  if (std::sqrt(imag_sq) > 1e-8 * std::sqrt(total_sq)) {
    throw NumericalError("solve_a_subproblem: imaginary residue above tolerance");
  }
  return out;
}

}  // namespace tcomplete
