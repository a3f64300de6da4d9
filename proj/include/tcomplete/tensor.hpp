#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tcomplete/error.hpp"

namespace tcomplete {

struct Dims {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t n3 = 0;

  constexpr std::size_t size() const noexcept { return n1 * n2 * n3; }
  constexpr std::size_t slice_size() const noexcept { return n1 * n2; }
  constexpr bool valid() const noexcept { return n1 > 0 && n2 > 0 && n3 > 0; }

  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.n1) + "x" + std::to_string(d.n2) + "x" + std::to_string(d.n3);
}

/// Dense third-order tensor.
///
/// Entries are stored with the first index fastest, then the second, then the
/// third: element (i, j, k) lives at i + n1 * (j + n2 * k). Each frontal slice
/// (:, :, k) is therefore a contiguous column-major n1 x n2 block, which is
/// what the Fourier-domain slice kernels and the TNS3 file format rely on.
template <typename T>
class BasicTensor3 {
 public:
  using value_type = T;

  BasicTensor3() = default;

  explicit BasicTensor3(Dims dims, T fill = T{}) : dims_(dims) {
    if (!dims.valid()) {
      throw DimensionError("tensor dims must be positive, got " + to_string(dims));
    }
    data_.assign(dims.size(), fill);
  }

  BasicTensor3(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (!dims.valid()) {
      throw DimensionError("tensor dims must be positive, got " + to_string(dims));
    }
    if (data_.size() != dims.size()) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match dims " + to_string(dims));
    }
  }

  const Dims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + dims_.n1 * (j + dims_.n2 * k);
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept { return data_[index(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[index(i, j, k)];
  }

  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  std::span<T> slice(std::size_t k) noexcept {
    return std::span<T>(data_).subspan(k * dims_.slice_size(), dims_.slice_size());
  }
  std::span<const T> slice(std::size_t k) const noexcept {
    return std::span<const T>(data_).subspan(k * dims_.slice_size(), dims_.slice_size());
  }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  BasicTensor3& operator+=(const BasicTensor3& other) {
    require_same_dims(other, "+=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
    return *this;
  }

  BasicTensor3& operator-=(const BasicTensor3& other) {
    require_same_dims(other, "-=");
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= other.data_[n];
    return *this;
  }

  BasicTensor3& operator*=(T scale) noexcept {
    for (auto& v : data_) v *= scale;
    return *this;
  }

  friend BasicTensor3 operator+(BasicTensor3 a, const BasicTensor3& b) { return a += b; }
  friend BasicTensor3 operator-(BasicTensor3 a, const BasicTensor3& b) { return a -= b; }
  friend BasicTensor3 operator*(BasicTensor3 a, T s) noexcept { return a *= s; }
  friend BasicTensor3 operator*(T s, BasicTensor3 a) noexcept { return a *= s; }

  friend bool operator==(const BasicTensor3&, const BasicTensor3&) = default;

 private:
  void require_same_dims(const BasicTensor3& other, const char* op) const {
    if (dims_ != other.dims_) {
      throw DimensionError(std::string("tensor ") + op + ": " + to_string(dims_) + " vs " +
                           to_string(other.dims_));
    }
  }

  Dims dims_{};
  std::vector<T> data_;
};

using Tensor3 = BasicTensor3<double>;
using ComplexTensor3 = BasicTensor3<std::complex<double>>;

template <typename A, typename B>
void require_same_dims(const A& a, const B& b, const std::string& what) {
  if (a.dims() != b.dims()) {
    throw DimensionError(what + ": incompatible shapes " + to_string(a.dims()) + " and " +
                         to_string(b.dims()));
  }
}

template <typename T>
double frobenius_norm(const BasicTensor3<T>& t) {
  double sum = 0.0;
  for (const auto& v : t) sum += std::norm(v);
  return std::sqrt(sum);
}

inline double inner_product(const Tensor3& a, const Tensor3& b) {
  require_same_dims(a, b, "inner_product");
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) sum += a[n] * b[n];
  return sum;
}

inline double squared_distance(const Tensor3& a, const Tensor3& b) {
  require_same_dims(a, b, "squared_distance");
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double d = a[n] - b[n];
    sum += d * d;
  }
  return sum;
}

template <typename T>
bool all_finite(const BasicTensor3<T>& t) {
  return std::all_of(t.begin(), t.end(), [](const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      return std::isfinite(v);
    } else {
      return std::isfinite(v.real()) && std::isfinite(v.imag());
    }
  });
}

template <typename T>
void require_finite(const BasicTensor3<T>& t, const std::string& what) {
  if (!all_finite(t)) throw NumericalError(what + " contains non-finite values");
}

/// Membership bitmap for the observed index set. One byte per entry, same
/// layout as Tensor3.
class ObservationMask {
 public:
  ObservationMask() = default;

  explicit ObservationMask(Dims dims, bool fill = false) : dims_(dims) {
    if (!dims.valid()) throw DimensionError("mask dims must be positive, got " + to_string(dims));
    observed_.assign(dims.size(), fill ? 1 : 0);
  }

  ObservationMask(Dims dims, std::vector<std::uint8_t> observed)
      : dims_(dims), observed_(std::move(observed)) {
    if (!dims.valid()) throw DimensionError("mask dims must be positive, got " + to_string(dims));
    if (observed_.size() != dims.size()) {
      throw DimensionError("mask length " + std::to_string(observed_.size()) +
                           " does not match dims " + to_string(dims));
    }
    for (auto v : observed_) {
      if (v > 1) throw ParameterError("mask entries must be 0 or 1");
    }
  }

  static ObservationMask full(Dims dims) { return ObservationMask(dims, true); }

  const Dims& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return observed_.size(); }

  bool operator[](std::size_t flat) const noexcept { return observed_[flat] != 0; }
  bool operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return observed_[i + dims_.n1 * (j + dims_.n2 * k)] != 0;
  }
  void set(std::size_t flat, bool value) noexcept { observed_[flat] = value ? 1 : 0; }

  std::span<const std::uint8_t> bytes() const noexcept { return observed_; }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), 1));
  }
  double sampling_ratio() const noexcept {
    return observed_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(size());
  }

  friend bool operator==(const ObservationMask&, const ObservationMask&) = default;

 private:
  Dims dims_{};
  std::vector<std::uint8_t> observed_;
};

/// Entries of `m` on the observed set, entries of `t` elsewhere.
inline Tensor3 project_mask(const Tensor3& t, const ObservationMask& mask, const Tensor3& m) {
  require_same_dims(t, mask, "project_mask");
  require_same_dims(t, m, "project_mask");
  Tensor3 out = t;
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (mask[n]) out[n] = m[n];
  }
  return out;
}

/// Zeros off the observed set.
inline Tensor3 restrict_to_mask(const Tensor3& t, const ObservationMask& mask) {
  require_same_dims(t, mask, "restrict_to_mask");
  Tensor3 out(t.dims());
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (mask[n]) out[n] = t[n];
  }
  return out;
}

}  // namespace tcomplete
