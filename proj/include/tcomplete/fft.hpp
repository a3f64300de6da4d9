#pragma once

// Batched complex FFTs over tensor layouts, backed by FFTW.
//
// Plans are built once per (layout, sign) with FFTW_ESTIMATE, so the same
// inputs always run the same codelets and give bitwise-identical output.
// Costs: transform_tubes is O(n1 n2 n3 log n3) and transform_slices is
// O(n1 n2 n3 log(n1 n2)) for every length, prime lengths included.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>

#include "tcomplete/error.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete::fft {

enum class Sign : int { Forward = FFTW_FORWARD, Backward = FFTW_BACKWARD };

namespace detail {

enum class Layout : int { Tubes, Slices };

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  // In-place plan over n1*n2*n3 complex values.
  fftw_plan get(Layout layout, const Dims& d, Sign sign) {
    const Key key{static_cast<int>(layout), d.n1, d.n2, d.n3, static_cast<int>(sign)};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    auto* buffer = fftw_alloc_complex(d.size());
    if (buffer == nullptr) throw NumericalError("FFTW buffer allocation failed");
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (layout == Layout::Tubes) {
      int n[] = {static_cast<int>(d.n3)};
      const int stride = static_cast<int>(d.slice_size());
      plan = fftw_plan_many_dft(1, n, static_cast<int>(d.slice_size()), buffer, nullptr, stride, 1,
                                buffer, nullptr, stride, 1, static_cast<int>(sign), flags);
    } else {
      // Row-major {n2, n1} is exactly one column-major n1 x n2 slice.
      int n[] = {static_cast<int>(d.n2), static_cast<int>(d.n1)};
      const int dist = static_cast<int>(d.slice_size());
      plan = fftw_plan_many_dft(2, n, static_cast<int>(d.n3), buffer, nullptr, 1, dist, buffer,
                                nullptr, 1, dist, static_cast<int>(sign), flags);
    }
    fftw_free(buffer);
    if (plan == nullptr) throw NumericalError("FFTW planning failed for " + to_string(d));
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<int, std::size_t, std::size_t, std::size_t, int>;
  PlanCache() = default;

  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

inline void execute(fftw_plan plan, ComplexTensor3& t) {
  // std::complex<double> is layout-compatible with fftw_complex.
  auto* data = reinterpret_cast<fftw_complex*>(t.data());
  fftw_execute_dft(plan, data, data);
}

}  // namespace detail

/// Unnormalized DFT of every tube t(i, j, :), in place.
inline void transform_tubes(ComplexTensor3& t, Sign sign) {
  if (t.dims().n3 == 1) return;
  detail::execute(detail::PlanCache::instance().get(detail::Layout::Tubes, t.dims(), sign), t);
}

/// Unnormalized 2-D DFT of every frontal slice t(:, :, k), in place.
inline void transform_slices(ComplexTensor3& t, Sign sign) {
  detail::execute(detail::PlanCache::instance().get(detail::Layout::Slices, t.dims(), sign), t);
}

}  // namespace tcomplete::fft
