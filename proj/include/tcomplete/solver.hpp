#pragma once

// ADMM drivers for tensor completion with a nuclear-norm term and an optional
// total-variation term:
//
//   min ||Z||_* + lambda * sum ||W_ij||_2   s.t.  A = Z,  W = D A,
//                                                P_Omega(A) = P_Omega(M).
//
// One iteration is a Gauss-Seidel sweep
//   A <- FFT solve of the normal equations, then A <- P_Omega(M) + P_Omega^c(A)
//   Z <- tsvt(A + Q / beta1, 1 / beta1)
//   W <- group_shrink(D A + B / beta2, lambda / beta2)
//   Q <- Q + beta1 (A - Z),   B <- B + beta2 (D A - W)
// TNN-only drops W and B, so the A-step reduces to A = Z - Q / beta1.
//
// Per-iteration cost: O(n1 n2 n3 log(n1 n2)) for the A-step,
// O(n3/2 * (2 n1^2 n2 + n1 n2^2)) for the slice SVDs, O(n1 n2 n3) for the rest.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tcomplete/difference.hpp"
#include "tcomplete/error.hpp"
#include "tcomplete/metrics.hpp"
#include "tcomplete/proximal.hpp"
#include "tcomplete/tensor.hpp"
#include "tcomplete/tproduct.hpp"

namespace tcomplete {

enum class Method { TnnTv1, TnnTv2, TnnOnly };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::TnnTv1: return "tnn-tv1";
    case Method::TnnTv2: return "tnn-tv2";
    case Method::TnnOnly: return "tnn";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  if (name == "tnn-tv1") return Method::TnnTv1;
  if (name == "tnn-tv2") return Method::TnnTv2;
  if (name == "tnn") return Method::TnnOnly;
  throw ParameterError("unknown method '" + std::string(name) + "' (expected tnn-tv1, tnn-tv2 or tnn)");
}

inline bool uses_tv(Method m) { return m != Method::TnnOnly; }

inline DiffOrder diff_order(Method m) { return m == Method::TnnTv2 ? DiffOrder::Second : DiffOrder::First; }

struct SolverConfig {
  Method method = Method::TnnTv2;
  double lambda = 1.0;
  double beta1 = 0.01;
  double beta2 = 1e-4;
  double tol = 1e-4;
  std::size_t max_iter = 500;
  std::size_t log_every = 1;
  // Stopping quantity is (||A^{k+1} - A^k|| / ||A^k||)^rel_change_power.
  double rel_change_power = 2.0;

  /// lambda 0.1 for TNN-TV1, 1 for TNN-TV2; beta1 = 0.01, beta2 = 1e-4, tol = 1e-4.
  static SolverConfig defaults(Method method) {
    SolverConfig c;
    c.method = method;
    c.lambda = method == Method::TnnTv1 ? 0.1 : 1.0;
    return c;
  }

  void validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(beta1)) throw ParameterError("beta1 must be positive");
    if (uses_tv(method)) {
      if (!positive(lambda)) throw ParameterError("lambda must be positive");
      if (!positive(beta2)) throw ParameterError("beta2 must be positive");
    }
    if (!positive(tol)) throw ParameterError("tol must be positive");
    if (!positive(rel_change_power)) throw ParameterError("rel_change_power must be positive");
    if (max_iter < 1) throw ParameterError("max_iter must be at least 1");
    if (log_every < 1) throw ParameterError("log_every must be at least 1");
  }
};

struct SolverState {
  Tensor3 a;
  Tensor3 z;
  ShrinkPair w;  // empty for TNN-only
  Tensor3 q;
  ShrinkPair b;  // empty for TNN-only
  std::size_t iter = 0;
  double z_nuclear_norm = 0.0;  // TNN of z, kept current by the Z-step
};

struct IterationRecord {
  std::size_t iter = 0;
  double rel_change = 0.0;
  double primal_res_split = 0.0;  // ||A - Z||_F
  double primal_res_tv = 0.0;     // ||D A - W||_F, 0 for TNN-only
  double objective = 0.0;         // ||Z||_* + lambda * sum ||W_ij||_2
  std::optional<double> rse;      // rse_standard, when ground truth is known
  std::optional<double> psnr;
};

struct SolveResult {
  Tensor3 recovered;
  std::vector<IterationRecord> history;
  bool converged = false;
};

inline double group_norm_sum(const ShrinkPair& w) {
  double sum = 0.0;
  for (std::size_t n = 0; n < w.y1.size(); ++n) sum += std::hypot(w.y1[n], w.y2[n]);
  return sum;
}

/// ||z||_* + lambda * sum over entries of |(w1, w2)|.
inline double objective(const Tensor3& z, const ShrinkPair& w, double lambda) {
  double value = tnn(z);
  if (!w.y1.empty()) {
    require_same_dims(z, w.y1, "objective");
    require_same_dims(w.y1, w.y2, "objective");
    value += lambda * group_norm_sum(w);
  }
  return value;
}

namespace detail {

inline void require_finite_at(const Tensor3& t, std::size_t iter, const char* name) {
  if (!all_finite(t)) {
    throw NumericalError(std::string("non-finite values in ") + name + " at iteration " +
                         std::to_string(iter));
  }
}

inline ShrinkPair difference(const ShrinkPair& a, const ShrinkPair& b) {
  return {a.y1 - b.y1, a.y2 - b.y2};
}

}  // namespace detail

/// Feasible start: A = P_Omega(M) with zeros elsewhere, Z = A, W = D A,
/// zero multipliers.
inline SolverState initial_state(const SolverConfig& config, const Tensor3& m,
                                 const ObservationMask& mask) {
  require_same_dims(m, mask, "initial_state");
  SolverState s;
  s.a = restrict_to_mask(m, mask);
  s.z = s.a;
  s.q = Tensor3(m.dims());
  if (uses_tv(config.method)) {
    s.w = gradient(s.a, diff_order(config.method));
    s.b = {Tensor3(m.dims()), Tensor3(m.dims())};
  }
  return s;
}

inline SolverState admm_iteration(SolverState state, const SolverConfig& config, const Tensor3& m,
                                  const ObservationMask& mask, const OperatorSpectra& spectra) {
  require_same_dims(state.a, m, "admm_iteration");
  require_same_dims(state.a, mask, "admm_iteration");
  const std::size_t k = state.iter + 1;
  const bool tv = uses_tv(config.method);
  const DiffOrder order = diff_order(config.method);

  Tensor3 a;
  if (tv) {
    Tensor3 rhs = state.z * config.beta1 - state.q;
    rhs += gradient_adjoint({state.w.y1 * config.beta2 - state.b.y1,
                             state.w.y2 * config.beta2 - state.b.y2},
                            order);
    a = solve_a_subproblem(rhs, config.beta1, config.beta2, spectra);
  } else {
    a = state.z - state.q * (1.0 / config.beta1);
  }
  a = project_mask(a, mask, m);
  detail::require_finite_at(a, k, "A");

  auto threshold = tsvt_with_norm(a + state.q * (1.0 / config.beta1), 1.0 / config.beta1);
  state.z = std::move(threshold.value);
  state.z_nuclear_norm = threshold.nuclear_norm;
  detail::require_finite_at(state.z, k, "Z");

  if (tv) {
    const ShrinkPair grad = gradient(a, order);
    const double inv = 1.0 / config.beta2;
    state.w = group_shrink(grad.y1 + state.b.y1 * inv, grad.y2 + state.b.y2 * inv,
                           config.lambda / config.beta2);
    detail::require_finite_at(state.w.y1, k, "W1");
    detail::require_finite_at(state.w.y2, k, "W2");
    state.b.y1 += (grad.y1 - state.w.y1) * config.beta2;
    state.b.y2 += (grad.y2 - state.w.y2) * config.beta2;
    detail::require_finite_at(state.b.y1, k, "B1");
    detail::require_finite_at(state.b.y2, k, "B2");
  }

  state.q += (a - state.z) * config.beta1;
  detail::require_finite_at(state.q, k, "Q");
  state.a = std::move(a);
  state.iter = k;
  return state;
}

/// Runs ADMM until the relative change of A drops to tol or max_iter is hit.
///
/// The stopping test is armed once the relative change has exceeded tol at
/// least once: from the feasible start, A stays put for the first few sweeps
/// while the multipliers build up, and those sweeps must not count as
/// convergence. `ground_truth` may be null; when given, every record carries
/// RSE and PSNR.
inline SolveResult solve(const SolverConfig& config, const Tensor3& m, const ObservationMask& mask,
                         const Tensor3* ground_truth = nullptr,
                         const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  config.validate();
  require_same_dims(m, mask, "solve");
  require_finite(m, "observed tensor");
  if (ground_truth != nullptr) require_same_dims(m, *ground_truth, "solve ground truth");

  const bool tv = uses_tv(config.method);
  const DiffOrder order = diff_order(config.method);
  const OperatorSpectra spectra =
      tv ? compute_spectra(m.dims().n1, m.dims().n2, order) : OperatorSpectra{};

  SolveResult result;
  SolverState state = initial_state(config, m, mask);
  bool armed = false;

  for (std::size_t it = 0; it < config.max_iter; ++it) {
    const double prev_sq = frobenius_norm(state.a) * frobenius_norm(state.a);
    Tensor3 previous = state.a;
    state = admm_iteration(std::move(state), config, m, mask, spectra);

    IterationRecord rec;
    rec.iter = state.iter;
    const double change_sq = squared_distance(state.a, previous);
    const double ratio_sq = change_sq == 0.0 ? 0.0 : change_sq / std::max(prev_sq, std::numeric_limits<double>::min());
    rec.rel_change = std::pow(ratio_sq, config.rel_change_power / 2.0);
    rec.primal_res_split = std::sqrt(squared_distance(state.a, state.z));
    rec.objective = state.z_nuclear_norm;
    if (tv) {
      rec.primal_res_tv = frobenius_norm(detail::difference(gradient(state.a, order), state.w));
      rec.objective += config.lambda * group_norm_sum(state.w);
    }
    if (ground_truth != nullptr) {
      const MetricReport report = metrics(state.a, *ground_truth);
      rec.rse = report.rse_standard;
      rec.psnr = report.psnr;
    }
    result.history.push_back(rec);
    if (on_iteration) on_iteration(rec);

    if (rec.rel_change > config.tol) {
      armed = true;
    } else if (armed) {
      result.converged = true;
      break;
    }
  }
  result.recovered = std::move(state.a);
  return result;
}

/// Shortest round-trip decimal form; infinities print as `inf` / `-inf`.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kIterationCsvHeader = "iter,rel_change,res_split,res_tv,objective,rse,psnr";

/// CSV of every log_every-th record plus the last one. Numbers use the
/// shortest round-trip representation; missing rse/psnr are empty fields.
inline void write_iteration_log(std::ostream& os, const std::vector<IterationRecord>& history,
                                std::size_t log_every) {
  if (log_every < 1) throw ParameterError("log_every must be at least 1");
  os << kIterationCsvHeader << '\n';
  for (std::size_t n = 0; n < history.size(); ++n) {
    const auto& r = history[n];
    if (r.iter % log_every != 0 && n + 1 != history.size()) continue;
    os << r.iter << ',';
    os << format_number(r.rel_change);
    os << ',';
    os << format_number(r.primal_res_split);
    os << ',';
    os << format_number(r.primal_res_tv);
    os << ',';
    os << format_number(r.objective);
    os << ',';
    if (r.rse) os << format_number(*r.rse);
    os << ',';
    if (r.psnr) os << format_number(*r.psnr);
    os << '\n';
  }
}

}  // namespace tcomplete
