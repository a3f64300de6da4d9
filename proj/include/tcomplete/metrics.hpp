#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcomplete/error.hpp"
#include "tcomplete/tensor.hpp"

namespace tcomplete {

struct MetricReport {
  double rse_paper = 0.0;     // ||original - recovered||^2 / ||recovered||^2
  double rse_standard = 0.0;  // ||original - recovered|| / ||original||
  double psnr = 0.0;          // dB; +inf for an exact reconstruction
  double max_val = 0.0;       // largest entry of the original
};

/// Reconstruction quality of `recovered` against `original`.
///
/// PSNR uses the mean squared error: 10 log10(max_val^2 * N / ||err||^2).
/// rse_paper keeps the recovered tensor in the denominator; rse_standard is
/// the usual relative error against the original.
inline MetricReport metrics(const Tensor3& recovered, const Tensor3& original) {
  require_same_dims(recovered, original, "metrics");
  const double orig_sq = frobenius_norm(original) * frobenius_norm(original);
  if (orig_sq == 0.0) throw ParameterError("metrics: original tensor is zero");
  const double rec_norm = frobenius_norm(recovered);
  const double err_sq = squared_distance(original, recovered);
  constexpr double inf = std::numeric_limits<double>::infinity();

  MetricReport report;
  report.max_val = *std::max_element(original.begin(), original.end());
  report.rse_standard = std::sqrt(err_sq / orig_sq);
  report.rse_paper = err_sq == 0.0 ? 0.0 : (rec_norm == 0.0 ? inf : err_sq / (rec_norm * rec_norm));
  report.psnr = err_sq == 0.0
                    ? inf
                    : 10.0 * std::log10(report.max_val * report.max_val *
                                        static_cast<double>(original.size()) / err_sq);
  return report;
}

}  // namespace tcomplete
