#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cncost/errors.hpp"

namespace cncost {

enum class NormKind { minmax, log };

inline std::string to_string(NormKind kind) {
    return kind == NormKind::minmax ? "minmax" : "log";
}

inline NormKind norm_kind_from_string(const std::string& s) {
    if (s == "minmax") return NormKind::minmax;
    if (s == "log") return NormKind::log;
    throw MalformedToken("unknown normalization kind: " + s);
}

/// Fitted statistics of an invertible scalar transform.
///   minmax: x' = (x - x_min) / (x_max - x_min)
///   log:    x' = ln x  (no fitted statistics, no further scaling)
struct NormalizationParams {
    NormKind kind = NormKind::minmax;
    double x_min = 0.0; // minmax only
    double x_max = 1.0; // minmax only
};

/// Fits min/max on xs and maps every value into [0,1].
/// Throws EmptyDataset on no values, DegenerateRange when all equal.
std::pair<std::vector<double>, NormalizationParams>
minmax_normalize(const std::vector<double>& xs);

/// Inverse map y*(x_max - x_min) + x_min. Throws WrongKind unless
/// params.kind == minmax.
double minmax_denormalize(double y, const NormalizationParams& params);

/// ln x; throws NonPositiveInput for x <= 0.
double log_normalize(double x);
/// exp y.
double log_denormalize(double y);

/// Fit of either kind: minmax scans for the range, log only validates
/// positivity (it carries no statistics).
NormalizationParams fit_normalization(NormKind kind, const std::vector<double>& xs);

/// Apply / invert through fitted params, dispatching on params.kind.
double normalize_value(double x, const NormalizationParams& params);
double denormalize_value(double y, const NormalizationParams& params);

} // namespace cncost
