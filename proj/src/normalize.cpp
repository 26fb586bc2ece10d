#include "cncost/normalize.hpp"

#include <algorithm>

namespace cncost {

std::pair<std::vector<double>, NormalizationParams>
minmax_normalize(const std::vector<double>& xs) {
    const NormalizationParams params = fit_normalization(NormKind::minmax, xs);
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(),
                   [&](double x) { return normalize_value(x, params); });
    return {std::move(out), params};
}

double minmax_denormalize(double y, const NormalizationParams& params) {
    if (params.kind != NormKind::minmax)
        throw WrongKind("minmax_denormalize called with non-minmax params");
    return y * (params.x_max - params.x_min) + params.x_min;
}

double log_normalize(double x) {
    if (!(x > 0.0)) throw NonPositiveInput("log normalization needs a positive input");
    return std::log(x);
}

double log_denormalize(double y) { return std::exp(y); }

NormalizationParams fit_normalization(NormKind kind, const std::vector<double>& xs) {
    if (xs.empty()) throw EmptyDataset("cannot fit normalization on no values");
    NormalizationParams params;
    params.kind = kind;
    if (kind == NormKind::minmax) {
        const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
        params.x_min = *lo;
        params.x_max = *hi;
        if (!(params.x_max > params.x_min))
            throw DegenerateRange("minmax normalization needs max > min");
    } else {
        for (double x : xs)
            if (!(x > 0.0))
                throw NonPositiveInput("log normalization needs strictly positive values");
    }
    return params;
}

double normalize_value(double x, const NormalizationParams& params) {
    if (params.kind == NormKind::minmax)
        return (x - params.x_min) / (params.x_max - params.x_min);
    return log_normalize(x);
}

double denormalize_value(double y, const NormalizationParams& params) {
    if (params.kind == NormKind::minmax) return minmax_denormalize(y, params);
    return log_denormalize(y);
}

} // namespace cncost
