#include "medzisc/stats.hpp"

#include "medzisc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace medzisc {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double wald_pvalue(double estimate, double se) {
    if (!(se > 0.0) || !std::isfinite(se)) {
        throw DomainError("wald_pvalue: standard error must be positive and finite, got " + std::to_string(se));
    }
    if (!std::isfinite(estimate)) {
        throw DomainError("wald_pvalue: estimate must be finite");
    }
    // 2(1 - Phi(z)) == erfc(z / sqrt 2), without cancellation in the tail.
    const double z = std::abs(estimate) / se;
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

double wald_pvalue_or_degenerate(double estimate, double se) {
    if (!std::isfinite(estimate) || !std::isfinite(se) || se < 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (se == 0.0) {
        return estimate == 0.0 ? 1.0 : 0.0;
    }
    return wald_pvalue(estimate, se);
}

double js_test(double p_a, double p_b) {
    if (!(p_a >= 0.0 && p_a <= 1.0) || !(p_b >= 0.0 && p_b <= 1.0)) {
        throw DomainError("js_test: p-values must lie in [0, 1]");
    }
    return std::max(p_a, p_b);
}

std::vector<double> bh_adjust(std::span<const double> p) {
    const std::size_t m = p.size();
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("bh_adjust: p-values must lie in [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t r = m; r-- > 0;) {
        const double rank = static_cast<double>(r + 1);
        // m / rank >= 1, so the rounded product never falls below the raw p-value.
        const double scaled = std::min(1.0, p[order[r]] * (static_cast<double>(m) / rank));
        running = std::min(running, scaled);
        adjusted[order[r]] = running;
    }
    return adjusted;
}

}  // namespace medzisc
