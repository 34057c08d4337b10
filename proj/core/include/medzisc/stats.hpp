#ifndef MEDZISC_STATS_HPP
#define MEDZISC_STATS_HPP

#include <cmath>
#include <span>
#include <vector>

namespace medzisc {

/// Standard normal CDF.
double normal_cdf(double x);

/// Two-sided p-value 2(1 - Phi(|estimate| / se)). Throws DomainError unless se > 0 and estimate is finite.
double wald_pvalue(double estimate, double se);

/**
 * Wald p-value that tolerates degenerate standard errors: se == 0 gives 0 for a
 * nonzero estimate and 1 otherwise; a non-finite input gives NaN.
 */
double wald_pvalue_or_degenerate(double estimate, double se);

/// Joint-significance statistic: the larger of the two component p-values.
double js_test(double p_a, double p_b);

/// Benjamini-Hochberg step-up adjusted p-values, returned in input order.
std::vector<double> bh_adjust(std::span<const double> p);

inline double expit(double x) {
    // Split on sign so neither branch overflows.
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace medzisc

#endif  // MEDZISC_STATS_HPP
