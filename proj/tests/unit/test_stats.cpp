#include "oracles.hpp"
#include "test_support.hpp"

#include <medzisc/errors.hpp>
#include <medzisc/stats.hpp>

#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace medzisc {
namespace {

TEST(WaldPvalue, ZeroStatisticGivesOne) {
    EXPECT_DOUBLE_EQ(wald_pvalue(0.0, 1.0), 1.0);
}

TEST(WaldPvalue, MatchesNormalQuantiles) {
    const boost::math::normal_distribution<double> standard;
    const double z05 = boost::math::quantile(standard, 0.975);
    const double z01 = boost::math::quantile(standard, 0.995);
    EXPECT_NEAR(wald_pvalue(1.959964, 1.0), 0.05, 1e-4);
    EXPECT_NEAR(wald_pvalue(2.575829, 1.0), 0.01, 1e-4);
    EXPECT_NEAR(wald_pvalue(z05, 1.0), 0.05, 1e-12);
    EXPECT_NEAR(wald_pvalue(-z01 * 3.0, 3.0), 0.01, 1e-12);
}

TEST(WaldPvalue, RejectsBadStandardError) {
    EXPECT_THROW(wald_pvalue(1.0, 0.0), DomainError);
    EXPECT_THROW(wald_pvalue(1.0, -1.0), DomainError);
    EXPECT_THROW(wald_pvalue(std::nan(""), 1.0), DomainError);
}

TEST(WaldPvalue, StrictlyDecreasingInStatistic) {
    double previous = wald_pvalue(0.0, 1.0);
    for (int k = 1; k <= 80; ++k) {
        const double p = wald_pvalue(0.1 * k, 1.0);
        EXPECT_LT(p, previous) << "at z = " << 0.1 * k;
        previous = p;
    }
}

TEST(WaldPvalue, DegenerateVariant) {
    EXPECT_EQ(wald_pvalue_or_degenerate(2.0, 0.0), 0.0);
    EXPECT_EQ(wald_pvalue_or_degenerate(0.0, 0.0), 1.0);
    EXPECT_TRUE(std::isnan(wald_pvalue_or_degenerate(std::nan(""), 1.0)));
}

TEST(JsTest, IsTheMaximum) {
    EXPECT_DOUBLE_EQ(js_test(0.01, 0.04), 0.04);
    EXPECT_DOUBLE_EQ(js_test(1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(js_test(0.3, 0.3), 0.3);
}

TEST(Expit, StableAtExtremes) {
    EXPECT_DOUBLE_EQ(expit(0.0), 0.5);
    EXPECT_EQ(expit(1000.0), 1.0);
    EXPECT_EQ(expit(-1000.0), 0.0);
    EXPECT_NEAR(logit(expit(1.3)), 1.3, 1e-12);
}

TEST(BhAdjust, SingleValueUnchanged) {
    const std::vector<double> p{0.037};
    EXPECT_EQ(bh_adjust(p), p);
}

TEST(BhAdjust, WorkedExample) {
    const std::vector<double> p{0.01, 0.02, 0.03, 0.04};
    for (double q : bh_adjust(p)) {
        EXPECT_DOUBLE_EQ(q, 0.04);
    }
}

TEST(BhAdjust, EmptyInput) {
    EXPECT_TRUE(bh_adjust(std::vector<double>{}).empty());
}

TEST(BhAdjust, RejectsOutOfRange) {
    EXPECT_THROW(bh_adjust(std::vector<double>{0.5, 1.5}), DomainError);
    EXPECT_THROW(bh_adjust(std::vector<double>{std::nan("")}), DomainError);
}

TEST(BhAdjust, MatchesBruteForceOnRandomVectors) {
    EXPECT_EQ(oracle::bh_mismatches(1000, 20240917), 0);
}

TEST(BhAdjust, NeverBelowRawValues) {
    Engine engine(11);
    boost::random::uniform_01<double> unif;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> p(25);
        for (auto& v : p) v = unif(engine);
        const auto q = bh_adjust(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_GE(q[i], p[i]);
            EXPECT_LE(q[i], 1.0);
        }
    }
}

TEST(BhAdjust, MonotoneInSortedOrder) {
    Engine engine(3);
    boost::random::uniform_01<double> unif;
    std::vector<double> p(200);
    for (auto& v : p) v = unif(engine) * unif(engine);
    const auto q = bh_adjust(p);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p[a] < p[b]; });
    for (std::size_t r = 1; r < order.size(); ++r) {
        EXPECT_LE(q[order[r - 1]], q[order[r]]);
    }
}

}  // namespace
}  // namespace medzisc
