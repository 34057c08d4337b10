#include "test_support.hpp"

#include <medzisc/errors.hpp>
#include <medzisc/pipeline.hpp>
#include <medzisc/stats.hpp>

#include <gtest/gtest.h>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>

namespace medzisc {
namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

struct Planted {
    double gamma_x = 1.2;   // X -> M for gene001
    double beta_m = 2.0;    // M -> Y for gene001
    double beta_m_unexposed = 0.0;  // M -> Y for gene002, which has no X -> M path
    double noise_sd = 1.0;
};

/**
 * gene001: X -> M -> Y. gene002: M -> Y only when `beta_m_unexposed` is set.
 * Every other gene: M and F independent of X and Y.
 */
PseudobulkDataset planted_dataset(std::uint64_t seed, std::size_t n, std::size_t genes, const Planted& p = {}) {
    Engine engine(seed);
    PseudobulkDataset d;
    d.subjects = test::make_subjects(n, engine, 2);
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(genes);
    d.mean_expression.resize(rows, cols);
    d.zero_fraction.resize(rows, cols);
    boost::random::uniform_real_distribution<double> f_dist(0.2, 0.8);
    for (Eigen::Index j = 0; j < cols; ++j) {
        d.gene_names.push_back(gene_name(static_cast<std::size_t>(j), genes));
        d.f_modeled.push_back(true);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double log_mu = 1.0 + (j == 0 ? p.gamma_x * d.subjects.exposure(i) : 0.0) +
                                  0.2 * d.subjects.covariates(i, 0);
            const double mu = std::exp(log_mu);
            // Pseudobulk mean of 50 cells from NB(mu, 2).
            boost::random::gamma_distribution<double> gamma(2.0, mu / 2.0);
            double total = 0.0;
            for (int c = 0; c < 50; ++c) {
                boost::random::poisson_distribution<int, double> pois(std::max(gamma(engine), 1e-12));
                total += pois(engine);
            }
            d.mean_expression(i, j) = std::max(total / 50.0, 0.02);
            d.zero_fraction(i, j) = f_dist(engine);
        }
    }
    const Eigen::VectorXd noise = test::normal_vector(rows, engine);
    Eigen::VectorXd y = 3.0 * d.subjects.exposure + 0.5 * d.subjects.covariates.col(0) -
                        0.3 * d.subjects.covariates.col(1) + p.beta_m * d.mean_expression.col(0) +
                        p.noise_sd * noise;
    if (genes > 1) y += p.beta_m_unexposed * d.mean_expression.col(1);
    d.subjects.outcome = y;
    return d;
}

void expect_report_invariants(const MediationReport& report, double level) {
    for (const auto* family : {&report.m_results, &report.f_results}) {
        for (const auto& r : *family) {
            EXPECT_DOUBLE_EQ(r.p_max, std::max(r.path_p, r.exposure_p)) << r.gene;
            EXPECT_GE(r.p_adjusted, r.p_max) << r.gene;
            EXPECT_LE(r.p_adjusted, 1.0);
            EXPECT_GE(r.path_p, 0.0);
            EXPECT_GE(r.exposure_p, 0.0);
            EXPECT_EQ(r.significant, r.p_adjusted <= level) << r.gene;
        }
    }
}

// IIE closed forms

TEST(IieM, WorkedExample) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    EXPECT_NEAR(estimate_iie_m(2.0, std::log(2.0), zero, zero, 0.0, 1.0), 2.0, 1e-12);
}

TEST(IieM, ClosedFormWithCovariates) {
    Eigen::VectorXd gz(3), z(3);
    gz << 0.4, -0.2, 0.1;
    z << 1.0, 0.5, -2.0;
    const double expected = 1.7 * std::exp(0.4 - 0.1 - 0.2) * (std::exp(0.8 * 2.0) - std::exp(0.8 * -1.0));
    EXPECT_NEAR(estimate_iie_m(1.7, 0.8, gz, z, -1.0, 2.0), expected, 1e-12 * std::abs(expected));
}

TEST(IieM, EqualContrastIsExactlyZero) {
    const Eigen::VectorXd z = Eigen::VectorXd::Ones(2);
    EXPECT_EQ(estimate_iie_m(5.0, 300.0, z, z, 0.7, 0.7), 0.0);
}

TEST(IieM, LinearInPathCoefficientAndSignRule) {
    Engine engine(1);
    boost::random::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        const double bm = u(engine), gx = u(engine), x1 = u(engine), x2 = u(engine);
        Eigen::VectorXd gz(2), z(2);
        gz << u(engine), u(engine);
        z << u(engine), u(engine);
        const double iie = estimate_iie_m(bm, gx, gz, z, x1, x2);
        EXPECT_DOUBLE_EQ(estimate_iie_m(-bm, gx, gz, z, x1, x2), -iie);
        const double contrast = std::exp(gx * x2) - std::exp(gx * x1);
        const int expected_sign = (bm > 0 ? 1 : -1) * (contrast > 0 ? 1 : (contrast < 0 ? -1 : 0));
        EXPECT_EQ((iie > 0) - (iie < 0), expected_sign);
    }
    EXPECT_EQ(estimate_iie_m(0.0, 1.0, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), 0.0, 1.0), 0.0);
}

TEST(IieM, LengthMismatchRejected) {
    EXPECT_THROW(estimate_iie_m(1.0, 1.0, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), 0, 1), StructuralError);
}

TEST(IieM, OverflowIsNonFinite) {
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(1);
    EXPECT_FALSE(std::isfinite(estimate_iie_m(1.0, 1000.0, z, z, 0.0, 1.0)));
}

TEST(IieF, WorkedExample) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    EXPECT_NEAR(estimate_iie_f(10.0, std::log(0.7 / 0.3), zero, zero, 0.0, 1.0), 2.0, 1e-12);
}

TEST(IieF, ClosedFormWithCovariates) {
    Eigen::VectorXd az(2), z(2);
    az << 0.3, -0.6;
    z << 1.5, 0.25;
    const double off = 0.45 - 0.15;
    const double expected = -4.0 * (1.0 / (1.0 + std::exp(-(1.3 * 0.5 + off))) - 1.0 / (1.0 + std::exp(-(1.3 * -0.5 + off))));
    EXPECT_NEAR(estimate_iie_f(-4.0, 1.3, az, z, -0.5, 0.5), expected, 1e-12);
}

TEST(IieF, EqualContrastIsExactlyZero) {
    const Eigen::VectorXd z = Eigen::VectorXd::Ones(3);
    EXPECT_EQ(estimate_iie_f(5.0, 2.0, z, z, 1.0, 1.0), 0.0);
}

TEST(IieF, BoundedByPathCoefficient) {
    Engine engine(2);
    boost::random::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd az(1), z(1);
        az << u(engine);
        z << u(engine);
        const double bf = u(engine);
        EXPECT_LE(std::abs(estimate_iie_f(bf, u(engine), az, z, u(engine), u(engine))), std::abs(bf));
    }
}

// Configuration

TEST(AnalysisConfig, Validation) {
    auto field_of = [](AnalysisConfig c) {
        try {
            c.validate();
        } catch (const InputError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field_of({}), "<none>");
    AnalysisConfig c;
    c.level = 0.0;
    EXPECT_EQ(field_of(c), "level");
    c = {};
    c.screening_level = 2.0;
    EXPECT_EQ(field_of(c), "screening_level");
    c = {};
    c.folds = 1;
    EXPECT_EQ(field_of(c), "folds");
    c = {};
    c.lambda = -0.1;
    EXPECT_EQ(field_of(c), "lambda");
    c = {};
    c.x2 = std::nan("");
    EXPECT_EQ(field_of(c), "contrast");
}

TEST(Enums, StringRoundTrip) {
    for (auto r : {ScreeningRule::Conjunction, ScreeningRule::Union}) EXPECT_EQ(screening_rule_from_string(to_string(r)), r);
    for (auto o : {NaiveOutcome::Joint, NaiveOutcome::Separate}) EXPECT_EQ(naive_outcome_from_string(to_string(o)), o);
    for (auto m : {Method::MedZIsc, Method::Naive}) EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_THROW(method_from_string("bogus"), InputError);
    EXPECT_THROW(screening_rule_from_string("and"), InputError);
    EXPECT_EQ(mean_term("g1"), "M:g1");
    EXPECT_EQ(zero_term("g1"), "F:g1");
}

// Screening

TEST(Screening, PlantedGeneEntersWithMTerm) {
    const PseudobulkDataset d = planted_dataset(11, 120, 15);
    const ScreeningResult s = screen_mediators(d, AnalysisConfig{});
    EXPECT_TRUE(contains(s.g_y, "gene001"));
    EXPECT_TRUE(contains(s.g_m, "gene001"));
    const auto names = s.candidate_names(d);
    ASSERT_TRUE(contains(names, "gene001"));
    const auto k = std::find(names.begin(), names.end(), "gene001") - names.begin();
    EXPECT_TRUE(s.m_term[static_cast<std::size_t>(k)]);
    EXPECT_EQ(s.marginal.size(), d.gene_count());
    // Oracle: the candidate set follows the conjunction rule exactly.
    for (std::size_t g = 0; g < d.gene_count(); ++g) {
        const auto& name = d.gene_names[g];
        const bool expected = contains(s.g_y, name) && (contains(s.g_m, name) || contains(s.g_f, name));
        EXPECT_EQ(contains(names, name), expected) << name;
    }
}

TEST(Screening, LassoOnlyGeneExcludedUnderConjunction) {
    Planted p;
    p.beta_m_unexposed = 2.0;
    const PseudobulkDataset d = planted_dataset(12, 120, 10, p);
    AnalysisConfig config;
    const ScreeningResult s = screen_mediators(d, config);
    ASSERT_TRUE(contains(s.g_y, "gene002"));
    if (!contains(s.g_m, "gene002") && !contains(s.g_f, "gene002")) {
        EXPECT_FALSE(contains(s.candidate_names(d), "gene002"));
    }
    config.rule = ScreeningRule::Union;
    const ScreeningResult u = screen_mediators(d, config);
    EXPECT_TRUE(contains(u.candidate_names(d), "gene002"));
    // Union admits every term that has a marginal fit.
    for (std::size_t k = 0; k < u.candidates.size(); ++k) {
        EXPECT_EQ(u.m_term[k], u.marginal[u.candidates[k]].nb.has_value());
        EXPECT_EQ(u.f_term[k], u.marginal[u.candidates[k]].beta.has_value());
    }
}

TEST(Screening, EmptyScreenStillReports) {
    PseudobulkDataset d = planted_dataset(13, 80, 8);
    Engine engine(99);
    d.subjects.outcome = test::normal_vector(80, engine);
    AnalysisConfig config;
    config.lambda = 1e6;
    const MediationReport r = run_medzisc(d, config);
    ASSERT_TRUE(r.screening.has_value());
    EXPECT_TRUE(r.screening->candidates.empty());
    EXPECT_TRUE(r.m_results.empty());
    EXPECT_TRUE(r.f_results.empty());
    ASSERT_TRUE(r.direct_effect.has_value());
    ASSERT_TRUE(r.outcome_fit.has_value());
    EXPECT_EQ(r.outcome_fit->names, (std::vector<std::string>{"(Intercept)", "X", "Z1", "Z2"}));
}

TEST(Screening, LargerLevelOnlyGrowsMarginalSets) {
    const PseudobulkDataset d = planted_dataset(14, 100, 25);
    AnalysisConfig strict, loose;
    strict.screening_level = 0.01;
    loose.screening_level = 0.3;
    strict.lambda = loose.lambda = 0.5;
    const ScreeningResult a = screen_mediators(d, strict);
    const ScreeningResult b = screen_mediators(d, loose);
    for (const auto& g : a.g_m) EXPECT_TRUE(contains(b.g_m, g)) << g;
    for (const auto& g : a.g_f) EXPECT_TRUE(contains(b.g_f, g)) << g;
    EXPECT_GE(b.g_m.size() + b.g_f.size(), a.g_m.size() + a.g_f.size());
}

TEST(Screening, FTermRespectsFlags) {
    PseudobulkDataset d = planted_dataset(15, 100, 6);
    d.f_modeled[0] = false;
    AnalysisConfig config;
    config.rule = ScreeningRule::Union;
    const ScreeningResult s = screen_mediators(d, config);
    EXPECT_FALSE(s.marginal[0].beta.has_value());
    EXPECT_FALSE(contains(s.g_f, "gene001"));
    for (const auto& name : s.lasso.names) EXPECT_NE(name, "F:gene001");
    for (std::size_t k = 0; k < s.candidates.size(); ++k) {
        if (s.candidates[k] == 0) EXPECT_FALSE(s.f_term[k]);
    }
}

TEST(Screening, MissingOutcomeRejected) {
    PseudobulkDataset d = planted_dataset(16, 40, 3);
    d.subjects.outcome.reset();
    EXPECT_THROW(screen_mediators(d, AnalysisConfig{}), InputError);
}

// Final models

TEST(FinalModels, EmptyCandidateSetFitsExposureAndCovariates) {
    const PseudobulkDataset d = planted_dataset(17, 60, 4);
    ScreeningResult empty;
    const FinalModels f = fit_final_models(d, empty, AnalysisConfig{});
    EXPECT_EQ(f.outcome.names, (std::vector<std::string>{"(Intercept)", "X", "Z1", "Z2"}));
}

TEST(FinalModels, NoiseFreeRecovery) {
    Planted p;
    p.noise_sd = 0.0;
    const PseudobulkDataset d = planted_dataset(18, 80, 4, p);
    ScreeningResult s;
    s.candidates = {0};
    s.m_term = {true};
    s.f_term = {true};
    const FinalModels f = fit_final_models(d, s, AnalysisConfig{});
    EXPECT_NEAR(f.outcome.coefficient("X"), 3.0, 1e-6);
    EXPECT_NEAR(f.outcome.coefficient("Z1"), 0.5, 1e-6);
    EXPECT_NEAR(f.outcome.coefficient("Z2"), -0.3, 1e-6);
    EXPECT_NEAR(f.outcome.coefficient("M:gene001"), 2.0, 1e-6);
    EXPECT_NEAR(f.outcome.coefficient("F:gene001"), 0.0, 1e-6);
}

TEST(FinalModels, CollinearTermDroppedWithWarning) {
    PseudobulkDataset d = planted_dataset(19, 60, 3);
    d.mean_expression.col(2) = d.mean_expression.col(0);
    ScreeningResult s;
    s.candidates = {0, 2};
    s.m_term = {true, true};
    s.f_term = {false, false};
    const FinalModels f = fit_final_models(d, s, AnalysisConfig{});
    EXPECT_EQ(f.dropped, std::vector<std::string>{"M:gene003"});
    EXPECT_EQ(f.warnings.size(), 1u);
    EXPECT_TRUE(std::find(f.outcome.names.begin(), f.outcome.names.end(), "M:gene001") != f.outcome.names.end());
}

TEST(FinalModels, PlantedPathCoefficientWithinThreeSe) {
    const PseudobulkDataset d = planted_dataset(20, 200, 10);
    const MediationReport r = run_medzisc(d, AnalysisConfig{});
    const auto it = std::find_if(r.m_results.begin(), r.m_results.end(), [](auto& e) { return e.gene == "gene001"; });
    ASSERT_NE(it, r.m_results.end());
    EXPECT_LE(std::abs(it->path_coefficient - 2.0), 3.0 * it->path_se);
    EXPECT_LE(std::abs(it->exposure_coefficient - 1.2), 3.0 * it->exposure_se);
    EXPECT_TRUE(it->significant);
}

// Full procedure

TEST(RunMedzisc, ReportInvariantsAndIieOracle) {
    const PseudobulkDataset d = planted_dataset(21, 150, 12);
    AnalysisConfig config;
    const MediationReport r = run_medzisc(d, config);
    EXPECT_EQ(r.method, Method::MedZIsc);
    expect_report_invariants(r, config.level);
    ASSERT_FALSE(r.m_results.empty());
    // Recompute the IIE of every M entry from the stored marginal fit.
    const Eigen::Vector3d profile(1.0, d.subjects.covariates.col(0).mean(), d.subjects.covariates.col(1).mean());
    for (const auto& e : r.m_results) {
        const RegressionFit& nb = *r.screening->marginal[e.gene_index].nb;
        const Eigen::Vector3d rest(nb.coefficient("(Intercept)"), nb.coefficient("Z1"), nb.coefficient("Z2"));
        const double gx = nb.coefficient("X");
        const double expected = e.path_coefficient * std::exp(rest.dot(profile)) * (std::exp(gx) - 1.0);
        EXPECT_NEAR(e.iie, expected, 1e-10 * std::max(1.0, std::abs(expected)));
        double avg = 0.0;
        for (Eigen::Index i = 0; i < d.subjects.covariates.rows(); ++i) {
            const Eigen::Vector3d zi(1.0, d.subjects.covariates(i, 0), d.subjects.covariates(i, 1));
            avg += e.path_coefficient * std::exp(rest.dot(zi)) * (std::exp(gx) - 1.0);
        }
        avg /= static_cast<double>(d.subjects.covariates.rows());
        EXPECT_NEAR(e.iie_subject_average, avg, 1e-10 * std::max(1.0, std::abs(avg)));
        EXPECT_EQ(e.exposure_p, nb.p_value("X"));
        EXPECT_EQ(e.path_p, r.outcome_fit->p_value(mean_term(e.gene)));
    }
    // Every candidate with an M term that survived has an M entry.
    for (std::size_t k = 0; k < r.screening->candidates.size(); ++k) {
        if (!r.screening->m_term[k]) continue;
        const auto g = r.screening->candidates[k];
        EXPECT_TRUE(std::any_of(r.m_results.begin(), r.m_results.end(), [&](auto& e) { return e.gene_index == g; }));
    }
    EXPECT_TRUE(contains(r.significant_genes(Pathway::M), "gene001"));
}

TEST(RunMedzisc, CustomProfileAndContrast) {
    const PseudobulkDataset d = planted_dataset(22, 100, 6);
    AnalysisConfig config;
    config.lambda = 0.05;
    config.x1 = 0.5;
    config.x2 = 0.5;
    const MediationReport same = run_medzisc(d, config);
    for (const auto& e : same.m_results) EXPECT_EQ(e.iie, 0.0);
    config.x1 = 0.0;
    config.x2 = 1.0;
    config.covariate_profile = std::vector<double>{1.0};
    EXPECT_THROW(run_medzisc(d, config), InputError);
}

TEST(RunMedzisc, DeterministicAcrossThreadCounts) {
    const PseudobulkDataset d = planted_dataset(23, 100, 20);
    AnalysisConfig one, four;
    one.threads = 1;
    four.threads = 4;
    const MediationReport a = run_medzisc(d, one);
    const MediationReport b = run_medzisc(d, four);
    ASSERT_EQ(a.m_results.size(), b.m_results.size());
    for (std::size_t k = 0; k < a.m_results.size(); ++k) {
        EXPECT_EQ(a.m_results[k].gene, b.m_results[k].gene);
        EXPECT_EQ(a.m_results[k].p_adjusted, b.m_results[k].p_adjusted);
        EXPECT_EQ(a.m_results[k].iie, b.m_results[k].iie);
    }
    EXPECT_EQ(a.screening->lasso.coefficients, b.screening->lasso.coefficients);
    EXPECT_EQ(a.warnings, b.warnings);
}

TEST(RunMedzisc, ZeroLegIsRarelySignificant) {
    // gene002 affects Y but X does not affect it: the JS test should reject its M pathway.
    Planted p;
    p.beta_m_unexposed = 1.5;
    int significant = 0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
        const PseudobulkDataset d = planted_dataset(1000 + static_cast<std::uint64_t>(rep), 100, 6, p);
        const MediationReport r = run_medzisc(d, AnalysisConfig{});
        significant += contains(r.significant_genes(Pathway::M), "gene002");
    }
    EXPECT_LE(significant, static_cast<int>(0.05 * reps));
}

// Naive baseline

TEST(RunNaive, EveryGeneTestedAndInvariantsHold) {
    const PseudobulkDataset d = planted_dataset(24, 100, 10);
    for (auto outcome : {NaiveOutcome::Joint, NaiveOutcome::Separate}) {
        AnalysisConfig config;
        config.naive_outcome = outcome;
        const MediationReport r = run_naive(d, config);
        EXPECT_EQ(r.method, Method::Naive);
        EXPECT_EQ(r.m_results.size(), 10u);
        EXPECT_EQ(r.f_results.size(), 10u);
        EXPECT_FALSE(r.screening.has_value());
        expect_report_invariants(r, config.level);
        EXPECT_TRUE(contains(r.significant_genes(Pathway::M), "gene001"));
    }
}

TEST(RunNaive, SingleGeneBhIsIdentity) {
    const PseudobulkDataset d = planted_dataset(25, 80, 1);
    const MediationReport r = run_naive(d, AnalysisConfig{});
    ASSERT_EQ(r.m_results.size(), 1u);
    EXPECT_EQ(r.m_results[0].p_adjusted, r.m_results[0].p_max);
    EXPECT_EQ(r.m_results[0].significant, r.m_results[0].p_max <= 0.05);
}

TEST(RunNaive, JointAndSeparateOutcomeModelsDiffer) {
    const PseudobulkDataset d = planted_dataset(26, 80, 3);
    AnalysisConfig joint, separate;
    joint.naive_outcome = NaiveOutcome::Joint;
    separate.naive_outcome = NaiveOutcome::Separate;
    const auto a = run_naive(d, joint);
    const auto b = run_naive(d, separate);
    EXPECT_EQ(a.m_results[0].exposure_p, b.m_results[0].exposure_p);
    EXPECT_NE(a.m_results[0].path_p, b.m_results[0].path_p);
}

TEST(RunNaive, IdenticalInputsGiveIdenticalReports) {
    const PseudobulkDataset d = planted_dataset(27, 60, 5);
    const auto a = run_method(Method::Naive, d, AnalysisConfig{});
    const auto b = run_method(Method::Naive, d, AnalysisConfig{});
    ASSERT_EQ(a.m_results.size(), b.m_results.size());
    for (std::size_t k = 0; k < a.m_results.size(); ++k) {
        EXPECT_EQ(a.m_results[k].p_adjusted, b.m_results[k].p_adjusted);
        EXPECT_EQ(a.m_results[k].iie, b.m_results[k].iie);
    }
}

}  // namespace
}  // namespace medzisc
