#include "medzisc/report.hpp"

#include "medzisc/io.hpp"

#include <cmath>

namespace medzisc {

namespace {

using nlohmann::json;

// JSON has no NaN/Inf; write them as null.
json number(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json optional_number(const std::optional<double>& value) { return value ? number(*value) : json(nullptr); }

std::string optional_text(const std::optional<double>& value) { return value ? format_number(*value) : "NA"; }

json names_json(const std::vector<std::string>& names) { return json(names); }

}  // namespace

json to_json(const LassoFit& fit) {
    json coefficients = json::object();
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        const double b = fit.coefficients(static_cast<Eigen::Index>(j));
        if (b != 0.0) {
            coefficients[fit.names[j]] = number(b);
        }
    }
    return {
        {"lambda", number(fit.lambda)},
        {"lambda_max", number(fit.lambda_max)},
        {"intercept", number(fit.intercept)},
        {"nonzero_coefficients", coefficients},
        {"selected", names_json(fit.selected)},
        {"unpenalized", names_json(fit.unpenalized)},
        {"dropped", names_json(fit.dropped)},
        {"converged", fit.converged},
        {"sweeps", fit.sweeps},
        {"cv_lambdas", fit.cv_lambdas},
        {"cv_errors", fit.cv_errors},
    };
}

json to_json(const ScreeningResult& s, const PseudobulkDataset& dataset) {
    json candidates = json::array();
    for (std::size_t k = 0; k < s.candidates.size(); ++k) {
        candidates.push_back({{"gene", dataset.gene_names[s.candidates[k]]},
                              {"m_term", static_cast<bool>(s.m_term[k])},
                              {"f_term", static_cast<bool>(s.f_term[k])}});
    }
    return {
        {"g_y", names_json(s.g_y)},
        {"g_m", names_json(s.g_m)},
        {"g_f", names_json(s.g_f)},
        {"candidates", candidates},
        {"lasso", to_json(s.lasso)},
    };
}

json to_json(const GeneMediationResult& r) {
    json out{
        {"gene", r.gene},
        {"pathway", to_string(r.pathway)},
        {"path_coefficient", number(r.path_coefficient)},
        {"path_se", number(r.path_se)},
        {"path_p", number(r.path_p)},
        {"exposure_coefficient", number(r.exposure_coefficient)},
        {"exposure_se", number(r.exposure_se)},
        {"exposure_p", number(r.exposure_p)},
        {"iie", number(r.iie)},
        {"iie_subject_average", number(r.iie_subject_average)},
        {"p_max", number(r.p_max)},
        {"p_adjusted", number(r.p_adjusted)},
        {"significant", r.significant},
    };
    if (!r.diagnostic.empty()) {
        out["diagnostic"] = r.diagnostic;
    }
    return out;
}

json to_json(const MediationReport& report, const PseudobulkDataset& dataset) {
    json out{{"method", to_string(report.method)}};
    if (report.direct_effect) {
        out["direct_effect"] = {{"estimate", number(report.direct_effect->estimate)},
                                {"se", number(report.direct_effect->standard_error)},
                                {"p", number(report.direct_effect->p_value)}};
    } else {
        out["direct_effect"] = nullptr;
    }
    out["outcome_fit"] = report.outcome_fit ? to_json(*report.outcome_fit) : json(nullptr);
    json m = json::array(), f = json::array();
    for (const auto& r : report.m_results) m.push_back(to_json(r));
    for (const auto& r : report.f_results) f.push_back(to_json(r));
    out["m_family"] = m;
    out["f_family"] = f;
    out["significant"] = {{"M", names_json(report.significant_genes(Pathway::M))},
                          {"F", names_json(report.significant_genes(Pathway::F))}};
    out["screening"] = report.screening ? to_json(*report.screening, dataset) : json(nullptr);
    out["warnings"] = names_json(report.warnings);
    return out;
}

std::string mediation_tsv(const MediationReport& report) {
    std::string out =
        "gene\tpathway\tpath_coefficient\tpath_se\tpath_p\texposure_coefficient\texposure_se\texposure_p\t"
        "iie\tiie_subject_average\tp_max\tp_adjusted\tsignificant\n";
    for (const auto* family : {&report.m_results, &report.f_results}) {
        for (const auto& r : *family) {
            out += r.gene + '\t' + to_string(r.pathway);
            for (double v : {r.path_coefficient, r.path_se, r.path_p, r.exposure_coefficient, r.exposure_se,
                             r.exposure_p, r.iie, r.iie_subject_average, r.p_max, r.p_adjusted}) {
                out += '\t' + format_number(v);
            }
            out += std::string("\t") + (r.significant ? "true" : "false") + '\n';
        }
    }
    return out;
}

std::string benchmark_tsv(const BenchmarkTable& table) {
    std::string out =
        "label\tn\tc\tg\tmethod\treplicates\tfailures\tpower_m\tpower_f\tfdr_m\tfdr_f\t"
        "mean_discoveries_m\tmean_discoveries_f\n";
    for (const auto& r : table.rows) {
        out += r.label + '\t' + std::to_string(r.n) + '\t' + std::to_string(r.c) + '\t' + std::to_string(r.g) +
               '\t' + to_string(r.method) + '\t' + std::to_string(r.replicates) + '\t' +
               std::to_string(r.failures) + '\t' + optional_text(r.power_m) + '\t' + optional_text(r.power_f) +
               '\t' + format_number(r.fdr_m) + '\t' + format_number(r.fdr_f) + '\t' +
               format_number(r.mean_discoveries_m) + '\t' + format_number(r.mean_discoveries_f) + '\n';
    }
    return out;
}

json to_json(const BenchmarkTable& table) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"label", r.label},
                        {"n", r.n},
                        {"c", r.c},
                        {"g", r.g},
                        {"method", to_string(r.method)},
                        {"replicates", r.replicates},
                        {"failures", r.failures},
                        {"power_m", optional_number(r.power_m)},
                        {"power_f", optional_number(r.power_f)},
                        {"fdr_m", number(r.fdr_m)},
                        {"fdr_f", number(r.fdr_f)},
                        {"mean_discoveries_m", number(r.mean_discoveries_m)},
                        {"mean_discoveries_f", number(r.mean_discoveries_f)}});
    }
    json failures = json::array();
    for (const auto& record : table.records) {
        if (!record.score) {
            failures.push_back({{"cell", record.cell},
                                {"method", to_string(record.method)},
                                {"replicate", record.replicate},
                                {"error", record.error}});
        }
    }
    return {{"rows", rows}, {"failures", failures}};
}

std::string timing_tsv(const BenchmarkTable& table) {
    std::string out = "label\tmethod\treplicates\tmean_seconds\n";
    for (const auto& r : table.rows) {
        out += r.label + '\t' + to_string(r.method) + '\t' + std::to_string(r.replicates) + '\t' +
               format_number(r.mean_seconds) + '\n';
    }
    return out;
}

std::string replicate_csv(const BenchmarkTable& table, const std::vector<BenchmarkCell>& grid) {
    std::string out =
        "label,method,replicate,power_m,power_f,fdr_m,fdr_f,discoveries_m,discoveries_f,true_positives_m,"
        "true_positives_f,error\n";
    for (const auto& record : table.records) {
        out += grid[record.cell].label + ',' + to_string(record.method) + ',' + std::to_string(record.replicate);
        if (record.score) {
            const ReplicateScore& s = *record.score;
            out += ',' + optional_text(s.power_m) + ',' + optional_text(s.power_f) + ',' + format_number(s.fdr_m) +
                   ',' + format_number(s.fdr_f) + ',' + std::to_string(s.discoveries_m) + ',' +
                   std::to_string(s.discoveries_f) + ',' + std::to_string(s.true_positives_m) + ',' +
                   std::to_string(s.true_positives_f) + ",\n";
        } else {
            std::string error = record.error;
            for (char& ch : error) {
                if (ch == ',' || ch == '\n') ch = ';';
            }
            out += ",NA,NA,NA,NA,NA,NA,NA,NA," + error + '\n';
        }
    }
    return out;
}

json to_json(const ThresholdCheck& check) {
    return {{"label", check.label},
            {"method", to_string(check.threshold.method)},
            {"metric", check.threshold.metric},
            {"min", optional_number(check.threshold.min)},
            {"max", optional_number(check.threshold.max)},
            {"value", optional_number(check.value)},
            {"passed", check.passed}};
}

}  // namespace medzisc
