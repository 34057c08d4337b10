#include "medzisc/design.hpp"

#include "medzisc/errors.hpp"

#include <cmath>

namespace medzisc {

std::optional<Eigen::Index> DesignMatrix::find(std::string_view name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) {
            return static_cast<Eigen::Index>(j);
        }
    }
    return std::nullopt;
}

Eigen::Index DesignMatrix::index_of(std::string_view name) const {
    if (auto j = find(name)) {
        return *j;
    }
    throw StructuralError("design matrix has no column named " + std::string(name));
}

void DesignMatrix::add_column(std::string name, const Eigen::Ref<const Eigen::VectorXd>& column) {
    if (values.cols() > 0 && column.size() != values.rows()) {
        throw StructuralError("column " + name + " has " + std::to_string(column.size()) +
                              " rows, design has " + std::to_string(values.rows()));
    }
    if (find(name)) {
        throw StructuralError("duplicate design column " + name);
    }
    const Eigen::Index rows = values.cols() > 0 ? values.rows() : column.size();
    values.conservativeResize(rows, values.cols() + 1);
    values.col(values.cols() - 1) = column;
    names.push_back(std::move(name));
}

void DesignMatrix::validate() const {
    if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
        throw StructuralError("design matrix: " + std::to_string(names.size()) + " names for " +
                              std::to_string(values.cols()) + " columns");
    }
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        if (!values.col(j).allFinite()) {
            throw DomainError("design column " + names[static_cast<std::size_t>(j)] +
                              " contains non-finite values");
        }
    }
}

DesignMatrix exposure_design(const Eigen::VectorXd& exposure,
                             const Eigen::MatrixXd& covariates,
                             const std::vector<std::string>& covariate_names,
                             bool intercept) {
    const Eigen::Index n = exposure.size();
    DesignMatrix design;
    design.values.resize(n, (intercept ? 1 : 0) + 1 + covariates.cols());
    Eigen::Index col = 0;
    if (intercept) {
        design.values.col(col++).setOnes();
        design.names.emplace_back(kInterceptName);
    }
    design.values.col(col++) = exposure;
    design.names.emplace_back("X");
    for (Eigen::Index k = 0; k < covariates.cols(); ++k) {
        design.values.col(col++) = covariates.col(k);
        design.names.push_back(covariate_names[static_cast<std::size_t>(k)]);
    }
    return design;
}

std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& values, double tolerance) {
    // Modified Gram-Schmidt with one reorthogonalisation pass.
    std::vector<Eigen::Index> dependent;
    Eigen::MatrixXd basis(values.rows(), 0);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        Eigen::VectorXd v = values.col(j);
        const double norm = v.norm();
        if (norm == 0.0) {
            dependent.push_back(j);
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < basis.cols(); ++k) {
                v -= basis.col(k).dot(v) * basis.col(k);
            }
        }
        const double residual = v.norm();
        if (residual <= tolerance * norm) {
            dependent.push_back(j);
            continue;
        }
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = v / residual;
    }
    return dependent;
}

Eigen::Index RegressionFit::index_of(std::string_view name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) {
            return static_cast<Eigen::Index>(j);
        }
    }
    throw StructuralError("fit has no coefficient named " + std::string(name));
}

const char* to_string(AuxKind kind) {
    switch (kind) {
        case AuxKind::ResidualVariance:
            return "residual_variance";
        case AuxKind::Precision:
            return "precision";
        case AuxKind::Dispersion:
            return "dispersion";
    }
    return "unknown";
}

nlohmann::json to_json(const RegressionFit& fit) {
    nlohmann::json coefficients = nlohmann::json::array();
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        coefficients.push_back({{"name", fit.names[j]},
                                {"estimate", fit.coefficients(k)},
                                {"se", fit.standard_errors(k)},
                                {"p_value", fit.p_values(k)}});
    }
    return {{"coefficients", coefficients},
            {to_string(fit.aux_kind), fit.aux},
            {"converged", fit.converged},
            {"near_poisson", fit.near_poisson},
            {"iterations", fit.iterations},
            {"log_likelihood", fit.log_likelihood}};
}

}  // namespace medzisc
