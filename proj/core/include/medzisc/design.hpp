#ifndef MEDZISC_DESIGN_HPP
#define MEDZISC_DESIGN_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medzisc {

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Regressor matrix with named columns.
struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> names;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    /// Column position of `name`, or nullopt.
    std::optional<Eigen::Index> find(std::string_view name) const;
    Eigen::Index index_of(std::string_view name) const;

    /// Append a column; throws StructuralError on a length mismatch or duplicate name.
    void add_column(std::string name, const Eigen::Ref<const Eigen::VectorXd>& column);

    /// Throws on ragged names or non-finite entries.
    void validate() const;
};

/**
 * Builds [intercept?, X, Z1..ZK] for n subjects.
 */
DesignMatrix exposure_design(const Eigen::VectorXd& exposure,
                             const Eigen::MatrixXd& covariates,
                             const std::vector<std::string>& covariate_names,
                             bool intercept);

/**
 * Indices of columns that are (numerically) linear combinations of the columns
 * before them. Empty for a full-rank matrix.
 */
std::vector<Eigen::Index> dependent_columns(const Eigen::MatrixXd& values, double tolerance = 1e-9);

enum class AuxKind { ResidualVariance, Precision, Dispersion };

/// Output of every unpenalized fit.
struct RegressionFit {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd p_values;

    AuxKind aux_kind = AuxKind::ResidualVariance;
    double aux = 0.0;  // residual variance, beta precision phi, or NB dispersion theta

    bool converged = false;
    bool near_poisson = false;  // NB only: theta hit its cap
    int iterations = 0;
    double log_likelihood = 0.0;
    std::vector<double> log_likelihood_trace;  // one entry per accepted update

    Eigen::Index index_of(std::string_view name) const;
    double coefficient(std::string_view name) const { return coefficients(index_of(name)); }
    double standard_error(std::string_view name) const { return standard_errors(index_of(name)); }
    double p_value(std::string_view name) const { return p_values(index_of(name)); }
};

nlohmann::json to_json(const RegressionFit& fit);

const char* to_string(AuxKind kind);

}  // namespace medzisc

#endif  // MEDZISC_DESIGN_HPP
