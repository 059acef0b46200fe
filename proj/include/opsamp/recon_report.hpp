#pragma once

#include "opsamp/core_model.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace opsamp {

struct CoefficientError {
    std::size_t t_index = 0;
    int lattice_index = 0;
    Complex error; ///< estimate minus truth
};

/// Two sides of a norm identity and their relative difference.
struct NormIdentity {
    double operator_norm_sq = 0.0; ///< ||H||_HS^2
    double output_norm_sq = 0.0;   ///< scaled output energy
    double residual = 0.0;         ///< |difference| / ||H||^2, 0 when both vanish
};

NormIdentity make_norm_identity(double operator_norm_sq, double output_norm_sq);

struct ReconReport {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    std::optional<OperatorModel> estimate;
    double max_error = kUnset;
    double l2_error = kUnset; ///< HS norm of the interior difference
    int trim = 0;
    double regularization = 0.0;
    double condition_estimate = kUnset;
    double norm_residual = kUnset;
    double sample_residual = kUnset;
    double tail_mass = kUnset;
    std::vector<CoefficientError> errors;
    std::vector<std::string> notes;

    const OperatorModel& model() const;
};

/// Fills max_error, l2_error and errors by comparing the estimate against
/// `truth` on lattice indices [first + trim, last - trim] of the estimate window.
/// The truth is looked up at the estimate's t-grid points.
void compare_to_truth(ReconReport& report, const OperatorModel& truth, int trim);

/// CSV with header "t_index,lattice_index,re_err,im_err", one row per compared
/// coefficient, then "summary,max_error=..,l2_error=..,regularization=..".
void write_report_csv(std::ostream& out, const ReconReport& report);

} // namespace opsamp
