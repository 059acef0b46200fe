#include "opsamp/recon_report.hpp"

#include "opsamp/error.hpp"
#include "opsamp/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace opsamp {

NormIdentity make_norm_identity(double operator_norm_sq, double output_norm_sq)
{
    NormIdentity r{operator_norm_sq, output_norm_sq, 0.0};
    const double diff = std::abs(operator_norm_sq - output_norm_sq);
    if (operator_norm_sq > 0.0)
        r.residual = diff / operator_norm_sq;
    else if (diff > 0.0)
        r.residual = INFINITY;
    return r;
}

const OperatorModel& ReconReport::model() const
{
    if (!estimate) throw PreconditionError("report carries no estimate");
    return *estimate;
}

void compare_to_truth(ReconReport& report, const OperatorModel& truth, int trim)
{
    const OperatorModel& est = report.model();
    require(trim >= 0, "compare_to_truth: trim must be nonnegative");
    const LatticeWindow& w = est.window();
    require(w.last - w.first >= 2 * trim, "compare_to_truth: trim removes the whole window");
    report.trim = trim;
    report.errors.clear();
    const TimeGrid grid = est.t_grid();
    double max_err = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = grid.point(i);
        for (int n = w.first + trim; n <= w.last - trim; ++n) {
            const Complex d = est.coeff(n, i) - truth.coeff_at(t, n);
            report.errors.push_back({i, n, d});
            max_err = std::max(max_err, std::abs(d));
            sum += std::norm(d);
        }
    }
    report.max_error = max_err;
    report.l2_error = std::sqrt(est.spacing() * grid.step * sum);
}

void write_report_csv(std::ostream& out, const ReconReport& report)
{
    out << "t_index,lattice_index,re_err,im_err\n";
    for (const auto& e : report.errors)
        out << e.t_index << ',' << e.lattice_index << ',' << format_double(e.error.real()) << ','
            << format_double(e.error.imag()) << '\n';
    out << "summary,max_error=" << format_double(report.max_error)
        << ",l2_error=" << format_double(report.l2_error)
        << ",regularization=" << format_double(report.regularization) << '\n';
}

} // namespace opsamp
