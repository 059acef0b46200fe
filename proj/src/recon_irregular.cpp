#include "opsamp/recon_irregular.hpp"

#include "opsamp/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace opsamp {

namespace {

void require_increasing(std::span<const double> nodes, const char* what)
{
    for (std::size_t k = 1; k < nodes.size(); ++k)
        if (!(nodes[k] > nodes[k - 1])) throw PreconditionError(std::string(what) + ": nodes are not strictly increasing");
}

bool same_grid(const TimeGrid& a, const TimeGrid& b)
{
    return a.count == b.count && std::abs(a.origin - b.origin) <= 1e-12 * std::max(1.0, std::abs(b.origin)) &&
           std::abs(a.step - b.step) <= 1e-12 * b.step;
}

} // namespace

KadecResult kadec_check(std::span<const double> nodes, long long first_index, double T)
{
    require(T > 0.0, "kadec_check: T must be positive");
    require(!nodes.empty(), "kadec_check: no nodes");
    require_increasing(nodes, "kadec_check");
    KadecResult r;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double ideal = static_cast<double>(first_index + static_cast<long long>(k)) * T;
        r.L = std::max(r.L, std::abs(nodes[k] - ideal));
    }
    r.pass = r.L < 0.25 * T;
    return r;
}

DensityReport beurling_density(std::span<const double> nodes, std::span<const double> h_list)
{
    require(nodes.size() >= 2, "beurling_density: need at least two nodes");
    require(std::is_sorted(nodes.begin(), nodes.end()), "beurling_density: nodes must be sorted");
    const double lo = nodes.front();
    const double span = nodes.back() - lo;
    DensityReport report;
    for (double h : h_list) {
        require(h > 0.0, "beurling_density: window size must be positive");
        require(h <= span, "beurling_density: window size exceeds the node span");
        const double hi = nodes.back() - h;
        // count(a) = #{lo <= lambda < a + h} changes only at a = lambda_j and a = lambda_j - h
        std::vector<double> cand{lo, hi};
        for (double x : nodes) {
            if (x >= lo && x <= hi) cand.push_back(x);
            if (x - h >= lo && x - h <= hi) cand.push_back(x - h);
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        const std::size_t breakpoints = cand.size();
        for (std::size_t j = 0; j + 1 < breakpoints; ++j) cand.push_back(0.5 * (cand[j] + cand[j + 1]));

        std::size_t n_max = 0;
        std::size_t n_min = nodes.size();
        for (double a : cand) {
            const auto first = std::lower_bound(nodes.begin(), nodes.end(), a);
            const auto last = std::lower_bound(nodes.begin(), nodes.end(), a + h);
            const auto count = static_cast<std::size_t>(last - first);
            n_max = std::max(n_max, count);
            n_min = std::min(n_min, count);
        }
        report.h.push_back(h);
        report.n_plus.push_back(n_max);
        report.n_minus.push_back(n_min);
        report.ratio_plus.push_back(static_cast<double>(n_max) / h);
        report.ratio_minus.push_back(static_cast<double>(n_min) / h);
    }
    if (!report.h.empty()) {
        const auto k = static_cast<std::size_t>(std::max_element(report.h.begin(), report.h.end()) - report.h.begin());
        report.d_plus = report.ratio_plus[k];
        report.d_minus = report.ratio_minus[k];
    }
    return report;
}

double gram_entry(double difference, double omega)
{
    return omega * sinc(omega * difference);
}

ExponentialFrame::ExponentialFrame(std::vector<double> nodes, double omega) : nodes_(std::move(nodes)), omega_(omega)
{
    require(!nodes_.empty(), "exponential frame: no nodes");
    require(omega > 0.0 && std::isfinite(omega), "exponential frame: Omega must be positive");
    for (double x : nodes_) require(std::isfinite(x), "exponential frame: node is not finite");
    const std::size_t n = nodes_.size();
    gram_.resize(n * n);
    Eigen::MatrixXd g(n, n);
    for (std::size_t m = 0; m < n; ++m)
        for (std::size_t k = 0; k < n; ++k) {
            const double v = gram_entry(nodes_[m] - nodes_[k], omega_);
            gram_[m * n + k] = v;
            g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
    if (solver.info() != Eigen::Success) throw NumericalError("exponential frame: eigensolve failed");
    eigenvalues_.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    eigenvectors_.assign(solver.eigenvectors().data(), solver.eigenvectors().data() + n * n);
}

bool ExponentialFrame::is_frame(double tolerance) const
{
    const FrameBounds b = bounds();
    return b.lower > tolerance * b.upper;
}

std::vector<Complex> ExponentialFrame::solve(std::span<const Complex> rhs, double rho) const
{
    const std::size_t n = size();
    require(rhs.size() == n, "dual solve: right-hand side has the wrong length");
    require(rho >= 0.0 && std::isfinite(rho), "dual solve: regularization must be nonnegative");
    if (rho == 0.0 && !is_frame())
        throw SingularSystemError("dual solve: Gram matrix is singular and no regularization was given");
    // c = V (Lambda + rho)^{-1} V^T rhs
    std::vector<Complex> proj(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double* v = &eigenvectors_[j * n];
        Complex s;
        for (std::size_t k = 0; k < n; ++k) s += v[k] * rhs[k];
        proj[j] = s / (std::max(eigenvalues_[j], 0.0) + rho);
    }
    std::vector<Complex> c(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double* v = &eigenvectors_[j * n];
        for (std::size_t k = 0; k < n; ++k) c[k] += v[k] * proj[j];
    }
    return c;
}

FrameBounds frame_bounds(const ExponentialFrame& frame)
{
    return frame.bounds();
}

std::vector<double> central_section(std::span<const double> nodes, std::size_t section)
{
    if (section >= nodes.size()) return {nodes.begin(), nodes.end()};
    const std::size_t start = (nodes.size() - section) / 2;
    return {nodes.begin() + static_cast<std::ptrdiff_t>(start),
            nodes.begin() + static_cast<std::ptrdiff_t>(start + section)};
}

FrameBoundsSweep frame_bounds_sweep(std::span<const double> nodes, double omega,
                                    std::span<const std::size_t> sections)
{
    FrameBoundsSweep sweep;
    for (std::size_t s : sections) {
        require(s >= 16, "frame_bounds_sweep: section size must be at least 16");
        require(s <= nodes.size(), "frame_bounds_sweep: section larger than the node set");
        const ExponentialFrame frame(central_section(nodes, s), omega);
        sweep.samples.push_back({s, frame.bounds()});
    }
    std::sort(sweep.samples.begin(), sweep.samples.end(),
              [](const auto& a, const auto& b) { return a.section < b.section; });
    for (std::size_t k = 1; k < sweep.samples.size(); ++k) {
        const auto& prev = sweep.samples[k - 1].bounds;
        const auto& cur = sweep.samples[k].bounds;
        const double tol = 1e-12 * std::max(cur.upper, 1.0);
        if (cur.lower > prev.lower + tol) sweep.lower_non_increasing = false;
        if (cur.upper < prev.upper - tol) sweep.upper_non_decreasing = false;
    }
    return sweep;
}

std::vector<Complex> dual_solve(const ExponentialFrame& frame, std::span<const Complex> rhs, double rho)
{
    return frame.solve(rhs, rho);
}

SpreadingSamples synthesize_spreading(std::span<const Complex> coeffs, std::span<const double> nodes, double t,
                                      double omega, std::size_t oversampling)
{
    require(coeffs.size() == nodes.size(), "synthesize_spreading: coefficient and node counts differ");
    require(oversampling >= 1 && omega > 0.0, "synthesize_spreading: bad grid parameters");
    const std::size_t count = oversampling * std::max<std::size_t>(nodes.size(), 1);
    SpreadingSamples out;
    out.nu.resize(count);
    out.values.resize(count);
    const double step = omega / static_cast<double>(count);
    for (std::size_t j = 0; j < count; ++j) {
        const double nu = -0.5 * omega + (static_cast<double>(j) + 0.5) * step;
        Complex sum;
        for (std::size_t n = 0; n < nodes.size(); ++n) {
            const double phase = -2.0 * (t + nodes[n]) * nu;
            sum += coeffs[n] * Complex(cos_pi(phase), sin_pi(phase));
        }
        out.nu[j] = nu;
        out.values[j] = sum;
    }
    return out;
}

ReconReport reconstruct_irregular(const SampledOutput& output, const ModelShape& target,
                                  const IrregularOptions& options)
{
    target.validate();
    require(options.omega > 0.0, "reconstruct_irregular: Omega must be positive");
    require(options.section >= 2, "reconstruct_irregular: section too small");
    require(same_grid(output.base_grid, target.t_grid()),
            "reconstruct_irregular: output grid is not the target t-grid");
    require_increasing(output.shifts, "reconstruct_irregular");

    const std::size_t section = std::min(options.section, output.shifts.size());
    const std::size_t start = (output.shifts.size() - section) / 2;
    const std::vector<double> nodes = central_section(output.shifts, section);

    double min_gap = INFINITY;
    for (std::size_t k = 1; k < nodes.size(); ++k) min_gap = std::min(min_gap, nodes[k] - nodes[k - 1]);
    if (min_gap < target.temporal_support * (1.0 - 1e-12))
        throw PreconditionError("reconstruct_irregular: node separation " + std::to_string(min_gap) +
                                " is below the temporal support");

    const ExponentialFrame frame(nodes, options.omega);
    for (double t : {0.0, 0.5 * target.temporal_support}) {
        std::vector<double> shifted(nodes);
        for (auto& x : shifted) x += t;
        if (!ExponentialFrame(std::move(shifted), options.omega).is_frame(options.frame_tolerance))
            throw PreconditionError("reconstruct_irregular: exponential system is not a frame (lower bound ~ 0)");
    }
    const FrameBounds b = frame.bounds();
    const double rho = options.rho_factor * b.upper;

    const LatticeWindow& w = target.window;
    const std::size_t n = nodes.size();
    std::vector<double> kernel(w.size() * n);
    for (int m = w.first; m <= w.last; ++m)
        for (std::size_t k = 0; k < n; ++k)
            kernel[static_cast<std::size_t>(m - w.first) * n + k] =
                options.omega * sinc(options.omega * (m * target.spacing - nodes[k]));

    OperatorModel est = OperatorModel::zero(target);
    const TimeGrid grid = target.t_grid();
    double worst_residual = 0.0;
    std::vector<Complex> s(n);
    for (std::size_t i = 0; i < grid.count; ++i) {
        for (std::size_t k = 0; k < n; ++k) s[k] = output.value(start + k, i);
        const std::vector<Complex> c = frame.solve(s, rho);
        for (int m = w.first; m <= w.last; ++m) {
            const double* row = &kernel[static_cast<std::size_t>(m - w.first) * n];
            Complex sum;
            for (std::size_t k = 0; k < n; ++k) sum += c[k] * row[k];
            est.coeff(m, i) = sum;
        }
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            Complex gc;
            for (std::size_t j = 0; j < n; ++j) gc += frame.gram(k, j) * c[j];
            num += std::norm(gc - s[k]);
            den += std::norm(s[k]);
        }
        if (den > 0.0) worst_residual = std::max(worst_residual, std::sqrt(num / den));
    }

    ReconReport report;
    report.estimate = std::move(est);
    report.regularization = rho;
    report.condition_estimate = b.lower > 0.0 ? b.upper / b.lower : INFINITY;
    report.sample_residual = worst_residual;
    report.notes.push_back("frame bounds A=" + std::to_string(b.lower) + " B=" + std::to_string(b.upper) +
                           " on a section of " + std::to_string(n) + " nodes");
    return report;
}

OperatorModel separation_counterexample(const DeltaTrain& train, std::size_t l, double T,
                                        const CounterexampleOptions& options)
{
    require(T > 0.0, "separation_counterexample: T must be positive");
    require(options.omega > 0.0, "separation_counterexample: Omega must be positive");
    require(l + 1 < train.size(), "separation_counterexample: index l+1 is outside the train");
    require(train.max_order() == 0, "separation_counterexample: derivative orders are not supported");
    const double gap = train.node(l + 1) - train.node(l);
    require(gap < T, "separation_counterexample: nodes l and l+1 are separated by at least T");
    const Complex cl = train.weight(l);
    const Complex cn = train.weight(l + 1);
    require(cl != Complex{} && cn != Complex{}, "separation_counterexample: weights c_l and c_{l+1} must be nonzero");

    const double delta = 1.0 / options.omega;
    ModelShape shape;
    shape.spacing = delta;
    shape.temporal_support = T;
    shape.nt = options.nt;
    shape.window = {static_cast<int>(std::floor(train.node(0) / delta)) - options.margin,
                    static_cast<int>(std::ceil(train.node(train.size() - 1) / delta)) + options.margin};
    shape.validate();

    // h(t, t + lambda_k) = (K a(t))_k with K_kn = sinc(lambda_k / delta - n)
    const auto rows = static_cast<Eigen::Index>(train.size());
    const auto cols = static_cast<Eigen::Index>(shape.window.size());
    Eigen::MatrixXd K(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k)
        for (Eigen::Index n = 0; n < cols; ++n)
            K(k, n) = sinc(train.node(static_cast<std::size_t>(k)) / delta - (shape.window.first + n));
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
    if (cod.rank() < rows) throw NumericalError("separation_counterexample: node rows are linearly dependent");
    const Eigen::MatrixXd pinv = cod.pseudoInverse();

    OperatorModel model = OperatorModel::zero(shape);
    const TimeGrid grid = shape.t_grid();
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = grid.point(i);
        const Complex target_l = (t >= gap && t <= T) ? cn : Complex{};
        const Complex target_next = (t >= 0.0 && t <= T - gap) ? -cl : Complex{};
        for (Eigen::Index n = 0; n < cols; ++n)
            model.coeff(shape.window.first + static_cast<int>(n), i) =
                pinv(n, static_cast<Eigen::Index>(l)) * target_l +
                pinv(n, static_cast<Eigen::Index>(l + 1)) * target_next;
    }
    return model;
}

} // namespace opsamp
