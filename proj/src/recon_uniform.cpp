#include "opsamp/recon_uniform.hpp"

#include "opsamp/error.hpp"

#include <algorithm>
#include <cmath>

namespace opsamp {

namespace {

constexpr double kRelTol = 1e-12;

bool is_integer_multiple(double value, double step, long long& index)
{
    const double q = value / step;
    const double r = std::nearbyint(q);
    index = static_cast<long long>(r);
    return std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q));
}

bool same_grid(const TimeGrid& a, const TimeGrid& b)
{
    return a.count == b.count && std::abs(a.origin - b.origin) <= 1e-12 * std::max(1.0, std::abs(b.origin)) &&
           std::abs(a.step - b.step) <= kRelTol * b.step;
}

} // namespace

double Filter::operator()(double x) const
{
    if (kind == FilterKind::critical_sinc) return sinc(x / T) / T;
    return sinc(x / T) * sinc((1.0 / T - omega) * x) / T;
}

Filter make_filter(double T, double omega)
{
    require(T > 0.0 && omega > 0.0, "make_filter: T and Omega must be positive");
    const double product = T * omega;
    require(product <= 1.0 + kRelTol, "make_filter: T*Omega exceeds 1");
    const FilterKind kind = (std::abs(product - 1.0) <= kRelTol) ? FilterKind::critical_sinc : FilterKind::trapezoid;
    return {T, omega, kind};
}

WindowFunction::WindowFunction(double t_prime, double t) : temporal_support(t_prime), T(t)
{
    require(t_prime > 0.0 && t > 0.0, "window: T' and T must be positive");
    require(t_prime <= t * (1.0 + kRelTol), "window: temporal support T' exceeds the train spacing T");
}

std::vector<Complex> wks_reconstruct(const UniformSamples& samples, const Filter& filter,
                                     std::span<const double> points)
{
    require(std::abs(samples.spacing - filter.T) <= kRelTol * filter.T,
            "wks_reconstruct: sample spacing differs from the filter's T");
    std::vector<Complex> out(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        Complex sum;
        for (std::size_t n = 0; n < samples.values.size(); ++n) {
            const double node = static_cast<double>(samples.first_index + static_cast<long long>(n)) * samples.spacing;
            sum += samples.values[n] * filter(points[p] - node);
        }
        out[p] = filter.T * sum;
    }
    return out;
}

ReconReport reconstruct_uniform(const SampledOutput& output, const Filter& filter, const WindowFunction& window,
                                const ModelShape& target)
{
    target.validate();
    require(std::abs(window.T - filter.T) <= kRelTol * filter.T,
            "reconstruct_uniform: window and filter use different T");
    require(target.temporal_support <= window.temporal_support * (1.0 + kRelTol),
            "reconstruct_uniform: target support exceeds the window");
    require(same_grid(output.base_grid, target.t_grid()),
            "reconstruct_uniform: output grid is not the target t-grid");
    for (double s : output.shifts) {
        long long k = 0;
        require(is_integer_multiple(s, filter.T, k), "reconstruct_uniform: output shift is not a multiple of T");
    }

    const LatticeWindow& w = target.window;
    const std::size_t S = output.shifts.size();
    // phi depends only on (m, s)
    std::vector<double> phi(w.size() * S);
    for (int m = w.first; m <= w.last; ++m)
        for (std::size_t s = 0; s < S; ++s)
            phi[static_cast<std::size_t>(m - w.first) * S + s] = filter(m * target.spacing - output.shifts[s]);

    OperatorModel est = OperatorModel::zero(target);
    const TimeGrid grid = target.t_grid();
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double r = window(grid.point(i));
        if (r == 0.0) continue;
        for (int m = w.first; m <= w.last; ++m) {
            const double* row = &phi[static_cast<std::size_t>(m - w.first) * S];
            Complex sum;
            for (std::size_t s = 0; s < S; ++s) sum += output.value(s, i) * row[s];
            est.coeff(m, i) = r * filter.T * sum;
        }
    }
    ReconReport report;
    report.estimate = std::move(est);
    return report;
}

NormIdentity verify_norm_identity_uniform(const OperatorModel& model, const SampledOutput& output, double T)
{
    require(T > 0.0, "verify_norm_identity_uniform: T must be positive");
    require(model.temporal_support() <= T * (1.0 + kRelTol), "verify_norm_identity_uniform: T' exceeds T");
    const TimeGrid g = model.t_grid();
    const TimeGrid& o = output.base_grid;
    require(o.count >= g.count && std::abs(o.origin - g.origin) <= 1e-12 * std::max(1.0, g.origin) &&
                std::abs(o.step - g.step) <= kRelTol * g.step,
            "verify_norm_identity_uniform: output grid must extend the model t-grid");
    return make_norm_identity(hs_norm_squared(model), T * output.energy());
}

HaarModel::HaarModel(double t_prime, LatticeWindow w, std::size_t nt_points)
    : temporal_support(t_prime), window(w), nt(nt_points), heights(w.size() * nt_points)
{
    require(t_prime > 0.0 && t_prime <= 1.0, "haar model: T' must lie in (0, 1]");
    require(w.size() > 0, "haar model: empty window");
    require(nt_points > 0, "haar model: empty t-grid");
}

Complex HaarModel::eval(double t, double x) const
{
    if (!(t >= 0.0 && t <= temporal_support)) return {};
    // cell boundaries snap so that aligned points x = t + n land in cell n
    const double d = x - t;
    const double r = std::nearbyint(d);
    const int n = static_cast<int>(std::abs(d - r) < 1e-9 ? r : std::floor(d));
    if (!window.contains(n)) return {};
    const auto i = std::min(static_cast<std::size_t>(std::floor(t / (temporal_support / nt))), nt - 1);
    return height(n, i);
}

SampledOutput haar_apply_unit_train(const HaarModel& model, std::span<const double> shifts)
{
    SampledOutput out(model.t_grid(), std::vector<double>(shifts.begin(), shifts.end()));
    for (std::size_t s = 0; s < shifts.size(); ++s)
        for (std::size_t i = 0; i < out.base_grid.count; ++i) {
            const double x = out.base_grid.point(i) + shifts[s];
            Complex sum;
            const auto k_hi = static_cast<long long>(std::floor(x));
            const auto k_lo = static_cast<long long>(std::ceil(x - model.temporal_support));
            for (long long k = k_lo; k <= k_hi; ++k) sum += model.eval(x - static_cast<double>(k), x);
            out.value(s, i) = sum;
        }
    return out;
}

HaarModel haar_reconstruct(const SampledOutput& output, double temporal_support, LatticeWindow window)
{
    HaarModel est(temporal_support, window, output.base_grid.count);
    require(same_grid(output.base_grid, est.t_grid()), "haar_reconstruct: output grid is not the model t-grid");
    for (std::size_t s = 0; s < output.shifts.size(); ++s) {
        long long n = 0;
        require(is_integer_multiple(output.shifts[s], 1.0, n), "haar_reconstruct: shifts must be integers");
        if (!window.contains(static_cast<int>(n))) continue;
        for (std::size_t i = 0; i < est.nt; ++i) est.height(static_cast<int>(n), i) = output.value(s, i);
    }
    return est;
}

} // namespace opsamp
