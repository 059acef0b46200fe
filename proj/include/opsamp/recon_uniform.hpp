#pragma once

// Reconstruction from uniform delta trains: the classical sampling series for
// band-limited functions, its operator version, and the Haar step-kernel class.

#include "opsamp/core_model.hpp"
#include "opsamp/recon_report.hpp"

#include <span>
#include <vector>

namespace opsamp {

enum class FilterKind { critical_sinc, trapezoid };

/// Interpolating filter with phi^ = 1 on [-Omega/2, Omega/2] and phi^ = 0
/// outside [-beta, beta], beta = 1/T - Omega/2.
struct Filter {
    double T = 1.0;
    double omega = 1.0;
    FilterKind kind = FilterKind::critical_sinc;

    double beta() const { return 1.0 / T - 0.5 * omega; }
    double operator()(double x) const;
};

/// Critical sinc when T*Omega = 1, otherwise a trapezoid (product of two sincs).
Filter make_filter(double T, double omega);

/// Characteristic function of [0, T'], T' <= T.
struct WindowFunction {
    double temporal_support = 1.0;
    double T = 1.0;

    WindowFunction(double t_prime, double t);
    double operator()(double t) const { return (t >= 0.0 && t <= temporal_support) ? 1.0 : 0.0; }
};

/// Samples f(nT) for n = first_index, first_index + 1, ...
struct UniformSamples {
    double spacing = 1.0;
    long long first_index = 0;
    std::vector<Complex> values;
};

/// T * sum_n f(nT) phi(x - nT) at each point.
std::vector<Complex> wks_reconstruct(const UniformSamples& samples, const Filter& filter,
                                     std::span<const double> points);

/// h^(t_i, t_i + m*spacing) = r(t_i) T sum_s y[s][i] phi(m*spacing - shift_s) on the
/// target shape. Output shifts must be multiples of filter.T and the output grid
/// must be the target's t-grid.
ReconReport reconstruct_uniform(const SampledOutput& output, const Filter& filter, const WindowFunction& window,
                                const ModelShape& target);

/// Compares ||H||_HS^2 with T ||output||^2, both by midpoint quadrature. The output
/// grid starts like the model t-grid and may run past T' (up to T).
NormIdentity verify_norm_identity_uniform(const OperatorModel& model, const SampledOutput& output, double T);

/// Kernels constant on the unit cells along each diagonal:
/// h(t, x) = c_n(t) for x - t in [n, n + 1), 0 <= t <= T' <= 1.
struct HaarModel {
    double temporal_support = 1.0;
    LatticeWindow window;
    std::size_t nt = 64;
    std::vector<Complex> heights; ///< heights[i * window.size() + (n - window.first)]

    HaarModel(double t_prime, LatticeWindow w, std::size_t nt_points);

    TimeGrid t_grid() const { return {0.5 * temporal_support / nt, temporal_support / nt, nt}; }
    Complex& height(int n, std::size_t i) { return heights[i * window.size() + (n - window.first)]; }
    Complex height(int n, std::size_t i) const { return heights[i * window.size() + (n - window.first)]; }
    Complex eval(double t, double x) const;

    friend bool operator==(const HaarModel&, const HaarModel&) = default;
};

/// Sum_k h(x - k, x) over the unit train, on the points t_i + shifts[s].
SampledOutput haar_apply_unit_train(const HaarModel& model, std::span<const double> shifts);

/// Step heights read off the unit-train output: c_n(t_i) = output(t_i + n).
HaarModel haar_reconstruct(const SampledOutput& output, double temporal_support, LatticeWindow window);

} // namespace opsamp
