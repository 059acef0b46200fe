#pragma once

// Irregular delta trains: density and separation analysis, frames of
// exponentials on [-Omega/2, Omega/2], and dual-frame reconstruction.

#include "opsamp/core_model.hpp"
#include "opsamp/recon_report.hpp"

#include <span>
#include <vector>

namespace opsamp {

struct KadecResult {
    double L = 0.0; ///< max_k |lambda_k - kT|
    bool pass = false;
};

/// Nodes are lambda_k for k = first_index, first_index + 1, ...; pass iff L < T/4.
KadecResult kadec_check(std::span<const double> nodes, long long first_index, double T);

struct DensityReport {
    std::vector<double> h;
    std::vector<std::size_t> n_plus;
    std::vector<std::size_t> n_minus;
    std::vector<double> ratio_plus;  ///< n_plus / h
    std::vector<double> ratio_minus; ///< n_minus / h
    double d_plus = 0.0;             ///< ratio at the largest h
    double d_minus = 0.0;
    bool boundary_caveat = true; ///< finite data: estimates, not the limits
};

/// Extremal counts of nodes in [a, a + h) over every window inside the node span.
DensityReport beurling_density(std::span<const double> nodes, std::span<const double> h_list);

struct FrameBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Gram system of {exp(-2 pi i lambda_k xi)} on [-Omega/2, Omega/2] with its
/// eigendecomposition. Immutable once built.
class ExponentialFrame {
public:
    ExponentialFrame(std::vector<double> nodes, double omega);

    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    double omega() const { return omega_; }

    /// G_mn = sin(pi Omega (lambda_m - lambda_n)) / (pi (lambda_m - lambda_n)), diagonal Omega.
    double gram(std::size_t m, std::size_t n) const { return gram_[m * size() + n]; }

    /// Ascending eigenvalues of the Gram matrix.
    std::span<const double> eigenvalues() const { return eigenvalues_; }

    FrameBounds bounds() const { return {eigenvalues_.front(), eigenvalues_.back()}; }

    /// A_est > tolerance * B_est.
    bool is_frame(double tolerance = 1e-12) const;

    /// Solves (G + rho I) c = rhs through the eigendecomposition.
    std::vector<Complex> solve(std::span<const Complex> rhs, double rho) const;

private:
    std::vector<double> nodes_;
    double omega_;
    std::vector<double> gram_;
    std::vector<double> eigenvalues_;
    std::vector<double> eigenvectors_; ///< column-major, column j belongs to eigenvalue j
};

/// Closed-form Gram entry for a node difference.
double gram_entry(double difference, double omega);

FrameBounds frame_bounds(const ExponentialFrame& frame);

struct FrameBoundsSample {
    std::size_t section = 0;
    FrameBounds bounds;
};

struct FrameBoundsSweep {
    std::vector<FrameBoundsSample> samples;
    bool lower_non_increasing = true;
    bool upper_non_decreasing = true;
};

/// Bounds of the central sections of `nodes`. Each section size is at least 16.
FrameBoundsSweep frame_bounds_sweep(std::span<const double> nodes, double omega,
                                    std::span<const std::size_t> sections);

/// Central `section` entries of `nodes` (all of them if there are fewer).
std::vector<double> central_section(std::span<const double> nodes, std::size_t section);

/// Solves (G + rho I) c = rhs. With rho = 0 a Gram without a positive lower
/// bound raises SingularSystemError.
std::vector<Complex> dual_solve(const ExponentialFrame& frame, std::span<const Complex> rhs, double rho);

struct IrregularOptions {
    double omega = 1.0;
    std::size_t section = 128;
    double rho_factor = 1e-10; ///< rho = rho_factor * B_est
    double frame_tolerance = 1e-12;
    std::size_t frequency_oversampling = 8;
};

/// Per t-row dual-frame reconstruction from the output of an irregular train
/// whose nodes are the output shifts. Evaluates h^(t_i, t_i + m*spacing) on the
/// target shape.
ReconReport reconstruct_irregular(const SampledOutput& output, const ModelShape& target,
                                  const IrregularOptions& options = {});

/// eta^(t, nu) = sum_n c_n exp(-2 pi i (t + lambda_n) nu) on a uniform grid of
/// `oversampling * nodes.size()` points covering [-Omega/2, Omega/2].
struct SpreadingSamples {
    std::vector<double> nu;
    std::vector<Complex> values;
};
SpreadingSamples synthesize_spreading(std::span<const Complex> coeffs, std::span<const double> nodes, double t,
                                      double omega, std::size_t oversampling);

struct CounterexampleOptions {
    double omega = 1.0;
    std::size_t nt = 64;
    int margin = 8; ///< extra lattice indices beyond the node span
};

/// Operator in OPW([0,T] x [-Omega/2, Omega/2]) with a nonzero kernel on the two
/// columns lambda_l, lambda_{l+1} whose output for the train vanishes. Requires
/// lambda_{l+1} - lambda_l < T and nonzero c_l, c_{l+1}.
OperatorModel separation_counterexample(const DeltaTrain& train, std::size_t l, double T,
                                        const CounterexampleOptions& options = {});

} // namespace opsamp
