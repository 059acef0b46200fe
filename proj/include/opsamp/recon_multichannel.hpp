#pragma once

// Multi-channel identification of OPW([0,N] x [-M/2, M/2]): DFT-weighted and
// general periodic-weight trains, periodically nonuniform trains, and
// derivative trains.

#include "opsamp/core_model.hpp"
#include "opsamp/recon_report.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace opsamp {

/// c[j][p] is the weight of channel j at node n/M with n = p mod MN.
using ChannelWeights = std::vector<std::vector<Complex>>;

/// c[j][p] = exp(2 pi i j p / MN).
ChannelWeights dft_weights(int m, int n);

/// DFT weights plus epsilon times i.i.d. complex normal entries from Rng(seed).
ChannelWeights perturbed_dft_weights(int m, int n, double epsilon, std::uint64_t seed);

/// Square system linking y_j(t + k/M) to h(t + r/M, t + k/M), r = 0..MN-1.
class MixingMatrix {
public:
    /// Throws SingularSystemError when the matrix is singular or its condition
    /// number exceeds `max_condition`.
    MixingMatrix(std::size_t size, std::vector<Complex> entries, long long k, double max_condition = 1e12);

    std::size_t size() const { return size_; }
    long long k() const { return k_; }
    Complex operator()(std::size_t j, std::size_t r) const { return entries_[j * size_ + r]; }
    double condition() const { return condition_; }

    std::vector<Complex> apply(std::span<const Complex> c) const;
    std::vector<Complex> solve(std::span<const Complex> y) const;

    /// max |(A A*)_{jl} - delta_{jl}|
    double unitarity_error() const;

private:
    std::size_t size_;
    long long k_;
    std::vector<Complex> entries_;
    std::vector<Complex> inverse_;
    double condition_;
};

/// (A_k)_{j,r} = exp(2 pi i j (k - r) / MN) / sqrt(MN), 0-based j and r.
MixingMatrix dft_mixing_matrix(int m, int n, long long k);

/// (A_k)_{j,r} = c[j][(k - r) mod MN].
MixingMatrix general_mixing_matrix(const ChannelWeights& weights, long long k, double max_condition = 1e12);

/// Outputs of the MN channel trains sum_n c[j][n mod MN] delta_{n/M}, on the base
/// grid t in [0, 1/M) (leading cells of the model t-grid) with shifts k/M for k in
/// [n_min, n_max + MN - 1]. Requires spacing 1/M, T' <= N and 1/M a whole number
/// of t-steps.
std::vector<SampledOutput> multichannel_outputs(const OperatorModel& model, int m, int n,
                                                const ChannelWeights& weights);
std::vector<SampledOutput> multichannel_outputs(const OperatorModel& model, int m, int n);

ReconReport reconstruct_multichannel_dft(std::span<const SampledOutput> outputs, int m, int n,
                                         const ModelShape& target);

/// Per-k solves with A_k^{-1}; condition_estimate carries the largest cond(A_k).
ReconReport reconstruct_multichannel_general(std::span<const SampledOutput> outputs, const ChannelWeights& weights,
                                             int m, int n, const ModelShape& target, double max_condition = 1e8);

/// ||H||_HS^2 against (1 / (M^2 N)) sum_j ||H f_j||^2.
NormIdentity multichannel_norm_identity(const OperatorModel& model, std::span<const SampledOutput> outputs, int m,
                                        int n);

/// Default number of periods sampled beyond the lattice window on each side.
inline constexpr int kDefaultMarginPeriods = 16384;

/// Outputs of the trains sum_k delta_{kN + alpha_j} on the model t-grid, shifts
/// nN + alpha_j covering the lattice window plus `margin_periods` periods.
std::vector<SampledOutput> pns_outputs(const OperatorModel& model, std::span<const double> alphas, double period,
                                       int margin_periods = kDefaultMarginPeriods);

/// Inverse transforms of the half-band indicator combinations for the class
/// OPW([0,2] x [-1/2,1/2]) with channels delta_{2k} and delta_{2k+alpha}.
Complex pns_s1(double x, double alpha);
Complex pns_s2(double x, double alpha);

ReconReport pns_two_channel_reconstruct(const SampledOutput& even, const SampledOutput& shifted, double alpha,
                                        const ModelShape& target);

enum class PnsSolver { subband, finite_section };

struct PnsOptions {
    PnsSolver solver = PnsSolver::subband;
    std::size_t section = 512;  ///< finite_section only
    double rho_factor = 1e-10; ///< finite_section only
};

/// Reconstruction function S_j of channel j for the bandwidth M, period N.
class PnsKernels {
public:
    PnsKernels(std::vector<double> alphas, int m, int n);
    std::size_t channels() const { return alphas_.size(); }
    Complex operator()(std::size_t j, double u) const;

private:
    std::vector<double> alphas_;
    int m_;
    int n_;
    std::vector<Complex> coef_; ///< coef_[j * MN + b]
    std::vector<double> mid_;   ///< sub-band centres
};

ReconReport pns_general_reconstruct(std::span<const SampledOutput> outputs, std::span<const double> alphas, int m,
                                    int n, const ModelShape& target, const PnsOptions& options = {});

/// Outputs of sum_k delta_{2k} and sum_k delta'_{2k} on the model t-grid, shifts 2n.
std::vector<SampledOutput> derivative_outputs(const OperatorModel& model,
                                              int margin_periods = kDefaultMarginPeriods);

ReconReport derivative_two_channel_reconstruct(const SampledOutput& plain, const SampledOutput& derivative,
                                               const ModelShape& target);

/// The D^1 channel rebuilt from plain outputs as (H f)' - H f' with f = sum_k delta_{kN},
/// both derivatives by central differences of width 2*step.
SampledOutput leibniz_derivative_channel(const OperatorModel& model, double period, IndexRange k_range,
                                         std::span<const double> shifts, double step);

} // namespace opsamp
