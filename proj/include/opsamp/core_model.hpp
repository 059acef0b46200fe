#pragma once

// Discretized time-varying operators.
//
// An operator is stored through its time-varying impulse response
//
//     h(t, x) = sum_n a_n(t) sinc((x - t - n*spacing) / spacing),   0 <= t <= T',
//
// with sinc(u) = sin(pi u) / (pi u) and sinc(0) = 1. The coefficient functions
// a_n are sampled on a midpoint grid of [0, T'] and are piecewise constant on
// the grid cells, so h(t, t + m*spacing) = a_m(t) holds exactly and the
// spreading function eta(t, .) vanishes outside [-1/(2 spacing), 1/(2 spacing)].

#include "opsamp/identifiers.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace opsamp {

using Complex = std::complex<double>;

/// Points origin + i*step for 0 <= i < count.
struct TimeGrid {
    double origin = 0.0;
    double step = 1.0;
    std::size_t count = 0;

    double point(std::size_t i) const { return origin + static_cast<double>(i) * step; }
};

/// Inclusive range of sinc-lattice indices.
struct LatticeWindow {
    int first = 0;
    int last = -1;

    std::size_t size() const { return last < first ? 0 : static_cast<std::size_t>(last - first + 1); }
    bool contains(int n) const { return n >= first && n <= last; }
    static LatticeWindow symmetric(int half_width) { return {-half_width, half_width}; }

    friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;
};

/// Everything about an operator model except its coefficients.
struct ModelShape {
    double spacing = 1.0;          ///< sinc-lattice step; bandwidth is 1/spacing
    double temporal_support = 1.0; ///< T': h(t, .) = 0 unless 0 <= t <= T'
    LatticeWindow window;
    std::size_t nt = 64; ///< number of t-grid midpoints

    double bandwidth() const { return 1.0 / spacing; }
    double step() const { return temporal_support / static_cast<double>(nt); }
    TimeGrid t_grid() const { return {0.5 * step(), step(), nt}; }

    /// Throws PreconditionError unless all fields are usable.
    void validate() const;

    friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

class OperatorModel {
public:
    /// `coeffs` holds a_n(t_i) at index i * window.size() + (n - window.first).
    OperatorModel(ModelShape shape, std::vector<Complex> coeffs);

    static OperatorModel zero(const ModelShape& shape);

    const ModelShape& shape() const { return shape_; }
    double spacing() const { return shape_.spacing; }
    double temporal_support() const { return shape_.temporal_support; }
    const LatticeWindow& window() const { return shape_.window; }
    std::size_t nt() const { return shape_.nt; }
    TimeGrid t_grid() const { return shape_.t_grid(); }

    Complex coeff(int n, std::size_t i) const { return coeffs_[offset(n, i)]; }
    Complex& coeff(int n, std::size_t i) { return coeffs_[offset(n, i)]; }

    /// All lattice coefficients at t-grid point i, ordered by n.
    std::span<const Complex> row(std::size_t i) const
    {
        return {coeffs_.data() + i * shape_.window.size(), shape_.window.size()};
    }
    std::span<const Complex> coeffs() const { return coeffs_; }

    /// Index of the grid cell containing t, or nothing when t lies outside [0, T'].
    std::optional<std::size_t> t_index(double t) const;

    /// True when t is within `tolerance` of a grid midpoint.
    bool on_grid(double t, double tolerance = 1e-9) const;

    /// a_n at the cell containing t; zero outside the support or the window.
    Complex coeff_at(double t, int n) const;

    friend bool operator==(const OperatorModel&, const OperatorModel&) = default;

private:
    std::size_t offset(int n, std::size_t i) const
    {
        return i * shape_.window.size() + static_cast<std::size_t>(n - shape_.window.first);
    }

    ModelShape shape_;
    std::vector<Complex> coeffs_;
};

/// Channel output sampled on the aligned points base_grid.point(i) + shifts[s].
struct SampledOutput {
    TimeGrid base_grid;
    std::vector<double> shifts;
    std::vector<Complex> values; ///< values[s * base_grid.count + i]
    int channel_tag = 0;

    SampledOutput() = default;
    SampledOutput(TimeGrid grid, std::vector<double> shift_list, int tag = 0);

    Complex value(std::size_t s, std::size_t i) const { return values[s * base_grid.count + i]; }
    Complex& value(std::size_t s, std::size_t i) { return values[s * base_grid.count + i]; }

    /// Sum over all stored points of |value|^2 * base_grid.step.
    double energy() const;
};

/// sin(pi u) / (pi u), exact zeros at nonzero integers.
double sinc(double u);

/// r-th derivative of sinc, 0 <= r <= 4.
double sinc_derivative(double u, int order);

/// sin(pi x) with exact zeros at integers.
double sin_pi(double x);
double cos_pi(double x);

Complex eval_h(const OperatorModel& model, double t, double x);

/// x-derivative of order r of the impulse response.
Complex eval_h_derivative(const OperatorModel& model, double t, double x, int order);

/// Spreading function eta(t, nu).
Complex eval_eta(const OperatorModel& model, double t, double nu);

/// Kohn-Nirenberg symbol by midpoint quadrature over the t-grid.
Complex eval_sigma(const OperatorModel& model, double x, double xi);

double hs_norm_squared(const OperatorModel& model);
double hs_norm(const OperatorModel& model);

/// Pointwise output (H train)(x) = sum_k c_k D^{r_k} h(x - lambda_k, x).
Complex eval_output(const OperatorModel& model, const DeltaTrain& train, double x);

/// Output of `train` on the points grid.point(i) + shifts[s].
SampledOutput apply_train(const OperatorModel& model, const DeltaTrain& train,
                          std::span<const double> shifts, const TimeGrid& grid, int channel_tag = 0);

/// Same, on the model's own t-grid.
SampledOutput apply_train(const OperatorModel& model, const DeltaTrain& train,
                          std::span<const double> shifts, int channel_tag = 0);

/// i.i.d. circular complex normal coefficients drawn from Rng(seed).
OperatorModel random_operator(const ModelShape& shape, std::uint64_t seed);

/// Header "opsamp-model spacing=.. temporal_support=.. n_min=.. n_max=.. nt=.."
/// followed by one "n i re im" row per coefficient.
void write_model(std::ostream& out, const OperatorModel& model);
OperatorModel read_model(std::istream& in);

/// Header "opsamp-output origin=.. step=.. count=.. channel=.. shifts=K", K rows
/// "shift s value", then rows "s i re im". Several blocks may follow each other.
void write_output(std::ostream& out, const SampledOutput& output);
std::vector<SampledOutput> read_outputs(std::istream& in);

} // namespace opsamp
