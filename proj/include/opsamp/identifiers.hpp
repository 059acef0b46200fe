#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace opsamp {

using Complex = std::complex<double>;

/// Inclusive integer range [first, last].
struct IndexRange {
    long long first = 0;
    long long last = -1;

    std::size_t size() const { return last < first ? 0 : static_cast<std::size_t>(last - first + 1); }
    bool empty() const { return last < first; }
};

/// Finite weighted train of (possibly differentiated) Dirac impulses,
/// sum_k c_k delta^{(r_k)}_{lambda_k}.
///
/// Nodes are strictly increasing and at least one weight is nonzero.
class DeltaTrain {
public:
    DeltaTrain(std::vector<double> nodes, std::vector<Complex> weights, std::vector<int> orders);
    DeltaTrain(std::vector<double> nodes, std::vector<Complex> weights);

    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const Complex> weights() const { return weights_; }
    std::span<const int> orders() const { return orders_; }

    double node(std::size_t k) const { return nodes_[k]; }
    Complex weight(std::size_t k) const { return weights_[k]; }
    int order(std::size_t k) const { return orders_[k]; }

    int max_order() const;

    /// Copy with every weight multiplied by `factor` (must be nonzero).
    DeltaTrain scaled(Complex factor) const;

    /// Copy with every node moved by `offset`.
    DeltaTrain shifted(double offset) const;

private:
    std::vector<double> nodes_;
    std::vector<Complex> weights_;
    std::vector<int> orders_;
};

/// Highest derivative order supported by derivative trains and the forward map.
inline constexpr int kMaxDerivativeOrder = 4;

/// Nodes kT, unit weights.
DeltaTrain uniform_train(double spacing, IndexRange k_range);

/// Nodes n/M with weights exp(2 pi i j n / MN), 0 <= j < MN.
DeltaTrain dft_train(int m, int n, int j, IndexRange n_range);

/// Nodes n/M with MN-periodic weights c[n mod P], P = period_weights.size().
DeltaTrain periodic_weight_train(int m, std::span<const Complex> period_weights, IndexRange n_range);

/// Nodes kN + alpha, unit weights, 0 <= alpha < N.
DeltaTrain periodic_nonuniform_train(double period, double alpha, IndexRange k_range);

struct KadecTrain {
    DeltaTrain train;
    long long first_index = 0; ///< k of the first node
    double bound = 0.0;        ///< L = max_k |epsilon_k|
};

/// Nodes kT + epsilon_k, unit weights. Throws if the perturbed nodes are not
/// strictly increasing. The Kadec bound itself is checked by kadec_check().
KadecTrain kadec_train(double spacing, const std::function<double(long long)>& perturbation,
                       IndexRange k_range);

/// Nodes kN, unit weights, every impulse differentiated r times (r <= 4).
DeltaTrain derivative_train(double period, int order, IndexRange k_range);

/// Rows "lambda re(c) im(c) r", one per node.
void write_train(std::ostream& out, const DeltaTrain& train);
DeltaTrain read_train(std::istream& in);

} // namespace opsamp
