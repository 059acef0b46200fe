#include "opsamp/identifiers.hpp"

#include "opsamp/error.hpp"
#include "opsamp/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace opsamp {

DeltaTrain::DeltaTrain(std::vector<double> nodes, std::vector<Complex> weights, std::vector<int> orders)
    : nodes_(std::move(nodes)), weights_(std::move(weights)), orders_(std::move(orders))
{
    require(!nodes_.empty(), "delta train must contain at least one node");
    require(nodes_.size() == weights_.size() && nodes_.size() == orders_.size(),
            "delta train: nodes, weights and orders must have equal length");
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        require(std::isfinite(nodes_[k]), "delta train: node is not finite");
        require(orders_[k] >= 0 && orders_[k] <= kMaxDerivativeOrder,
                "delta train: derivative order outside [0, 4]");
        if (k > 0)
            require(nodes_[k] > nodes_[k - 1], "delta train: nodes must be strictly increasing");
    }
    const bool any_nonzero =
        std::any_of(weights_.begin(), weights_.end(), [](Complex c) { return c != Complex{}; });
    require(any_nonzero, "delta train: weights are all zero");
}

DeltaTrain::DeltaTrain(std::vector<double> nodes, std::vector<Complex> weights)
    : DeltaTrain(nodes, std::move(weights), std::vector<int>(nodes.size(), 0))
{
}

int DeltaTrain::max_order() const
{
    return *std::max_element(orders_.begin(), orders_.end());
}

DeltaTrain DeltaTrain::scaled(Complex factor) const
{
    std::vector<Complex> w(weights_);
    for (auto& c : w) c *= factor;
    return {nodes_, std::move(w), orders_};
}

DeltaTrain DeltaTrain::shifted(double offset) const
{
    std::vector<double> n(nodes_);
    for (auto& x : n) x += offset;
    return {std::move(n), weights_, orders_};
}

DeltaTrain uniform_train(double spacing, IndexRange k_range)
{
    require(spacing > 0.0, "uniform_train: spacing must be positive");
    require(!k_range.empty(), "uniform_train: empty index range");
    std::vector<double> nodes;
    nodes.reserve(k_range.size());
    for (long long k = k_range.first; k <= k_range.last; ++k)
        nodes.push_back(static_cast<double>(k) * spacing);
    return {std::move(nodes), std::vector<Complex>(k_range.size(), 1.0)};
}

DeltaTrain dft_train(int m, int n, int j, IndexRange n_range)
{
    require(m >= 1 && n >= 1, "dft_train: M and N must be positive");
    const long long period = static_cast<long long>(m) * n;
    require(j >= 0 && j < period, "dft_train: channel index must lie in [0, MN)");
    std::vector<Complex> period_weights(static_cast<std::size_t>(period));
    for (long long p = 0; p < period; ++p) {
        // reduce j*p mod MN first so the phase stays exact for long trains
        const long long e = (static_cast<long long>(j) * p) % period;
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(period);
        period_weights[static_cast<std::size_t>(p)] = std::polar(1.0, phase);
    }
    return periodic_weight_train(m, period_weights, n_range);
}

DeltaTrain periodic_weight_train(int m, std::span<const Complex> period_weights, IndexRange n_range)
{
    require(m >= 1, "periodic_weight_train: M must be positive");
    require(!period_weights.empty(), "periodic_weight_train: empty weight period");
    require(!n_range.empty(), "periodic_weight_train: empty index range");
    const auto period = static_cast<long long>(period_weights.size());
    std::vector<double> nodes;
    std::vector<Complex> weights;
    nodes.reserve(n_range.size());
    weights.reserve(n_range.size());
    for (long long k = n_range.first; k <= n_range.last; ++k) {
        nodes.push_back(static_cast<double>(k) / m);
        const long long r = ((k % period) + period) % period;
        weights.push_back(period_weights[static_cast<std::size_t>(r)]);
    }
    return {std::move(nodes), std::move(weights)};
}

DeltaTrain periodic_nonuniform_train(double period, double alpha, IndexRange k_range)
{
    require(period > 0.0, "periodic_nonuniform_train: period must be positive");
    require(alpha >= 0.0 && alpha < period, "periodic_nonuniform_train: alpha must lie in [0, N)");
    require(!k_range.empty(), "periodic_nonuniform_train: empty index range");
    std::vector<double> nodes;
    nodes.reserve(k_range.size());
    for (long long k = k_range.first; k <= k_range.last; ++k)
        nodes.push_back(static_cast<double>(k) * period + alpha);
    return {std::move(nodes), std::vector<Complex>(k_range.size(), 1.0)};
}

KadecTrain kadec_train(double spacing, const std::function<double(long long)>& perturbation,
                       IndexRange k_range)
{
    require(spacing > 0.0, "kadec_train: spacing must be positive");
    require(!k_range.empty(), "kadec_train: empty index range");
    std::vector<double> nodes;
    nodes.reserve(k_range.size());
    double bound = 0.0;
    for (long long k = k_range.first; k <= k_range.last; ++k) {
        const double eps = perturbation(k);
        bound = std::max(bound, std::abs(eps));
        nodes.push_back(static_cast<double>(k) * spacing + eps);
    }
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw PreconditionError("kadec_train: perturbed nodes are not strictly increasing");
    const std::size_t count = nodes.size();
    return {DeltaTrain(std::move(nodes), std::vector<Complex>(count, 1.0)), k_range.first, bound};
}

DeltaTrain derivative_train(double period, int order, IndexRange k_range)
{
    require(period > 0.0, "derivative_train: period must be positive");
    if (order < 0 || order > kMaxDerivativeOrder)
        throw PreconditionError("derivative_train: unsupported derivative order " + std::to_string(order));
    require(!k_range.empty(), "derivative_train: empty index range");
    std::vector<double> nodes;
    nodes.reserve(k_range.size());
    for (long long k = k_range.first; k <= k_range.last; ++k)
        nodes.push_back(static_cast<double>(k) * period);
    const std::size_t count = nodes.size();
    return {std::move(nodes), std::vector<Complex>(count, 1.0), std::vector<int>(count, order)};
}

void write_train(std::ostream& out, const DeltaTrain& train)
{
    out << "# lambda re im r\n";
    for (std::size_t k = 0; k < train.size(); ++k) {
        out << format_double(train.node(k)) << ' ' << format_double(train.weight(k).real()) << ' '
            << format_double(train.weight(k).imag()) << ' ' << train.order(k) << '\n';
    }
}

DeltaTrain read_train(std::istream& in)
{
    std::vector<double> nodes;
    std::vector<Complex> weights;
    std::vector<int> orders;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4)
            throw ParseError("train line " + std::to_string(line_no) + ": expected 4 fields");
        nodes.push_back(parse_double(fields[0]));
        weights.emplace_back(parse_double(fields[1]), parse_double(fields[2]));
        orders.push_back(static_cast<int>(parse_integer(fields[3])));
    }
    if (nodes.empty()) throw ParseError("train: no rows");
    return {std::move(nodes), std::move(weights), std::move(orders)};
}

} // namespace opsamp
