#include "opsamp/recon_multichannel.hpp"

#include "opsamp/error.hpp"
#include "opsamp/recon_irregular.hpp"
#include "opsamp/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace opsamp {

namespace {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPi = std::numbers::pi;

Complex unit(double turns_times_two)
{
    // exp(i pi x)
    return {cos_pi(turns_times_two), sin_pi(turns_times_two)};
}

long long mod(long long a, long long p)
{
    return ((a % p) + p) % p;
}

bool near_integer(double x, long long& out)
{
    const double r = std::nearbyint(x);
    out = static_cast<long long>(r);
    return std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x));
}

bool same_grid(const TimeGrid& a, const TimeGrid& b)
{
    return a.count == b.count && std::abs(a.origin - b.origin) <= 1e-12 * std::max(1.0, std::abs(b.origin)) &&
           std::abs(a.step - b.step) <= 1e-12 * b.step;
}

// Number of model t-steps in one base period 1/M.
std::size_t cells_per_period(const ModelShape& shape, int m, int n)
{
    require(m >= 1 && n >= 1, "multichannel: M and N must be positive");
    require(std::abs(shape.spacing * m - 1.0) <= 1e-12, "multichannel: model spacing must equal 1/M");
    require(shape.temporal_support <= n * (1.0 + 1e-12), "multichannel: temporal support exceeds N");
    long long q = 0;
    require(near_integer(1.0 / (m * shape.step()), q) && q >= 1,
            "multichannel: 1/M must be a whole number of t-grid steps");
    return static_cast<std::size_t>(q);
}

TimeGrid base_grid(const ModelShape& shape, std::size_t q)
{
    TimeGrid g = shape.t_grid();
    g.count = std::min(q, g.count);
    return g;
}

void check_channel_outputs(std::span<const SampledOutput> outputs, std::size_t channels, const TimeGrid& grid)
{
    require(outputs.size() == channels, "multichannel: expected " + std::to_string(channels) + " channel outputs, got " +
                                            std::to_string(outputs.size()));
    for (const auto& o : outputs) {
        require(same_grid(o.base_grid, grid), "multichannel: channel output grid does not match the base grid");
        require(o.shifts == outputs[0].shifts, "multichannel: channels use different shifts");
    }
}

double tail_mass(std::span<const SampledOutput> outputs, double lo, double hi)
{
    double tail = 0.0;
    double total = 0.0;
    for (const auto& o : outputs)
        for (std::size_t s = 0; s < o.shifts.size(); ++s)
            for (std::size_t i = 0; i < o.base_grid.count; ++i) {
                const double e = std::norm(o.value(s, i));
                total += e;
                if (o.shifts[s] < lo || o.shifts[s] > hi) tail += e;
            }
    return total > 0.0 ? tail / total : 0.0;
}

// h^(t_i, t_i + m*spacing) = sum_c sum_s y_c[s][i] K_c(m*spacing - shift_cs)
template <class Kernel>
OperatorModel synthesize(std::span<const SampledOutput> outputs, const ModelShape& target, Kernel&& kernel)
{
    const LatticeWindow& w = target.window;
    const auto L = static_cast<Eigen::Index>(w.size());
    const auto nt = static_cast<Eigen::Index>(target.nt);
    CMatrix acc = CMatrix::Zero(nt, L);
    for (std::size_t c = 0; c < outputs.size(); ++c) {
        const SampledOutput& o = outputs[c];
        const auto S = static_cast<Eigen::Index>(o.shifts.size());
        if (S == 0) continue;
        // kernel(m, s) depends only on m - q s when the shifts step by q lattice spacings
        long long q = 0;
        bool toeplitz = S >= 2 && near_integer((o.shifts[1] - o.shifts[0]) / target.spacing, q) && q >= 1;
        for (Eigen::Index s = 1; toeplitz && s < S; ++s) {
            const double expect = o.shifts[0] + static_cast<double>(s) * static_cast<double>(q) * target.spacing;
            toeplitz = std::abs(o.shifts[static_cast<std::size_t>(s)] - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
        }
        Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor> k(S, L);
        if (toeplitz) {
            // d = m - q s ranges over [w.first - q (S-1), w.last]
            const long long d0 = w.first - q * (S - 1);
            std::vector<Complex> table(static_cast<std::size_t>(w.last - d0 + 1));
            for (std::size_t e = 0; e < table.size(); ++e)
                table[e] = kernel(c, static_cast<double>(d0 + static_cast<long long>(e)) * target.spacing - o.shifts[0]);
            for (Eigen::Index m = 0; m < L; ++m)
                for (Eigen::Index s = 0; s < S; ++s)
                    k(s, m) = table[static_cast<std::size_t>(w.first + m - q * s - d0)];
        } else {
            for (Eigen::Index m = 0; m < L; ++m)
                for (Eigen::Index s = 0; s < S; ++s)
                    k(s, m) = kernel(c, (w.first + m) * target.spacing - o.shifts[static_cast<std::size_t>(s)]);
        }
        // values are stored [s * nt + i], i.e. an nt x S column-major block
        const Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>> y(
            o.values.data(), nt, S);
        acc.noalias() += y * k;
    }
    OperatorModel est = OperatorModel::zero(target);
    for (Eigen::Index i = 0; i < nt; ++i)
        for (Eigen::Index m = 0; m < L; ++m)
            est.coeff(w.first + static_cast<int>(m), static_cast<std::size_t>(i)) = acc(i, m);
    return est;
}

} // namespace

ChannelWeights dft_weights(int m, int n)
{
    require(m >= 1 && n >= 1, "dft_weights: M and N must be positive");
    const long long p = static_cast<long long>(m) * n;
    ChannelWeights w(static_cast<std::size_t>(p), std::vector<Complex>(static_cast<std::size_t>(p)));
    for (long long j = 0; j < p; ++j)
        for (long long q = 0; q < p; ++q)
            w[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)] =
                unit(2.0 * static_cast<double>((j * q) % p) / static_cast<double>(p));
    return w;
}

ChannelWeights perturbed_dft_weights(int m, int n, double epsilon, std::uint64_t seed)
{
    ChannelWeights w = dft_weights(m, n);
    Rng rng(seed);
    for (auto& row : w)
        for (auto& c : row) c += epsilon * rng.complex_normal();
    return w;
}

MixingMatrix::MixingMatrix(std::size_t size, std::vector<Complex> entries, long long k, double max_condition)
    : size_(size), k_(k), entries_(std::move(entries)), condition_(INFINITY)
{
    require(size >= 1, "mixing matrix: empty");
    require(entries_.size() == size * size, "mixing matrix: entry count is not size^2");
    const auto n = static_cast<Eigen::Index>(size);
    const CMatrix a = Eigen::Map<const CMatrix>(entries_.data(), n, n);
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(n - 1);
    if (!(smin > 1e-14 * smax)) throw SingularSystemError("mixing matrix A_" + std::to_string(k) + " is singular");
    condition_ = smax / smin;
    if (condition_ > max_condition)
        throw SingularSystemError("mixing matrix A_" + std::to_string(k) + " condition " + std::to_string(condition_) +
                                  " exceeds the limit");
    const CMatrix inv = a.fullPivLu().inverse();
    inverse_.assign(inv.data(), inv.data() + size * size);
}

std::vector<Complex> MixingMatrix::apply(std::span<const Complex> c) const
{
    require(c.size() == size_, "mixing matrix: vector has the wrong length");
    std::vector<Complex> y(size_);
    for (std::size_t j = 0; j < size_; ++j)
        for (std::size_t r = 0; r < size_; ++r) y[j] += entries_[j * size_ + r] * c[r];
    return y;
}

std::vector<Complex> MixingMatrix::solve(std::span<const Complex> y) const
{
    require(y.size() == size_, "mixing matrix: vector has the wrong length");
    std::vector<Complex> c(size_);
    for (std::size_t r = 0; r < size_; ++r)
        for (std::size_t j = 0; j < size_; ++j) c[r] += inverse_[r * size_ + j] * y[j];
    return c;
}

double MixingMatrix::unitarity_error() const
{
    double worst = 0.0;
    for (std::size_t j = 0; j < size_; ++j)
        for (std::size_t l = 0; l < size_; ++l) {
            Complex s;
            for (std::size_t r = 0; r < size_; ++r) s += entries_[j * size_ + r] * std::conj(entries_[l * size_ + r]);
            worst = std::max(worst, std::abs(s - (j == l ? 1.0 : 0.0)));
        }
    return worst;
}

MixingMatrix dft_mixing_matrix(int m, int n, long long k)
{
    require(m >= 1 && n >= 1, "dft_mixing_matrix: M and N must be positive");
    const long long p = static_cast<long long>(m) * n;
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    std::vector<Complex> e(static_cast<std::size_t>(p * p));
    for (long long j = 0; j < p; ++j)
        for (long long r = 0; r < p; ++r)
            e[static_cast<std::size_t>(j * p + r)] =
                scale * unit(2.0 * static_cast<double>(mod(j * (k - r), p)) / static_cast<double>(p));
    return {static_cast<std::size_t>(p), std::move(e), k};
}

MixingMatrix general_mixing_matrix(const ChannelWeights& weights, long long k, double max_condition)
{
    const std::size_t p = weights.size();
    require(p >= 1, "general_mixing_matrix: no channels");
    for (const auto& row : weights) require(row.size() == p, "general_mixing_matrix: weights must be MN x MN");
    std::vector<Complex> e(p * p);
    const auto pp = static_cast<long long>(p);
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t r = 0; r < p; ++r)
            e[j * p + r] = weights[j][static_cast<std::size_t>(mod(k - static_cast<long long>(r), pp))];
    return {p, std::move(e), k, max_condition};
}

std::vector<SampledOutput> multichannel_outputs(const OperatorModel& model, int m, int n, const ChannelWeights& weights)
{
    const std::size_t q = cells_per_period(model.shape(), m, n);
    const long long p = static_cast<long long>(m) * n;
    require(weights.size() == static_cast<std::size_t>(p), "multichannel_outputs: need MN weight rows");
    const LatticeWindow& w = model.window();
    std::vector<double> shifts;
    for (long long k = w.first; k <= w.last + p - 1; ++k) shifts.push_back(static_cast<double>(k) / m);
    const IndexRange nodes{w.first - p - 1, w.last + p};
    const TimeGrid grid = base_grid(model.shape(), q);
    std::vector<SampledOutput> out;
    for (long long j = 0; j < p; ++j) {
        const auto& row = weights[static_cast<std::size_t>(j)];
        require(row.size() == static_cast<std::size_t>(p), "multichannel_outputs: weight rows must have MN entries");
        const DeltaTrain train = periodic_weight_train(m, row, nodes);
        out.push_back(apply_train(model, train, shifts, grid, static_cast<int>(j)));
    }
    return out;
}

std::vector<SampledOutput> multichannel_outputs(const OperatorModel& model, int m, int n)
{
    return multichannel_outputs(model, m, n, dft_weights(m, n));
}

namespace {

template <class Solve>
ReconReport unmix(std::span<const SampledOutput> outputs, int m, int n, const ModelShape& target, Solve&& solve)
{
    target.validate();
    const std::size_t q = cells_per_period(target, m, n);
    const auto p = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    check_channel_outputs(outputs, p, base_grid(target, q));
    OperatorModel est = OperatorModel::zero(target);
    const LatticeWindow& w = target.window;
    std::vector<Complex> y(p);
    for (std::size_t s = 0; s < outputs[0].shifts.size(); ++s) {
        long long k = 0;
        require(near_integer(outputs[0].shifts[s] * m, k), "multichannel: shift is not a multiple of 1/M");
        for (std::size_t i = 0; i < outputs[0].base_grid.count; ++i) {
            for (std::size_t j = 0; j < p; ++j) y[j] = outputs[j].value(s, i);
            const std::vector<Complex> h = solve(k, y);
            for (std::size_t r = 0; r < p; ++r) {
                const long long lattice = k - static_cast<long long>(r);
                const std::size_t cell = i + r * q;
                if (lattice < w.first || lattice > w.last || cell >= target.nt) continue;
                est.coeff(static_cast<int>(lattice), cell) = h[r];
            }
        }
    }
    ReconReport report;
    report.estimate = std::move(est);
    return report;
}

} // namespace

ReconReport reconstruct_multichannel_dft(std::span<const SampledOutput> outputs, int m, int n,
                                         const ModelShape& target)
{
    const long long p = static_cast<long long>(m) * n;
    std::vector<MixingMatrix> mats;
    for (long long k = 0; k < p; ++k) mats.push_back(dft_mixing_matrix(m, n, k));
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    ReconReport report = unmix(outputs, m, n, target, [&](long long k, const std::vector<Complex>& y) {
        // y = sqrt(MN) A_k h and A_k is unitary
        const MixingMatrix& a = mats[static_cast<std::size_t>(mod(k, p))];
        std::vector<Complex> h(a.size());
        for (std::size_t r = 0; r < a.size(); ++r)
            for (std::size_t j = 0; j < a.size(); ++j) h[r] += std::conj(a(j, r)) * y[j];
        for (auto& v : h) v *= scale;
        return h;
    });
    report.condition_estimate = 1.0;
    return report;
}

ReconReport reconstruct_multichannel_general(std::span<const SampledOutput> outputs, const ChannelWeights& weights,
                                             int m, int n, const ModelShape& target, double max_condition)
{
    const long long p = static_cast<long long>(m) * n;
    require(weights.size() == static_cast<std::size_t>(p), "reconstruct_multichannel_general: need MN weight rows");
    std::vector<MixingMatrix> mats;
    double worst = 0.0;
    for (long long k = 0; k < p; ++k) {
        mats.push_back(general_mixing_matrix(weights, k, max_condition));
        worst = std::max(worst, mats.back().condition());
    }
    ReconReport report = unmix(outputs, m, n, target, [&](long long k, const std::vector<Complex>& y) {
        return mats[static_cast<std::size_t>(mod(k, p))].solve(y);
    });
    report.condition_estimate = worst;
    return report;
}

NormIdentity multichannel_norm_identity(const OperatorModel& model, std::span<const SampledOutput> outputs, int m,
                                        int n)
{
    require(m >= 1 && n >= 1, "multichannel_norm_identity: M and N must be positive");
    double energy = 0.0;
    for (const auto& o : outputs) energy += o.energy();
    return make_norm_identity(hs_norm_squared(model), energy / (static_cast<double>(m) * m * n));
}

std::vector<SampledOutput> pns_outputs(const OperatorModel& model, std::span<const double> alphas, double period,
                                       int margin_periods)
{
    require(period > 0.0, "pns_outputs: period must be positive");
    require(margin_periods >= 0, "pns_outputs: margin must be nonnegative");
    require(model.temporal_support() <= period * (1.0 + 1e-12), "pns_outputs: temporal support exceeds the period");
    const double delta = model.spacing();
    const auto n_lo = static_cast<long long>(std::floor(model.window().first * delta / period)) - margin_periods;
    const auto n_hi = static_cast<long long>(std::ceil(model.window().last * delta / period)) + margin_periods;
    std::vector<SampledOutput> out;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const double a = alphas[j];
        std::vector<double> shifts;
        for (long long k = n_lo; k <= n_hi; ++k) shifts.push_back(static_cast<double>(k) * period + a);
        const DeltaTrain train = periodic_nonuniform_train(period, a, {n_lo - 2, n_hi + 1});
        out.push_back(apply_train(model, train, shifts, static_cast<int>(j)));
    }
    return out;
}

Complex pns_s1(double x, double alpha)
{
    const Complex num = unit(alpha - 0.5 * x) - unit(0.5 * x);
    return sinc(0.5 * x) * num / (unit(alpha) - 1.0);
}

Complex pns_s2(double x, double alpha)
{
    const Complex num = unit(alpha + 0.5 * x) - unit(-0.5 * x);
    return sinc(0.5 * x) * num / (unit(alpha) - 1.0);
}

ReconReport pns_two_channel_reconstruct(const SampledOutput& even, const SampledOutput& shifted, double alpha,
                                        const ModelShape& target)
{
    require(alpha > 0.0 && alpha < 1.0, "pns_two_channel: alpha must lie in (0, 1)");
    target.validate();
    require(std::abs(target.spacing - 1.0) <= 1e-12 && target.temporal_support <= 2.0 * (1.0 + 1e-12),
            "pns_two_channel: model must lie in OPW([0,2] x [-1/2,1/2])");
    for (const SampledOutput* o : {&even, &shifted})
        require(same_grid(o->base_grid, target.t_grid()), "pns_two_channel: output grid is not the target t-grid");
    long long k = 0;
    for (double s : even.shifts) require(near_integer(0.5 * s, k), "pns_two_channel: first channel shifts must be 2n");
    for (double s : shifted.shifts)
        require(near_integer(0.5 * (s - alpha), k), "pns_two_channel: second channel shifts must be 2n + alpha");

    const std::vector<SampledOutput> outputs{even, shifted};
    ReconReport report;
    report.estimate = synthesize(std::span<const SampledOutput>(outputs), target, [alpha](std::size_t c, double u) {
        return c == 0 ? pns_s1(u, alpha) : pns_s2(u, alpha);
    });
    report.tail_mass = tail_mass(outputs, target.window.first * target.spacing, target.window.last * target.spacing);
    return report;
}

PnsKernels::PnsKernels(std::vector<double> alphas, int m, int n) : alphas_(std::move(alphas)), m_(m), n_(n)
{
    require(m >= 1 && n >= 1, "pns kernels: M and N must be positive");
    const auto p = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
    require(alphas_.size() == p, "pns kernels: need exactly MN offsets");
    std::vector<double> sorted(alphas_);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < p; ++j) {
        require(sorted[j] >= 0.0 && sorted[j] < n, "pns kernels: offsets must lie in [0, N)");
        if (j > 0) require(sorted[j] > sorted[j - 1], "pns kernels: duplicate offset alpha_j");
    }
    // On sub-band b of width 1/N, S_j^ = N (E_b^{-1})_{j,b} with (E_b)_{q,j} = exp(2 pi i alpha_j (q - b) / N).
    coef_.assign(p * p, {});
    mid_.resize(p);
    const auto ps = static_cast<Eigen::Index>(p);
    for (std::size_t b = 0; b < p; ++b) {
        mid_[b] = -0.5 * m + (static_cast<double>(b) + 0.5) / n;
        CMatrix e(ps, ps);
        for (std::size_t q = 0; q < p; ++q)
            for (std::size_t j = 0; j < p; ++j)
                e(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(j)) =
                    unit(2.0 * alphas_[j] * (static_cast<double>(q) - static_cast<double>(b)) / n);
        Eigen::FullPivLU<CMatrix> lu(e);
        if (!lu.isInvertible()) throw SingularSystemError("pns kernels: sub-band system is singular");
        const CMatrix inv = lu.inverse();
        for (std::size_t j = 0; j < p; ++j)
            coef_[j * p + b] = static_cast<double>(n) * inv(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b));
    }
}

Complex PnsKernels::operator()(std::size_t j, double u) const
{
    const std::size_t p = alphas_.size();
    Complex sum;
    for (std::size_t b = 0; b < p; ++b) sum += coef_[j * p + b] * unit(2.0 * u * mid_[b]);
    return sum * sinc(u / n_) / static_cast<double>(n_);
}

ReconReport pns_general_reconstruct(std::span<const SampledOutput> outputs, std::span<const double> alphas, int m,
                                    int n, const ModelShape& target, const PnsOptions& options)
{
    target.validate();
    require(m >= 1 && n >= 1, "pns_general: M and N must be positive");
    require(std::abs(target.spacing * m - 1.0) <= 1e-12, "pns_general: model spacing must equal 1/M");
    require(target.temporal_support <= n * (1.0 + 1e-12), "pns_general: temporal support exceeds N");
    require(outputs.size() == alphas.size(), "pns_general: one output per offset is required");
    const PnsKernels kernels(std::vector<double>(alphas.begin(), alphas.end()), m, n);
    for (std::size_t j = 0; j < outputs.size(); ++j) {
        require(same_grid(outputs[j].base_grid, target.t_grid()), "pns_general: output grid is not the target t-grid");
        long long k = 0;
        for (double s : outputs[j].shifts)
            require(near_integer((s - alphas[j]) / n, k), "pns_general: channel shifts must be kN + alpha_j");
    }

    ReconReport report;
    const double lo = target.window.first * target.spacing;
    const double hi = target.window.last * target.spacing;
    report.tail_mass = tail_mass(outputs, lo, hi);

    if (options.solver == PnsSolver::subband) {
        report.estimate =
            synthesize(outputs, target, [&kernels](std::size_t c, double u) { return kernels(c, u); });
        report.notes.push_back("sub-band reconstruction functions");
        return report;
    }

    // merged node set fed to the dual-frame engine on [-M/2, M/2]
    struct Sample {
        double u;
        std::size_t channel;
        std::size_t index;
    };
    std::vector<Sample> all;
    for (std::size_t j = 0; j < outputs.size(); ++j)
        for (std::size_t s = 0; s < outputs[j].shifts.size(); ++s) all.push_back({outputs[j].shifts[s], j, s});
    std::sort(all.begin(), all.end(), [](const Sample& a, const Sample& b) { return a.u < b.u; });
    const std::size_t section = std::min(options.section, all.size());
    const std::size_t start = (all.size() - section) / 2;
    std::vector<double> nodes(section);
    for (std::size_t k = 0; k < section; ++k) nodes[k] = all[start + k].u;
    const ExponentialFrame frame(nodes, static_cast<double>(m));
    const double rho = options.rho_factor * frame.bounds().upper;

    const LatticeWindow& w = target.window;
    std::vector<double> kern(w.size() * section);
    for (int mm = w.first; mm <= w.last; ++mm)
        for (std::size_t k = 0; k < section; ++k)
            kern[static_cast<std::size_t>(mm - w.first) * section + k] = m * sinc(m * (mm * target.spacing - nodes[k]));
    OperatorModel est = OperatorModel::zero(target);
    std::vector<Complex> s(section);
    for (std::size_t i = 0; i < target.nt; ++i) {
        for (std::size_t k = 0; k < section; ++k) s[k] = outputs[all[start + k].channel].value(all[start + k].index, i);
        const std::vector<Complex> c = frame.solve(s, rho);
        for (int mm = w.first; mm <= w.last; ++mm) {
            const double* row = &kern[static_cast<std::size_t>(mm - w.first) * section];
            Complex sum;
            for (std::size_t k = 0; k < section; ++k) sum += c[k] * row[k];
            est.coeff(mm, i) = sum;
        }
    }
    report.estimate = std::move(est);
    report.regularization = rho;
    const FrameBounds b = frame.bounds();
    report.condition_estimate = b.lower > 0.0 ? b.upper / b.lower : INFINITY;
    report.notes.push_back("finite-section dual frame, section " + std::to_string(section));
    return report;
}

std::vector<SampledOutput> derivative_outputs(const OperatorModel& model, int margin_periods)
{
    require(std::abs(model.spacing() - 1.0) <= 1e-12 && model.temporal_support() <= 2.0 * (1.0 + 1e-12),
            "derivative_outputs: model must lie in OPW([0,2] x [-1/2,1/2])");
    require(margin_periods >= 0, "derivative_outputs: margin must be nonnegative");
    const auto n_lo = static_cast<long long>(std::floor(model.window().first / 2.0)) - margin_periods;
    const auto n_hi = static_cast<long long>(std::ceil(model.window().last / 2.0)) + margin_periods;
    std::vector<double> shifts;
    for (long long k = n_lo; k <= n_hi; ++k) shifts.push_back(2.0 * static_cast<double>(k));
    std::vector<SampledOutput> out;
    for (int r = 0; r <= 1; ++r)
        out.push_back(apply_train(model, derivative_train(2.0, r, {n_lo - 2, n_hi + 1}), shifts, r));
    return out;
}

ReconReport derivative_two_channel_reconstruct(const SampledOutput& plain, const SampledOutput& derivative,
                                               const ModelShape& target)
{
    target.validate();
    require(std::abs(target.spacing - 1.0) <= 1e-12 && target.temporal_support <= 2.0 * (1.0 + 1e-12),
            "derivative_two_channel: model must lie in OPW([0,2] x [-1/2,1/2])");
    for (const SampledOutput* o : {&plain, &derivative}) {
        require(same_grid(o->base_grid, target.t_grid()), "derivative_two_channel: output grid is not the target t-grid");
        long long k = 0;
        for (double s : o->shifts) require(near_integer(0.5 * s, k), "derivative_two_channel: shifts must be 2n");
    }
    const std::vector<SampledOutput> outputs{plain, derivative};
    ReconReport report;
    report.estimate = synthesize(std::span<const SampledOutput>(outputs), target, [](std::size_t c, double u) {
        const double s = sinc(0.5 * u);
        return Complex(c == 0 ? s * s : (2.0 / kPi) * s * sin_pi(0.5 * u));
    });
    report.tail_mass = tail_mass(outputs, target.window.first * target.spacing, target.window.last * target.spacing);
    return report;
}

SampledOutput leibniz_derivative_channel(const OperatorModel& model, double period, IndexRange k_range,
                                         std::span<const double> shifts, double step)
{
    require(step > 0.0, "leibniz_derivative_channel: step must be positive");
    const DeltaTrain train = derivative_train(period, 0, k_range);
    const TimeGrid grid = model.t_grid();
    TimeGrid up = grid;
    TimeGrid down = grid;
    up.origin += step;
    down.origin -= step;
    // (H f)' by moving the evaluation points, H f' by moving the impulses
    const SampledOutput plus_x = apply_train(model, train, shifts, up);
    const SampledOutput minus_x = apply_train(model, train, shifts, down);
    const SampledOutput left = apply_train(model, train.shifted(-step), shifts, grid);
    const SampledOutput right = apply_train(model, train.shifted(step), shifts, grid);
    SampledOutput out(grid, std::vector<double>(shifts.begin(), shifts.end()), 1);
    for (std::size_t v = 0; v < out.values.size(); ++v) {
        const Complex d_out = (plus_x.values[v] - minus_x.values[v]) / (2.0 * step);
        const Complex d_in = (left.values[v] - right.values[v]) / (2.0 * step);
        out.values[v] = d_out - d_in;
    }
    return out;
}

} // namespace opsamp
