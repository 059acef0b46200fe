#include "opsamp/core_model.hpp"

#include "opsamp/error.hpp"
#include "opsamp/rng.hpp"
#include "opsamp/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

namespace opsamp {

namespace {

constexpr double kPi = std::numbers::pi;

// Largest |lambda| / spacing accepted by the forward map.
constexpr double kMaxLatticeOffset = 0x1.0p40;

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// d^r/dv^r of sin(v)/v at v = pi*u, for |u| < 1.
double sinc_series_derivative(double v, int order)
{
    double sum = 0.0;
    for (int j = (order + 1) / 2; j < 40; ++j) {
        const int p = 2 * j - order;
        // (-1)^j v^(2j) / (2j+1)! differentiated r times
        double term = 1.0 / (2.0 * j + 1.0);
        term /= factorial(p);
        term *= std::pow(v, p);
        if (j % 2 == 1) term = -term;
        sum += term;
        if (p > 4 && std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
}

// D^r of the sinc series at lag u (in units of the spacing), one value per lattice index.
void fill_kernel(double u, int order, double spacing, const LatticeWindow& window, std::vector<double>& out)
{
    out.resize(window.size());
    const double scale = std::pow(spacing, -order);
    if (order == 0) {
        const double s = sin_pi(u);
        for (int n = window.first; n <= window.last; ++n) {
            const double d = u - n;
            double value;
            if (d == 0.0)
                value = 1.0;
            else if (std::abs(d) < 1.0)
                value = sinc(d);
            else
                value = ((n % 2 == 0) ? s : -s) / (kPi * d);
            out[static_cast<std::size_t>(n - window.first)] = value;
        }
        return;
    }
    for (int n = window.first; n <= window.last; ++n)
        out[static_cast<std::size_t>(n - window.first)] = scale * sinc_derivative(u - n, order);
}

Complex dot(std::span<const Complex> a, const std::vector<double>& k)
{
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        re += a[n].real() * k[n];
        im += a[n].imag() * k[n];
    }
    return {re, im};
}

std::size_t header_size(const std::map<std::string, std::string>& h, const std::string& key)
{
    const auto it = h.find(key);
    if (it == h.end()) throw ParseError("missing header field '" + key + "'");
    const long long v = parse_integer(it->second);
    if (v < 0) throw ParseError("header field '" + key + "' is negative");
    return static_cast<std::size_t>(v);
}

double header_double(const std::map<std::string, std::string>& h, const std::string& key)
{
    const auto it = h.find(key);
    if (it == h.end()) throw ParseError("missing header field '" + key + "'");
    return parse_double(it->second);
}

long long header_integer(const std::map<std::string, std::string>& h, const std::string& key)
{
    const auto it = h.find(key);
    if (it == h.end()) throw ParseError("missing header field '" + key + "'");
    return parse_integer(it->second);
}

bool next_data_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line))
        if (!is_blank_or_comment(line)) return true;
    return false;
}

} // namespace

void ModelShape::validate() const
{
    require(std::isfinite(spacing) && spacing > 0.0, "model: spacing must be positive");
    require(std::isfinite(temporal_support) && temporal_support > 0.0,
            "model: temporal support must be positive");
    require(window.size() > 0, "model: lattice window is empty");
    require(nt > 0, "model: t-grid needs at least one point");
}

OperatorModel::OperatorModel(ModelShape shape, std::vector<Complex> coeffs)
    : shape_(shape), coeffs_(std::move(coeffs))
{
    shape_.validate();
    require(coeffs_.size() == shape_.window.size() * shape_.nt,
            "model: coefficient count does not match window and t-grid");
}

OperatorModel OperatorModel::zero(const ModelShape& shape)
{
    shape.validate();
    return {shape, std::vector<Complex>(shape.window.size() * shape.nt)};
}

std::optional<std::size_t> OperatorModel::t_index(double t) const
{
    if (!(t >= 0.0 && t <= shape_.temporal_support)) return std::nullopt;
    const auto i = static_cast<std::size_t>(std::floor(t / shape_.step()));
    return std::min(i, shape_.nt - 1);
}

bool OperatorModel::on_grid(double t, double tolerance) const
{
    const auto i = t_index(t);
    return i && std::abs(t - shape_.t_grid().point(*i)) <= tolerance;
}

Complex OperatorModel::coeff_at(double t, int n) const
{
    const auto i = t_index(t);
    if (!i || !shape_.window.contains(n)) return {};
    return coeff(n, *i);
}

SampledOutput::SampledOutput(TimeGrid grid, std::vector<double> shift_list, int tag)
    : base_grid(grid), shifts(std::move(shift_list)), values(base_grid.count * shifts.size()), channel_tag(tag)
{
}

double SampledOutput::energy() const
{
    double sum = 0.0;
    for (const auto& v : values) sum += std::norm(v);
    return sum * base_grid.step;
}

double sin_pi(double x)
{
    const double r = x - 2.0 * std::nearbyint(0.5 * x); // r in [-1, 1]
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r > 0.5) return std::sin(kPi * (1.0 - r));
    if (r < -0.5) return -std::sin(kPi * (1.0 + r));
    return std::sin(kPi * r);
}

double cos_pi(double x)
{
    return sin_pi(x + 0.5);
}

double sinc(double u)
{
    if (u == 0.0) return 1.0;
    if (std::abs(u) < 1e-8) return 1.0 - kPi * kPi * u * u / 6.0;
    return sin_pi(u) / (kPi * u);
}

double sinc_derivative(double u, int order)
{
    require(order >= 0 && order <= kMaxDerivativeOrder, "sinc_derivative: order outside [0, 4]");
    if (order == 0) return sinc(u);
    const double v = kPi * u;
    const double pr = std::pow(kPi, order);
    if (std::abs(u) < 1.0) return pr * sinc_series_derivative(v, order);
    // Leibniz on sin(v) * v^{-1}
    double sum = 0.0;
    for (int k = 0; k <= order; ++k) {
        const int m = order - k;
        const double trig = sin_pi(u + 0.5 * m);
        const double inv = ((k % 2 == 0) ? 1.0 : -1.0) * factorial(k) / std::pow(v, k + 1);
        sum += binomial(order, k) * trig * inv;
    }
    return pr * sum;
}

Complex eval_h(const OperatorModel& model, double t, double x)
{
    return eval_h_derivative(model, t, x, 0);
}

Complex eval_h_derivative(const OperatorModel& model, double t, double x, int order)
{
    require(order >= 0 && order <= kMaxDerivativeOrder, "eval_h_derivative: order outside [0, 4]");
    const auto i = model.t_index(t);
    if (!i) return {};
    std::vector<double> kernel;
    fill_kernel((x - t) / model.spacing(), order, model.spacing(), model.window(), kernel);
    return dot(model.row(*i), kernel);
}

Complex eval_eta(const OperatorModel& model, double t, double nu)
{
    const auto i = model.t_index(t);
    if (!i || std::abs(nu) > 0.5 * model.shape().bandwidth()) return {};
    const auto row = model.row(*i);
    const double delta = model.spacing();
    Complex sum;
    for (int n = model.window().first; n <= model.window().last; ++n) {
        const double phase = -2.0 * (t + n * delta) * nu;
        sum += row[static_cast<std::size_t>(n - model.window().first)] * Complex(cos_pi(phase), sin_pi(phase));
    }
    return delta * sum;
}

Complex eval_sigma(const OperatorModel& model, double x, double xi)
{
    const TimeGrid grid = model.t_grid();
    Complex sum;
    for (std::size_t i = 0; i < grid.count; ++i) {
        const double t = grid.point(i);
        const double phase = -2.0 * t * xi;
        sum += eval_h(model, t, x) * Complex(cos_pi(phase), sin_pi(phase));
    }
    return grid.step * sum;
}

double hs_norm_squared(const OperatorModel& model)
{
    double sum = 0.0;
    for (const auto& c : model.coeffs()) sum += std::norm(c);
    return model.spacing() * model.shape().step() * sum;
}

double hs_norm(const OperatorModel& model)
{
    return std::sqrt(hs_norm_squared(model));
}

Complex eval_output(const OperatorModel& model, const DeltaTrain& train, double x)
{
    Complex sum;
    for (std::size_t k = 0; k < train.size(); ++k) {
        if (train.weight(k) == Complex{}) continue;
        sum += train.weight(k) * eval_h_derivative(model, x - train.node(k), x, train.order(k));
    }
    return sum;
}

SampledOutput apply_train(const OperatorModel& model, const DeltaTrain& train, std::span<const double> shifts,
                          const TimeGrid& grid, int channel_tag)
{
    const double delta = model.spacing();
    for (double lambda : train.nodes())
        require(std::abs(lambda) / delta < kMaxLatticeOffset,
                "apply_train: node lies outside the representable evaluation window");
    for (double s : shifts) require(std::isfinite(s), "apply_train: shift is not finite");

    SampledOutput out(grid, std::vector<double>(shifts.begin(), shifts.end()), channel_tag);
    const auto nodes = train.nodes();
    const double support = model.temporal_support();

    // The lag x - t equals lambda_k exactly, so each node has a fixed kernel.
    std::vector<std::vector<double>> kernels(train.size());
    for (std::size_t s = 0; s < shifts.size(); ++s) {
        for (std::size_t i = 0; i < grid.count; ++i) {
            const double x = grid.point(i) + shifts[s];
            const auto lo = std::lower_bound(nodes.begin(), nodes.end(), x - support);
            const auto hi = std::upper_bound(nodes.begin(), nodes.end(), x);
            Complex sum;
            for (auto it = lo; it != hi; ++it) {
                const auto k = static_cast<std::size_t>(it - nodes.begin());
                if (train.weight(k) == Complex{}) continue;
                const auto ti = model.t_index(x - nodes[k]);
                if (!ti) continue;
                if (kernels[k].empty())
                    fill_kernel(nodes[k] / delta, train.order(k), delta, model.window(), kernels[k]);
                sum += train.weight(k) * dot(model.row(*ti), kernels[k]);
            }
            out.value(s, i) = sum;
        }
    }
    return out;
}

SampledOutput apply_train(const OperatorModel& model, const DeltaTrain& train, std::span<const double> shifts,
                          int channel_tag)
{
    return apply_train(model, train, shifts, model.t_grid(), channel_tag);
}

OperatorModel random_operator(const ModelShape& shape, std::uint64_t seed)
{
    OperatorModel model = OperatorModel::zero(shape);
    Rng rng(seed);
    for (int n = shape.window.first; n <= shape.window.last; ++n)
        for (std::size_t i = 0; i < shape.nt; ++i) model.coeff(n, i) = rng.complex_normal();
    return model;
}

void write_model(std::ostream& out, const OperatorModel& model)
{
    const auto& s = model.shape();
    out << "opsamp-model spacing=" << format_double(s.spacing)
        << " temporal_support=" << format_double(s.temporal_support) << " n_min=" << s.window.first
        << " n_max=" << s.window.last << " nt=" << s.nt << '\n';
    for (int n = s.window.first; n <= s.window.last; ++n)
        for (std::size_t i = 0; i < s.nt; ++i) {
            const Complex c = model.coeff(n, i);
            out << n << ' ' << i << ' ' << format_double(c.real()) << ' ' << format_double(c.imag()) << '\n';
        }
}

OperatorModel read_model(std::istream& in)
{
    std::string line;
    if (!next_data_line(in, line)) throw ParseError("model: empty input");
    const auto h = parse_header(line, "opsamp-model");
    ModelShape shape;
    shape.spacing = header_double(h, "spacing");
    shape.temporal_support = header_double(h, "temporal_support");
    shape.window = {static_cast<int>(header_integer(h, "n_min")), static_cast<int>(header_integer(h, "n_max"))};
    shape.nt = header_size(h, "nt");
    try {
        shape.validate();
    } catch (const PreconditionError& e) {
        throw ParseError(e.what());
    }
    OperatorModel model = OperatorModel::zero(shape);
    std::vector<bool> seen(model.coeffs().size(), false);
    std::size_t rows = 0;
    while (next_data_line(in, line)) {
        const auto f = split_fields(line);
        if (f.size() != 4) throw ParseError("model row: expected 4 fields");
        const long long n = parse_integer(f[0]);
        const long long i = parse_integer(f[1]);
        if (n < shape.window.first || n > shape.window.last || i < 0 || i >= static_cast<long long>(shape.nt))
            throw ParseError("model row: index outside the declared window");
        const std::size_t pos = static_cast<std::size_t>(i) * shape.window.size() +
                                static_cast<std::size_t>(n - shape.window.first);
        if (seen[pos]) throw ParseError("model row: duplicate coefficient");
        seen[pos] = true;
        model.coeff(static_cast<int>(n), static_cast<std::size_t>(i)) = {parse_double(f[2]), parse_double(f[3])};
        ++rows;
    }
    if (rows != seen.size()) throw ParseError("model: missing coefficient rows");
    return model;
}

void write_output(std::ostream& out, const SampledOutput& output)
{
    const auto& g = output.base_grid;
    out << "opsamp-output origin=" << format_double(g.origin) << " step=" << format_double(g.step)
        << " count=" << g.count << " channel=" << output.channel_tag << " shifts=" << output.shifts.size() << '\n';
    for (std::size_t s = 0; s < output.shifts.size(); ++s)
        out << "shift " << s << ' ' << format_double(output.shifts[s]) << '\n';
    for (std::size_t s = 0; s < output.shifts.size(); ++s)
        for (std::size_t i = 0; i < g.count; ++i) {
            const Complex v = output.value(s, i);
            out << s << ' ' << i << ' ' << format_double(v.real()) << ' ' << format_double(v.imag()) << '\n';
        }
}

std::vector<SampledOutput> read_outputs(std::istream& in)
{
    std::vector<SampledOutput> result;
    std::string line;
    while (next_data_line(in, line)) {
        const auto h = parse_header(line, "opsamp-output");
        TimeGrid grid{header_double(h, "origin"), header_double(h, "step"), header_size(h, "count")};
        if (!(grid.step > 0.0)) throw ParseError("output: step must be positive");
        const std::size_t k = header_size(h, "shifts");
        std::vector<double> shifts(k);
        for (std::size_t s = 0; s < k; ++s) {
            if (!next_data_line(in, line)) throw ParseError("output: truncated shift list");
            const auto f = split_fields(line);
            if (f.size() != 3 || f[0] != "shift" || parse_integer(f[1]) != static_cast<long long>(s))
                throw ParseError("output: malformed shift line");
            shifts[s] = parse_double(f[2]);
        }
        SampledOutput out(grid, std::move(shifts), static_cast<int>(header_integer(h, "channel")));
        for (std::size_t r = 0; r < out.values.size(); ++r) {
            if (!next_data_line(in, line)) throw ParseError("output: truncated value rows");
            const auto f = split_fields(line);
            if (f.size() != 4) throw ParseError("output row: expected 4 fields");
            const long long s = parse_integer(f[0]);
            const long long i = parse_integer(f[1]);
            if (s < 0 || s >= static_cast<long long>(k) || i < 0 || i >= static_cast<long long>(grid.count))
                throw ParseError("output row: index out of range");
            out.value(static_cast<std::size_t>(s), static_cast<std::size_t>(i)) = {parse_double(f[2]),
                                                                                    parse_double(f[3])};
        }
        result.push_back(std::move(out));
    }
    return result;
}

} // namespace opsamp
