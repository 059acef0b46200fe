#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"

#include "opsamp/core_model.hpp"
#include "opsamp/error.hpp"
#include "opsamp/rng.hpp"

#include <cmath>
#include <sstream>

using namespace opsamp;

namespace {

ModelShape shape(double spacing, double support, int half_width, std::size_t nt)
{
    return {spacing, support, LatticeWindow::symmetric(half_width), nt};
}

OperatorModel unit_diagonal(const ModelShape& s)
{
    OperatorModel m = OperatorModel::zero(s);
    for (std::size_t i = 0; i < s.nt; ++i) m.coeff(0, i) = 1.0;
    return m;
}

Complex direct_h(const OperatorModel& m, double t, double x)
{
    const auto i = m.t_index(t);
    if (!i) return {};
    Complex sum;
    for (int n = m.window().first; n <= m.window().last; ++n)
        sum += m.coeff(n, *i) * oracle::sinc((x - t - n * m.spacing()) / m.spacing());
    return sum;
}

// r-th derivative of sinc from sinc(u) = int_{-1/2}^{1/2} cos(2 pi u xi) d xi
double sinc_derivative_by_quadrature(double u, int r)
{
    return oracle::integrate(
        [&](double xi) {
            const double w = 2.0 * oracle::pi * xi;
            return std::pow(w, r) * std::cos(w * u + r * oracle::pi / 2.0);
        },
        -0.5, 0.5, 64);
}

} // namespace

TEST_CASE("sinc conventions")
{
    CHECK(sinc(0.0) == 1.0);
    for (int k = 1; k < 50; ++k) {
        CHECK(sinc(k) == 0.0);
        CHECK(sinc(-k) == 0.0);
        CHECK(sin_pi(static_cast<double>(k)) == 0.0);
    }
    CHECK(sinc(0.5) == doctest::Approx(2.0 / oracle::pi).epsilon(1e-15));
    CHECK(cos_pi(0.5) == 0.0);
    CHECK(cos_pi(1.0) == -1.0);
    for (double u : {-7.3, -1.0, -0.4, 0.0, 1e-9, 0.3, 0.999, 1.0, 1.001, 2.5, 13.7})
        for (int r = 0; r <= 4; ++r) {
            INFO("u=" << u << " r=" << r);
            CHECK(sinc_derivative(u, r) == doctest::Approx(sinc_derivative_by_quadrature(u, r)).epsilon(1e-10).scale(1.0));
        }
    CHECK_THROWS_AS(sinc_derivative(0.3, 5), PreconditionError);
}

TEST_CASE("eval_h examples")
{
    const ModelShape s = shape(1.0, 1.0, 8, 16);
    const OperatorModel zero = OperatorModel::zero(s);
    CHECK(eval_h(zero, 0.3, 1.7) == Complex{});

    const OperatorModel diag = unit_diagonal(s);
    const TimeGrid g = s.t_grid();
    for (std::size_t i = 0; i < g.count; ++i) {
        const double t = g.point(i);
        CHECK(eval_h(diag, t, t) == Complex(1.0));
        for (int m = -8; m <= 8; ++m)
            if (m != 0) CHECK(eval_h(diag, t, t + m) == Complex{});
    }
}

TEST_CASE("eval_h vanishes outside the temporal support")
{
    const OperatorModel m = random_operator(shape(0.5, 1.5, 6, 12), 3);
    for (double t : {-1e-12, -0.2, 1.5 + 1e-9, 3.0})
        for (double x : {-1.0, 0.0, 0.7, 2.0}) CHECK(eval_h(m, t, x) == Complex{});
    CHECK(eval_h(m, 0.0, 0.0) != Complex{});
    CHECK(eval_h(m, 1.5, 1.5) != Complex{});
}

TEST_CASE("interpolation identity on the t-grid")
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const OperatorModel m = random_operator(shape(0.8, 1.3, 10, 20), seed);
        const TimeGrid g = m.t_grid();
        for (std::size_t i = 0; i < g.count; ++i)
            for (int n = -10; n <= 10; ++n)
                CHECK(std::abs(eval_h(m, g.point(i), g.point(i) + n * 0.8) - m.coeff(n, i)) <= 1e-12);
    }
}

TEST_CASE("eval_h matches a direct libm sinc sum")
{
    const OperatorModel m = random_operator(shape(0.7, 1.0, 12, 10), 9);
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double t = rng.uniform(0.0, 1.0);
        const double x = rng.uniform(-12.0, 12.0);
        CHECK(std::abs(eval_h(m, t, x) - direct_h(m, t, x)) <= 1e-12);
    }
}

TEST_CASE("x-derivatives of h match finite differences")
{
    const OperatorModel m = random_operator(shape(1.0, 1.0, 6, 8), 4);
    const double t = m.t_grid().point(3);
    for (double x : {-3.3, 0.1, t, 2.75}) {
        for (int r = 1; r <= 4; ++r) {
            const double e = 1e-3;
            const auto f = [&](double y) { return eval_h_derivative(m, t, y, r - 1); };
            const Complex fd = (f(x - 2 * e) - 8.0 * f(x - e) + 8.0 * f(x + e) - f(x + 2 * e)) / (12.0 * e);
            CHECK(std::abs(eval_h_derivative(m, t, x, r) - fd) <= 1e-6);
        }
    }
}

TEST_CASE("eval_eta examples")
{
    const ModelShape s = shape(0.5, 1.0, 5, 8);
    CHECK(eval_eta(OperatorModel::zero(s), 0.3, 0.2) == Complex{});
    const OperatorModel diag = unit_diagonal(s);
    CHECK(std::abs(eval_eta(diag, diag.t_grid().point(0), 0.0) - Complex(0.5)) < 1e-15);
    CHECK(eval_eta(diag, 0.3, 1.0 + 1e-9) == Complex{});
    CHECK(eval_eta(diag, -0.1, 0.0) == Complex{});
}

TEST_CASE("inverse transform of eta reproduces h")
{
    const OperatorModel m = random_operator(shape(0.5, 1.0, 10, 8), 21);
    const double omega = m.shape().bandwidth();
    Rng rng(5);
    for (int trial = 0; trial < 12; ++trial) {
        const double t = m.t_grid().point(static_cast<std::size_t>(rng.integer(0, 7)));
        const double x = rng.uniform(-6.0, 6.0);
        const Complex q = oracle::integrate(
            [&](double nu) { return eval_eta(m, t, nu) * std::exp(Complex(0.0, 2.0 * oracle::pi * x * nu)); },
            -0.5 * omega, 0.5 * omega, 256);
        CHECK(std::abs(q - eval_h(m, t, x)) <= 1e-8);
    }
}

TEST_CASE("eval_sigma examples")
{
    const ModelShape s = shape(1.0, 1.0, 6, 16);
    CHECK(eval_sigma(OperatorModel::zero(s), 0.4, 0.7) == Complex{});

    const OperatorModel diag = unit_diagonal(s);
    const TimeGrid g = s.t_grid();
    for (double x : {-2.0, 0.0, 3.0}) {
        double riemann = 0.0;
        for (std::size_t i = 0; i < g.count; ++i) riemann += oracle::sinc(x - g.point(i)) * g.step;
        CHECK(std::abs(eval_sigma(diag, x, 0.0) - Complex(riemann)) <= 1e-14);
    }

    OperatorModel real = random_operator(s, 8);
    for (std::size_t i = 0; i < s.nt; ++i)
        for (int n = -6; n <= 6; ++n) real.coeff(n, i) = real.coeff(n, i).real();
    for (double xi : {0.3, 1.7})
        CHECK(std::abs(eval_sigma(real, 0.6, -xi) - std::conj(eval_sigma(real, 0.6, xi))) <= 1e-13);
}

TEST_CASE("hs norm examples")
{
    CHECK(hs_norm(OperatorModel::zero(shape(1.0, 1.0, 3, 8))) == 0.0);
    CHECK(hs_norm(unit_diagonal(shape(1.0, 1.0, 3, 8))) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hs norm matches brute-force quadrature of |h|^2")
{
    const ModelShape s = shape(1.0, 1.0, 4, 6);
    const OperatorModel m = random_operator(s, 12);
    const TimeGrid g = s.t_grid();
    const double half = (4 + 10000) * s.spacing;
    const double dx = s.spacing / 4.0;
    double total = 0.0;
    for (std::size_t i = 0; i < g.count; ++i) {
        double row = 0.0;
        for (double x = -half; x <= half; x += dx) row += std::norm(direct_h(m, g.point(i), g.point(i) + x));
        total += row * dx * g.step;
    }
    CHECK(std::abs(hs_norm_squared(m) - total) / total <= 1e-4);
}

TEST_CASE("apply_train examples")
{
    const ModelShape s = shape(1.0, 1.0, 6, 8);
    const std::vector<double> shifts{-6, -3, 0, 2, 6};
    const DeltaTrain u = uniform_train(1.0, {-10, 10});

    const SampledOutput z = apply_train(OperatorModel::zero(s), u, shifts);
    for (auto v : z.values) CHECK(v == Complex{});

    const OperatorModel m = random_operator(s, 31);
    const SampledOutput y = apply_train(m, u, shifts);
    for (std::size_t k = 0; k < shifts.size(); ++k)
        for (std::size_t i = 0; i < s.nt; ++i)
            CHECK(std::abs(y.value(k, i) - m.coeff(static_cast<int>(shifts[k]), i)) <= 1e-12);
}

TEST_CASE("overlapping nodes sum both contributions")
{
    const ModelShape s = shape(1.0, 1.0, 5, 8);
    const OperatorModel m = random_operator(s, 32);
    const DeltaTrain two({0.0, 0.5}, {1.0, 1.0});
    std::vector<double> shifts;
    for (int n = -3; n <= 3; ++n) shifts.push_back(n);
    const SampledOutput y = apply_train(m, two, shifts);
    const TimeGrid g = s.t_grid();
    for (std::size_t k = 0; k < shifts.size(); ++k)
        for (std::size_t i = 0; i < g.count; ++i) {
            const double t = g.point(i);
            const double x = t + shifts[k];
            const Complex expect = direct_h(m, x, x) + direct_h(m, x - 0.5, x);
            CHECK(std::abs(y.value(k, i) - expect) <= 1e-12);
        }
}

TEST_CASE("single node output equals c * h(x - lambda, x)")
{
    const OperatorModel m = random_operator(shape(0.6, 1.2, 7, 10), 33);
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const double lambda = rng.uniform(-3.0, 3.0);
        const Complex c(rng.normal(), rng.normal());
        const int r = static_cast<int>(rng.integer(0, 4));
        const DeltaTrain d({lambda}, {c}, {r});
        const TimeGrid grid{rng.uniform(-1.0, 1.0), 0.05, 40};
        const std::vector<double> shifts{lambda, lambda + 0.37};
        const SampledOutput y = apply_train(m, d, shifts, grid);
        for (std::size_t k = 0; k < shifts.size(); ++k)
            for (std::size_t i = 0; i < grid.count; ++i) {
                const double x = grid.point(i) + shifts[k];
                const Complex expect = c * eval_h_derivative(m, x - lambda, x, r);
                CHECK(std::abs(y.value(k, i) - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
                if (r == 0) CHECK(std::abs(eval_output(m, d, x) - expect) <= 1e-12);
            }
    }
}

TEST_CASE("apply_train rejects unrepresentable nodes")
{
    const OperatorModel m = random_operator(shape(1.0, 1.0, 2, 4), 1);
    const DeltaTrain far({0.0, 1e13}, {1.0, 1.0});
    const std::vector<double> shifts{0.0};
    CHECK_THROWS_AS(apply_train(m, far, shifts), PreconditionError);
}

TEST_CASE("apply_train is linear in the model")
{
    const ModelShape s = shape(1.0, 1.0, 6, 8);
    const DeltaTrain k = kadec_train(1.0, [](long long j) { return 0.1 * std::cos(1.3 * j); }, {-12, 12}).train;
    const std::vector<double> shifts(k.nodes().begin(), k.nodes().end());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const OperatorModel a = random_operator(s, 2 * seed);
        const OperatorModel b = random_operator(s, 2 * seed + 1);
        const Complex alpha(0.3, -1.1), beta(2.0, 0.5);
        std::vector<Complex> mix(a.coeffs().size());
        for (std::size_t j = 0; j < mix.size(); ++j) mix[j] = alpha * a.coeffs()[j] + beta * b.coeffs()[j];
        const OperatorModel ab(s, mix);
        const SampledOutput ya = apply_train(a, k, shifts);
        const SampledOutput yb = apply_train(b, k, shifts);
        const SampledOutput yab = apply_train(ab, k, shifts);
        for (std::size_t j = 0; j < yab.values.size(); ++j)
            CHECK(std::abs(yab.values[j] - alpha * ya.values[j] - beta * yb.values[j]) <= 1e-12);
    }
}

TEST_CASE("random operator determinism")
{
    const ModelShape s = shape(0.5, 2.0, 9, 16);
    const OperatorModel a = random_operator(s, 77);
    const OperatorModel b = random_operator(s, 77);
    const OperatorModel c = random_operator(s, 78);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(hs_norm(a) > 0.0);
}

TEST_CASE("t-grid lookup")
{
    const OperatorModel m = OperatorModel::zero(shape(1.0, 2.0, 1, 4));
    CHECK_FALSE(m.t_index(-0.01).has_value());
    CHECK_FALSE(m.t_index(2.01).has_value());
    CHECK(*m.t_index(0.0) == 0);
    CHECK(*m.t_index(2.0) == 3);
    CHECK(*m.t_index(0.75) == 1);
    CHECK(m.on_grid(0.25));
    CHECK_FALSE(m.on_grid(0.3));
}

TEST_CASE("model text round trip is exact")
{
    const OperatorModel m = random_operator({0.3, 1.0 / 3.0, {-4, 7}, 5}, 123);
    std::stringstream ss;
    write_model(ss, m);
    const OperatorModel r = read_model(ss);
    CHECK(r == m);

    std::stringstream missing("opsamp-model spacing=1 temporal_support=1 n_min=0 n_max=0 nt=2\n0 0 1 0\n");
    CHECK_THROWS_AS(read_model(missing), ParseError);
    std::stringstream wrong_tag("opsamp-output spacing=1\n");
    CHECK_THROWS_AS(read_model(wrong_tag), ParseError);
    std::stringstream out_of_window("opsamp-model spacing=1 temporal_support=1 n_min=0 n_max=0 nt=1\n3 0 1 0\n");
    CHECK_THROWS_AS(read_model(out_of_window), ParseError);
}

TEST_CASE("output text round trip is exact, several blocks")
{
    const OperatorModel m = random_operator({1.0, 1.0, {-3, 3}, 4}, 5);
    const std::vector<double> s1{-1.0, 0.1, 2.0};
    const std::vector<double> s2{0.5};
    const SampledOutput a = apply_train(m, uniform_train(1.0, {-5, 5}), s1, 0);
    const SampledOutput b = apply_train(m, uniform_train(1.0, {-5, 5}), s2, 3);
    std::stringstream ss;
    write_output(ss, a);
    write_output(ss, b);
    const auto r = read_outputs(ss);
    REQUIRE(r.size() == 2);
    CHECK(r[0].values == a.values);
    CHECK(r[0].shifts == a.shifts);
    CHECK(r[1].channel_tag == 3);
    CHECK(r[1].values == b.values);
    CHECK(r[1].base_grid.origin == b.base_grid.origin);

    std::stringstream truncated("opsamp-output origin=0 step=1 count=2 channel=0 shifts=1\nshift 0 0\n0 0 1 1\n");
    CHECK_THROWS_AS(read_outputs(truncated), ParseError);
}
