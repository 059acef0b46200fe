#pragma once

// Independent reference computations for the tests: plain libm sinc sums,
// Gauss-Legendre quadrature and a cyclic Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

inline double sinc(double u)
{
    if (u == 0.0) return 1.0;
    return std::sin(pi * u) / (pi * u);
}

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline Rule gauss_legendre(int n)
{
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = z;
        r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

/// Composite Gauss-Legendre: `panels` panels of `order` points on [a, b].
template <class F>
auto integrate(F&& f, double a, double b, int panels, int order = 16)
{
    static thread_local std::vector<std::pair<int, Rule>> cache;
    auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& p) { return p.first == order; });
    if (it == cache.end()) {
        cache.emplace_back(order, gauss_legendre(order));
        it = cache.end() - 1;
    }
    const Rule& rule = it->second;
    const double h = (b - a) / panels;
    decltype(f(a)) sum{};
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < order; ++k) sum += rule.w[k] * 0.5 * h * f(mid + 0.5 * h * rule.x[k]);
    }
    return sum;
}

/// Eigenvalues (ascending) of a real symmetric matrix, row-major, by cyclic Jacobi sweeps.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n)
{
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

/// Gram matrix of exp(2 pi i lambda xi) on [-omega/2, omega/2] by quadrature of the defining integral.
inline std::vector<double> gram_by_quadrature(const std::vector<double>& nodes, double omega)
{
    const int n = static_cast<int>(nodes.size());
    std::vector<double> g(n * n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) {
            const double d = nodes[m] - nodes[k];
            g[m * n + k] = integrate([&](double xi) { return std::cos(2.0 * pi * d * xi); }, -0.5 * omega,
                                     0.5 * omega, 64);
        }
    return g;
}

inline double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

} // namespace oracle
