#pragma once

// Shared test helpers: Richardson-extrapolated finite differences (the
// independent oracle for jet-extracted partials and for curvature built
// from metric components) and a deterministic random-expression generator.

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "ril/catalog.hpp"
#include "ril/expr.hpp"
#include "ril/tensor.hpp"

namespace riltest {

using ScalarFn = std::function<double(std::span<const double>)>;

// First partial wrt `var` by central differences at three step sizes,
// Richardson-extrapolated to O(h^6).
inline double fd_partial1(const ScalarFn& f, std::vector<double> x, int var, double h = 1e-2) {
    auto central = [&](double step) {
        std::vector<double> xp = x, xm = x;
        xp[static_cast<size_t>(var)] += step;
        xm[static_cast<size_t>(var)] -= step;
        return (f(xp) - f(xm)) / (2.0 * step);
    };
    double d1 = central(h), d2 = central(h / 2.0), d3 = central(h / 4.0);
    double r1 = (4.0 * d2 - d1) / 3.0;
    double r2 = (4.0 * d3 - d2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
}

// Mixed partial d^alpha via nested first derivatives.
inline double fd_partial(const ScalarFn& f, std::vector<double> x, std::span<const int> alpha,
                         double h = 1e-2) {
    int total = 0;
    for (int a : alpha) total += a;
    if (total == 0) return f(x);
    std::vector<int> rest(alpha.begin(), alpha.end());
    int var = 0;
    while (rest[static_cast<size_t>(var)] == 0) ++var;
    rest[static_cast<size_t>(var)] -= 1;
    ScalarFn inner = [&f, rest](std::span<const double> y) {
        return fd_partial(f, std::vector<double>(y.begin(), y.end()), rest);
    };
    return fd_partial1(inner, std::move(x), var, h);
}

// Random closed-form expression over {+, *, /, exp, sin}; denominators are
// kept away from zero by dividing by exp of a bounded subexpression.
inline ril::Expr random_expression(ril::SplitMix64& rng, int dim, int depth) {
    using ril::Expr;
    if (depth == 0) {
        if (rng.next() % 3 == 0) return Expr::constant(rng.uniform(-1.5, 1.5));
        return Expr::var(static_cast<int>(rng.next() % static_cast<unsigned>(dim)));
    }
    switch (rng.next() % 5) {
        case 0: return random_expression(rng, dim, depth - 1) + random_expression(rng, dim, depth - 1);
        case 1: return random_expression(rng, dim, depth - 1) * random_expression(rng, dim, depth - 1);
        case 2:
            return random_expression(rng, dim, depth - 1) /
                   exp(random_expression(rng, dim, depth - 1) * 0.25);
        case 3: return exp(random_expression(rng, dim, depth - 1) * 0.5);
        default: return sin(random_expression(rng, dim, depth - 1));
    }
}

// Ricci tensor at p by finite differences on the metric components alone
// (no jets anywhere on this path).
inline ril::Nd fd_ricci(const ril::MetricFamily& fam, std::span<const double> p) {
    const int n = fam.dim;
    std::vector<double> x(p.begin(), p.end());
    auto gfn = [&](std::span<const double> q, int i, int j) { return fam.comp(i, j).eval_d(q); };
    auto ginv_at = [&](std::span<const double> q) {
        ril::Nd g(n, 2), gi(n, 2);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = gfn(q, i, j);
        // Gauss-Jordan
        std::vector<std::vector<double>> a(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(2 * n), 0.0));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) a[i][j] = g(i, j);
            a[i][static_cast<size_t>(n + i)] = 1.0;
        }
        for (int c = 0; c < n; ++c) {
            double piv = a[c][c];
            for (int j = 0; j < 2 * n; ++j) a[c][j] /= piv;
            for (int r = 0; r < n; ++r)
                if (r != c) {
                    double f = a[r][c];
                    for (int j = 0; j < 2 * n; ++j) a[r][j] -= f * a[c][j];
                }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gi(i, j) = a[i][static_cast<size_t>(n + j)];
        return gi;
    };
    auto gamma_at = [&](std::span<const double> q) {
        ril::Nd G(n, 3);
        ril::Nd gi = ginv_at(q);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (int s = 0; s < n; ++s) {
                        ScalarFn gj = [&, j, s](std::span<const double> y) { return gfn(y, j, s); };
                        ScalarFn gi_ = [&, i, s](std::span<const double> y) { return gfn(y, i, s); };
                        ScalarFn gij = [&, i, j](std::span<const double> y) { return gfn(y, i, j); };
                        std::vector<double> qq(q.begin(), q.end());
                        acc += gi(k, s) * (fd_partial1(gj, qq, i) + fd_partial1(gi_, qq, j) - fd_partial1(gij, qq, s));
                    }
                    G(k, i, j) = 0.5 * acc;
                }
        return G;
    };
    ril::Nd G = gamma_at(x);
    ril::Nd ric(n, 2);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            // R_ik = R^j_ijk = d_j Gamma^j_ik - d_i Gamma^j_jk + G G - G G
            for (int j = 0; j < n; ++j) {
                ScalarFn g1 = [&, j, i, k](std::span<const double> y) { return gamma_at(y)(j, i, k); };
                ScalarFn g2 = [&, j, k](std::span<const double> y) { return gamma_at(y)(j, j, k); };
                acc += fd_partial1(g1, x, j, 5e-3) - fd_partial1(g2, x, i, 5e-3);
                for (int m = 0; m < n; ++m) acc += G(m, i, k) * G(j, j, m) - G(m, j, k) * G(j, i, m);
            }
            ric(i, k) = acc;
        }
    return ric;
}

}  // namespace riltest
