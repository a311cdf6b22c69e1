#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace zml {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss–Legendre rule of the given order, nodes by Newton iteration on the
/// Legendre recurrence.
inline GaussRule gauss_legendre(std::size_t order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t m = (order + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(order) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 1; j <= order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / static_cast<double>(j);
            }
            dp = static_cast<double>(order) * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

inline const GaussRule& gauss_legendre_16() {
    static const GaussRule rule = gauss_legendre(16);
    return rule;
}

template <class F>
double gauss_apply(const GaussRule& rule, F&& f, double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t subintervals = 0;
};

/// Adaptive bisection with a fixed Gauss rule. A piece is accepted when the
/// whole-piece and two-half estimates agree to `abs_tol + rel_tol*|value|`;
/// the accepted value is the two-half one and the error is their difference.
template <class F>
QuadResult adaptive_gauss(const GaussRule& rule, F&& f, double a, double b, double rel_tol, double abs_tol,
                          int max_depth, int min_depth = 0) {
    QuadResult out;
    struct Piece {
        double a, b, whole;
        int depth;
    };
    std::vector<Piece> stack;
    stack.push_back({a, b, gauss_apply(rule, f, a, b), 0});
    out.evaluations += rule.nodes.size();
    while (!stack.empty()) {
        const Piece piece = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (piece.a + piece.b);
        const double left = gauss_apply(rule, f, piece.a, mid);
        const double right = gauss_apply(rule, f, mid, piece.b);
        out.evaluations += 2 * rule.nodes.size();
        const double refined = left + right;
        const double diff = std::abs(refined - piece.whole);
        const double width_share = (piece.b - piece.a) / (b - a);
        const bool converged = diff <= rel_tol * std::abs(refined) + abs_tol * width_share;
        if ((converged && piece.depth >= min_depth) || piece.depth >= max_depth) {
            out.value += refined;
            out.error += diff;
            ++out.subintervals;
        } else {
            stack.push_back({mid, piece.b, right, piece.depth + 1});
            stack.push_back({piece.a, mid, left, piece.depth + 1});
        }
    }
    return out;
}

/// General-purpose adaptive Gauss–Kronrod (61-point) integration; accepts
/// infinite limits.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol = 1e-13, unsigned max_depth = 15) {
    QuadResult out;
    double err = 0.0;
    out.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, tol, &err);
    out.error = err;
    return out;
}

/// Integral over several breakpoint-delimited pieces, for piecewise-smooth
/// integrands.
template <class F>
QuadResult integrate_pieces(F&& f, const std::vector<double>& breaks, double tol = 1e-13) {
    QuadResult out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const auto piece = integrate(f, breaks[i], breaks[i + 1], tol);
        out.value += piece.value;
        out.error += piece.error;
    }
    return out;
}

}  // namespace zml
