#pragma once

// Precision-generic adaptive Gauss-Legendre quadrature used by the J_k evaluator.
// Nodes are generated by Newton iteration in the working type, so the same code serves
// double and quad precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/constants/constants.hpp>

namespace bayesdetect::detail {

template <class Real>
struct GaussRule {
    std::vector<Real> nodes;    // on [-1, 1]
    std::vector<Real> weights;
};

template <class Real>
GaussRule<Real> make_gauss_legendre(int n) {
    using std::abs;
    using std::cos;
    GaussRule<Real> rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const Real pi = boost::math::constants::pi<Real>();
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Real z = cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
        Real dp(0);
        for (int iter = 0; iter < 100; ++iter) {
            Real p0(1), p1 = z;
            for (int j = 2; j <= n; ++j) {
                const Real p2 = ((Real(2 * j - 1)) * z * p1 - Real(j - 1) * p0) / Real(j);
                p0 = p1;
                p1 = p2;
            }
            dp = Real(n) * (z * p1 - p0) / (z * z - Real(1));
            const Real dz = p1 / dp;
            z -= dz;
            if (abs(dz) <= Real(4) * eps) break;
        }
        // Recompute the derivative at the converged node.
        Real p0(1), p1 = z;
        for (int j = 2; j <= n; ++j) {
            const Real p2 = ((Real(2 * j - 1)) * z * p1 - Real(j - 1) * p0) / Real(j);
            p0 = p1;
            p1 = p2;
        }
        dp = Real(n) * (z * p1 - p0) / (z * z - Real(1));
        const Real w = Real(2) / ((Real(1) - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Coarse/fine rule pair; the fine rule's value is kept, their difference is the error estimate.
template <class Real>
struct GaussPair {
    static constexpr int kCoarse = 12;
    static constexpr int kFine = 24;
    GaussRule<Real> coarse = make_gauss_legendre<Real>(kCoarse);
    GaussRule<Real> fine = make_gauss_legendre<Real>(kFine);

    static const GaussPair& instance() {
        static const GaussPair pair;
        return pair;
    }
};

template <class Real>
struct QuadratureResult {
    Real value{0};
    Real error{0};
    int evaluations = 0;
    int intervals = 0;
    bool converged = false;
};

/// Global adaptive integration of a nonnegative-dominated integrand over consecutive
/// breakpoints. Stops when the summed error estimate falls below rel_tol * |value|.
template <class Real, class F>
QuadratureResult<Real> integrate_adaptive(F&& f, std::span<const Real> breakpoints, Real rel_tol,
                                          int max_intervals = 4000) {
    using std::abs;
    const auto& rules = GaussPair<Real>::instance();

    struct Segment {
        Real a, b, value, error;
        bool operator<(const Segment& o) const { return error < o.error; }
    };

    QuadratureResult<Real> out;
    auto eval = [&](Real a, Real b) {
        const Real half = (b - a) / Real(2);
        const Real mid = (b + a) / Real(2);
        Real coarse(0), fine(0);
        for (std::size_t i = 0; i < rules.coarse.nodes.size(); ++i) {
            coarse += rules.coarse.weights[i] * f(mid + half * rules.coarse.nodes[i]);
        }
        for (std::size_t i = 0; i < rules.fine.nodes.size(); ++i) {
            fine += rules.fine.weights[i] * f(mid + half * rules.fine.nodes[i]);
        }
        out.evaluations += static_cast<int>(rules.coarse.nodes.size() + rules.fine.nodes.size());
        return Segment{a, b, fine * half, abs(fine - coarse) * half};
    };

    std::priority_queue<Segment> heap;
    Real total(0), total_err(0);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        Segment s = eval(breakpoints[i], breakpoints[i + 1]);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }

    while (!heap.empty()) {
        if (total_err <= rel_tol * abs(total)) {
            out.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= max_intervals) break;
        const Segment worst = heap.top();
        heap.pop();
        const Real mid = (worst.a + worst.b) / Real(2);
        const Segment left = eval(worst.a, mid);
        const Segment right = eval(mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    if (heap.empty()) out.converged = true;

    // Re-add from the heap to shed accumulated update round-off.
    out.intervals = static_cast<int>(heap.size());
    Real value(0), error(0);
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    if (!out.converged) out.converged = error <= rel_tol * abs(value);
    return out;
}

}  // namespace bayesdetect::detail
