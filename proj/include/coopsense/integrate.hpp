#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature over finite segments plus a
// rational stretch for the semi-infinite tails that the SNR-averaging
// integrals need. Used by the numeric-integration oracle and by tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace coopsense {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights on [-1,1] and the embedded 7-point Gauss
// weights (QUADPACK dqk15 constants).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fk[15];
    for (int i = 0; i < 7; ++i) {
        fk[i] = f(mid - half * kGk15Nodes[i]);
        fk[14 - i] = f(mid + half * kGk15Nodes[i]);
    }
    fk[7] = f(mid);
    double kronrod = kGk15WeightsK[7] * fk[7];
    for (int i = 0; i < 7; ++i) kronrod += kGk15WeightsK[i] * (fk[i] + fk[14 - i]);
    // Gauss points are the odd-indexed Kronrod nodes
    double gauss = kGk15WeightsG[3] * fk[7];
    for (int i = 0; i < 3; ++i) gauss += kGk15WeightsG[i] * (fk[2 * i + 1] + fk[13 - 2 * i]);
    value = kronrod * half;
    err = std::fabs((kronrod - gauss) * half);
}

struct Segment {
    double a, b, value, err;
};

}  // namespace detail

// Adaptive bisection on [a,b], splitting the segment with the largest error
// estimate until the summed estimate meets abs_tol (or the segment budget
// runs out, reported through QuadResult::converged).
template <class F>
inline QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                                     std::size_t max_segments = 4000) {
    QuadResult res;
    std::vector<detail::Segment> segs;
    detail::Segment s0{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, s0.value, s0.err);
    res.evaluations += 15;
    segs.push_back(s0);

    while (segs.size() < max_segments) {
        double total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total_err += segs[i].err;
            if (segs[i].err > segs[worst].err) worst = i;
        }
        if (total_err <= abs_tol) break;
        detail::Segment seg = segs[worst];
        if (seg.b - seg.a < 1e-15 * (1.0 + std::fabs(seg.a))) break;  // cannot refine further
        double mid = 0.5 * (seg.a + seg.b);
        detail::Segment left{seg.a, mid, 0.0, 0.0}, right{mid, seg.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        res.evaluations += 30;
        segs[worst] = left;
        segs.push_back(right);
    }

    res.value = 0.0;
    res.error_estimate = 0.0;
    for (const auto& s : segs) {
        res.value += s.value;
        res.error_estimate += s.err;
    }
    res.converged = res.error_estimate <= abs_tol;
    return res;
}

// Integral over [a, inf) via t = a + u/(1-u); the Kronrod nodes never touch
// u = 1, so integrands that decay at infinity pose no evaluation problem.
template <class F>
inline QuadResult integrate_to_infinity(const F& f, double a, double abs_tol,
                                        std::size_t max_segments = 4000) {
    auto g = [&f, a](double u) {
        const double om = 1.0 - u;
        const double t = a + u / om;
        return f(t) / (om * om);
    };
    return integrate_adaptive(g, 0.0, 1.0, abs_tol, max_segments);
}

// [0, inf) split at caller-supplied interior breakpoints (sharp features the
// adaptive pass would otherwise have to discover on its own).
template <class F>
inline QuadResult integrate_half_line(const F& f, double abs_tol,
                                      const std::vector<double>& breakpoints = {},
                                      std::size_t max_segments = 4000) {
    std::vector<double> pts;
    for (double p : breakpoints)
        if (p > 0.0 && std::isfinite(p)) pts.push_back(p);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    QuadResult total;
    double lo = 0.0;
    const double n_parts = static_cast<double>(pts.size() + 1);
    for (double p : pts) {
        QuadResult part = integrate_adaptive(f, lo, p, abs_tol / n_parts, max_segments);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
        lo = p;
    }
    QuadResult tail = integrate_to_infinity(f, lo, abs_tol / n_parts, max_segments);
    total.value += tail.value;
    total.error_estimate += tail.error_estimate;
    total.evaluations += tail.evaluations;
    total.converged = total.error_estimate <= abs_tol;
    return total;
}

}  // namespace coopsense
