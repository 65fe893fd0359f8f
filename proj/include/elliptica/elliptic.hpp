#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>

#include "elliptica/errors.hpp"

namespace elliptica {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline const cplx two_pi_i{0.0, 2.0 * pi};

/// exp(2 pi i x)
inline cplx eu(cplx x) { return std::exp(two_pi_i * x); }

/// Modulus of the elliptic curve C/(Z + tau Z).  Im tau must be positive;
/// we additionally reject Im tau < 0.05 since no modular transformation is
/// implemented and the series route degrades there.
struct Tau {
    cplx value;

    static constexpr double min_im = 0.05;

    explicit Tau(cplx v) : value(v) {
        if (!(v.imag() > 0.0))
            throw DomainError("tau must lie in the upper half-plane");
        if (v.imag() < min_im)
            throw DomainError("Im tau < 0.05 is not supported (no modular transformation)");
    }

    double im() const { return value.imag(); }
};

/// Truncation control for the theta series and the q-series evaluators.
struct ThetaSeriesConfig {
    int max_terms = 200;
    double term_tolerance = 1e-16;

    void validate() const {
        if (max_terms < 8)
            throw ConfigError("ThetaSeriesConfig: max_terms must be >= 8");
        if (!(term_tolerance > 0.0) || term_tolerance > 1e-10)
            throw ConfigError("ThetaSeriesConfig: term_tolerance must be in (0, 1e-10]");
    }
};

// Points on the curve are plain complex numbers; staying off the lattice is
// the caller's (sampler's) responsibility, the evaluators only reject exact
// hits.  See lattice_distance below.

struct ThetaDerivatives {
    cplx th;  // theta(z)
    cplx d1;  // theta'(z)
    cplx d2;  // theta''(z)
    cplx d3;  // theta'''(z)
};

/// Odd theta function theta(z|tau) = sum_k exp(pi i tau (k+1/2)^2
/// + 2 pi i (z+1/2)(k+1/2)) together with its first three z-derivatives,
/// summed symmetrically in k (pairs k = j, -1-j) with the stop rule
/// |pair| < tol * (1 + |partial|) sustained for two consecutive pairs.
inline ThetaDerivatives theta_batch(cplx z, const Tau& tau,
                                    const ThetaSeriesConfig& cfg = {}) {
    cfg.validate();
    ThetaDerivatives acc{0.0, 0.0, 0.0, 0.0};
    int quiet = 0;
    double last = 0.0;
    for (int j = 0; j < cfg.max_terms; ++j) {
        double pair_mag = 0.0;
        for (int k : {j, -1 - j}) {
            const double kk = k + 0.5;
            const cplx e = std::exp(cplx{0.0, pi} * tau.value * (kk * kk) +
                                    two_pi_i * (z + 0.5) * kk);
            const cplx f = two_pi_i * kk;
            acc.th += e;
            acc.d1 += f * e;
            acc.d2 += f * f * e;
            acc.d3 += f * f * f * e;
            pair_mag = std::max(pair_mag, std::abs(e));
        }
        last = pair_mag;
        if (pair_mag < cfg.term_tolerance * (1.0 + std::abs(acc.th))) {
            if (++quiet >= 2) return acc;
        } else {
            quiet = 0;
        }
    }
    throw TruncationError("theta series did not converge within max_terms", last);
}

inline cplx theta(cplx z, const Tau& tau, const ThetaSeriesConfig& cfg = {}) {
    return theta_batch(z, tau, cfg).th;
}

/// (theta'(0), theta'''(0)); theta''(0) vanishes by parity.
inline std::pair<cplx, cplx> theta_derivatives(const Tau& tau,
                                               const ThetaSeriesConfig& cfg = {}) {
    const auto d = theta_batch(0.0, tau, cfg);
    return {d.d1, d.d3};
}

namespace detail {

// Treat |theta(z)| below this relative threshold as an exact lattice hit.
inline void check_pole(const cplx& th_value, const cplx& th_prime0, const char* who) {
    if (std::abs(th_value) < 1e-12 * std::abs(th_prime0))
        throw PoleError(std::string(who) + ": argument on the lattice Z + tau Z");
}

}  // namespace detail

/// First Eisenstein function E1(z) = theta'(z)/theta(z).
inline cplx e1(cplx z, const Tau& tau, const ThetaSeriesConfig& cfg = {}) {
    const auto d = theta_batch(z, tau, cfg);
    detail::check_pole(d.th, theta_batch(0.0, tau, cfg).d1, "e1");
    return d.d1 / d.th;
}

/// Second Eisenstein function E2(z) = -d/dz E1(z) = E1^2 - theta''/theta.
inline cplx e2(cplx z, const Tau& tau, const ThetaSeriesConfig& cfg = {}) {
    const auto d = theta_batch(z, tau, cfg);
    detail::check_pole(d.th, theta_batch(0.0, tau, cfg).d1, "e2");
    const cplx w1 = d.d1 / d.th;
    return w1 * w1 - d.d2 / d.th;
}

/// Weierstrass p-function: E2(z) + theta'''(0) / (3 theta'(0)).
inline cplx wp(cplx z, const Tau& tau, const ThetaSeriesConfig& cfg = {}) {
    const auto d0 = theta_batch(0.0, tau, cfg);
    const auto d = theta_batch(z, tau, cfg);
    detail::check_pole(d.th, d0.d1, "wp");
    const cplx w1 = d.d1 / d.th;
    return w1 * w1 - d.d2 / d.th + d0.d3 / (3.0 * d0.d1);
}

/// d/dz of wp, from the third-order theta derivatives.
inline cplx wp_prime(cplx z, const Tau& tau, const ThetaSeriesConfig& cfg = {}) {
    const auto d0 = theta_batch(0.0, tau, cfg);
    const auto d = theta_batch(z, tau, cfg);
    detail::check_pole(d.th, d0.d1, "wp_prime");
    const cplx w1 = d.d1 / d.th;
    return 3.0 * w1 * (d.d2 / d.th) - 2.0 * w1 * w1 * w1 - d.d3 / d.th;
}

/// Kronecker function phi(z,u) = theta'(0) theta(z+u) / (theta(z) theta(u)).
inline cplx kronecker_phi(cplx z, cplx u, const Tau& tau,
                          const ThetaSeriesConfig& cfg = {}) {
    const auto d0 = theta_batch(0.0, tau, cfg);
    const cplx tz = theta(z, tau, cfg);
    const cplx tu = theta(u, tau, cfg);
    detail::check_pole(tz, d0.d1, "kronecker_phi(z)");
    detail::check_pole(tu, d0.d1, "kronecker_phi(u)");
    return d0.d1 * theta(z + u, tau, cfg) / (tz * tu);
}

/// d/du phi(z,u) = phi(z,u) (E1(z+u) - E1(u)).
inline cplx kronecker_phi_du(cplx z, cplx u, const Tau& tau,
                             const ThetaSeriesConfig& cfg = {}) {
    return kronecker_phi(z, u, tau, cfg) * (e1(z + u, tau, cfg) - e1(u, tau, cfg));
}

/// d/dz phi(z,u) = phi(z,u) (E1(z+u) - E1(z)).
inline cplx kronecker_phi_dz(cplx z, cplx u, const Tau& tau,
                             const ThetaSeriesConfig& cfg = {}) {
    return kronecker_phi(z, u, tau, cfg) * (e1(z + u, tau, cfg) - e1(z, tau, cfg));
}

/// Mixed derivative d^2/dz du of phi, in closed form via E1 and E2.
inline cplx kronecker_phi_dzdu(cplx z, cplx u, const Tau& tau,
                               const ThetaSeriesConfig& cfg = {}) {
    const cplx p = kronecker_phi(z, u, tau, cfg);
    const cplx a = e1(z + u, tau, cfg);
    return p * ((a - e1(z, tau, cfg)) * (a - e1(u, tau, cfg)) - e2(z + u, tau, cfg));
}

/// Kronecker q-series g(s,t|q) = sum_n t^n / (q^n s - 1).
///
/// Summed via the exact partial-fraction rearrangement
///   g = 1/(s-1) - t/(1-t) - s sum_{n>=1} (tq)^n/(1 - q^n s)
///                        + sum_{m>=1} (q/t)^m/(s - q^m),
/// which equals the bilateral sum on |q| < |t| < 1 and extends it
/// continuously to the annulus |q| < |t| < 1/|q| (geometric rates |tq| and
/// |q/t|), so the evaluator also covers the |t| = 1 and |s| = 1 circles that
/// several identities are naturally sampled on.
inline cplx kronecker_q_series(cplx s, cplx t, cplx q,
                               const ThetaSeriesConfig& cfg = {4000, 1e-16}) {
    cfg.validate();
    const double aq = std::abs(q);
    if (!(aq > 0.0) || aq >= 1.0)
        throw DomainError("kronecker_q_series: need 0 < |q| < 1");
    const double at = std::abs(t);
    if (!(at > aq * (1.0 + 1e-9)) || !(at < (1.0 - 1e-9) / aq))
        throw DomainError("kronecker_q_series: |t| outside (|q|, 1/|q|)");
    if (std::abs(s - 1.0) < 1e-12 || std::abs(t - 1.0) < 1e-12)
        throw PoleError("kronecker_q_series: argument at a pole (s=1 or t=1)");

    cplx total = 1.0 / (s - 1.0) - t / (1.0 - t);
    // n >= 1 tail, rate tq
    cplx qn = 1.0, tqn = 1.0;
    const cplx tq = t * q;
    int n = 1;
    for (;; ++n) {
        if (n >= cfg.max_terms)
            throw TruncationError("kronecker_q_series: n-tail did not converge",
                                  std::abs(tqn));
        qn *= q;
        tqn *= tq;
        const cplx den = 1.0 - qn * s;
        if (std::abs(den) < 1e-12)
            throw PoleError("kronecker_q_series: s at a pole q^-n");
        const cplx term = -s * tqn / den;
        total += term;
        if (std::abs(tqn) < cfg.term_tolerance * (1.0 + std::abs(total))) break;
    }
    // m >= 1 tail, rate q/t
    const cplx qot = q / t;
    qn = 1.0;
    cplx qotm = 1.0;
    for (int m = 1;; ++m) {
        if (m >= cfg.max_terms)
            throw TruncationError("kronecker_q_series: m-tail did not converge",
                                  std::abs(qotm));
        qn *= q;
        qotm *= qot;
        const cplx den = s - qn;
        if (std::abs(den) < 1e-12)
            throw PoleError("kronecker_q_series: s at a pole q^m");
        total += qotm / den;
        if (std::abs(qotm) < cfg.term_tolerance * (1.0 + std::abs(total))) break;
    }
    return total;
}

/// phi evaluated through the q-series route: phi(z,u) = 2 pi i g(e(u), e(z) | e(tau)).
inline cplx kronecker_phi_q_route(cplx z, cplx u, const Tau& tau,
                                  const ThetaSeriesConfig& cfg = {4000, 1e-16}) {
    return two_pi_i * kronecker_q_series(eu(u), eu(z), eu(tau.value), cfg);
}

/// Decompose x = x1 + x2 tau with real x1, x2.
inline std::pair<double, double> lattice_coordinates(cplx x, const Tau& tau) {
    const double x2 = x.imag() / tau.im();
    const double x1 = x.real() - x2 * tau.value.real();
    return {x1, x2};
}

/// Euclidean distance from x to the nearest point of Z + tau Z.
inline double lattice_distance(cplx x, const Tau& tau) {
    const auto [c1, c2] = lattice_coordinates(x, tau);
    const double f1 = std::floor(c1), f2 = std::floor(c2);
    double best = std::numeric_limits<double>::infinity();
    for (double a : {f1, f1 + 1.0})
        for (double b : {f2, f2 + 1.0})
            best = std::min(best, std::abs(x - (a + b * tau.value)));
    return best;
}

/// Kronecker double series, symmetric square partial sum
///   S_M(z,u|tau) = sum_{|m|,|n| <= M} e(-m u2 + n u1) / (z + m + n tau),
/// with u = u1 + u2 tau.  Conditionally convergent; approaches
/// e(u2 z) phi(z,u) with O(1/M) error for u2 away from integers (the
/// trivial-character stripe u2 ~ 0 converges to an anomaly-shifted limit).
inline cplx kronecker_double_series(cplx z, cplx u, const Tau& tau, int M) {
    if (M < 1) throw ConfigError("kronecker_double_series: M must be >= 1");
    if (lattice_distance(u, tau) < 1e-12)
        throw PoleError("kronecker_double_series: u on the lattice (phi pole)");
    const auto [u1, u2] = lattice_coordinates(u, tau);
    cplx total = 0.0;
    for (int m = -M; m <= M; ++m) {
        for (int n = -M; n <= M; ++n) {
            const cplx den = z + static_cast<double>(m) + static_cast<double>(n) * tau.value;
            if (std::abs(den) < 1e-12)
                throw PoleError("kronecker_double_series: z on the lattice");
            total += eu(-m * u2 + n * u1) / den;
        }
    }
    return total;
}

}
