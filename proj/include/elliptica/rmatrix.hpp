#pragma once

#include <array>
#include <complex>
#include <vector>

#include "elliptica/elliptic.hpp"
#include "elliptica/matrixalg.hpp"

namespace elliptica {

/// One Baxter-Belavin R-matrix evaluation point.
struct RParams {
    int N = 2;
    Tau tau;
    cplx hbar;
    cplx z;

    RParams(int n, Tau t, cplx h, cplx zz) : N(n), tau(t), hbar(h), z(zz) {
        if (N < 1) throw ConfigError("RParams: N must be >= 1");
    }
};

/// omega_alpha = (a1 + a2 tau)/N for arbitrary integer representatives.
inline cplx omega_alpha(const LatticeIndex& alpha, int N, const Tau& tau) {
    return (static_cast<double>(alpha.a1) + static_cast<double>(alpha.a2) * tau.value) /
           static_cast<double>(N);
}

/// d/dtau omega_alpha = a2 / N (exact rational from the representative).
inline double omega_alpha_dtau(const LatticeIndex& alpha, int N) {
    return static_cast<double>(alpha.a2) / N;
}

/// phi_alpha(u, v) = exp(2 pi i u a2/N) phi(u, v); the caller supplies
/// v = omega_alpha + hbar.
inline cplx phi_twisted(const LatticeIndex& alpha, cplx u, cplx v, int N, const Tau& tau) {
    return eu(u * omega_alpha_dtau(alpha, N)) * kronecker_phi(u, v, tau);
}

namespace detail {

/// Default guard against hbar sitting too close to a summand pole -omega_mu;
/// residue/expansion style callers pass an explicit smaller guard.
inline void check_hbar_guard(cplx hbar, int N, const Tau& tau, double guard) {
    if (guard <= 0.0) return;
    for (int a1 = 0; a1 < N; ++a1)
        for (int a2 = 0; a2 < N; ++a2)
            if (lattice_distance(hbar + omega_alpha({a1, a2}, N, tau), tau) < guard)
                throw PoleError("R-matrix: hbar within guard distance of a pole -omega_mu");
}

/// Accumulate sum_alpha c(alpha) T_alpha (x) T_{-alpha} over slots (a,b),
/// alpha in lexicographic order for reproducible summation.
template <typename Coeff>
CMatrix assemble(int N, int a, int b, const TensorLayout& layout, Coeff&& coeff) {
    CMatrix acc(layout.dim());
    for (int a1 = 0; a1 < N; ++a1)
        for (int a2 = 0; a2 < N; ++a2) {
            const LatticeIndex alpha{a1, a2};
            const cplx c = coeff(alpha);
            if (c == cplx{0.0}) continue;
            add_two_slot(acc, c, t_basis(alpha, N), t_basis(-alpha, N), a, b, layout);
        }
    return acc;
}

}  // namespace detail

/// Quantum R-matrix R^hbar_{ab}(z) = sum_alpha phi_alpha(z, omega_alpha + hbar)
/// T_alpha^(a) T_{-alpha}^(b) acting on slots a, b of the layout.
inline CMatrix quantum_r(int a, int b, const RParams& p, const TensorLayout& layout,
                         double hbar_guard = 0.05) {
    detail::check_hbar_guard(p.hbar, p.N, p.tau, hbar_guard);
    return detail::assemble(p.N, a, b, layout, [&](const LatticeIndex& alpha) {
        return phi_twisted(alpha, p.z, omega_alpha(alpha, p.N, p.tau) + p.hbar, p.N, p.tau);
    });
}

/// Convenience: R on the standard two-slot layout.
inline CMatrix quantum_r12(const RParams& p, double hbar_guard = 0.05) {
    return quantum_r(1, 2, p, TensorLayout{2, p.N}, hbar_guard);
}

/// F^hbar_{ab}(z) = d/dz R^hbar_{ab}(z), assembled term-wise:
/// d/dz phi_alpha = phi_alpha (2 pi i a2/N + E1(z + v) - E1(z)), v = omega_alpha + hbar.
inline CMatrix f_matrix(int a, int b, const RParams& p, const TensorLayout& layout,
                        double hbar_guard = 0.05) {
    detail::check_hbar_guard(p.hbar, p.N, p.tau, hbar_guard);
    const cplx e1z = e1(p.z, p.tau);
    return detail::assemble(p.N, a, b, layout, [&](const LatticeIndex& alpha) {
        const cplx v = omega_alpha(alpha, p.N, p.tau) + p.hbar;
        return phi_twisted(alpha, p.z, v, p.N, p.tau) *
               (two_pi_i * omega_alpha_dtau(alpha, p.N) + e1(p.z + v, p.tau) - e1z);
    });
}

/// d/dhbar R^hbar_{ab}(z): d/dhbar phi_alpha = phi_alpha (E1(z+v) - E1(v)).
inline CMatrix dh_quantum_r(int a, int b, const RParams& p, const TensorLayout& layout,
                            double hbar_guard = 0.05) {
    detail::check_hbar_guard(p.hbar, p.N, p.tau, hbar_guard);
    return detail::assemble(p.N, a, b, layout, [&](const LatticeIndex& alpha) {
        const cplx v = omega_alpha(alpha, p.N, p.tau) + p.hbar;
        return phi_twisted(alpha, p.z, v, p.N, p.tau) * (e1(p.z + v, p.tau) - e1(v, p.tau));
    });
}

/// d^2/dz dhbar R, the analytic right-hand side of the heat equation
/// 2 pi i d/dtau R = d/dz d/dhbar R.
inline CMatrix dzdh_quantum_r(int a, int b, const RParams& p, const TensorLayout& layout,
                              double hbar_guard = 0.05) {
    detail::check_hbar_guard(p.hbar, p.N, p.tau, hbar_guard);
    const cplx e1z = e1(p.z, p.tau);
    return detail::assemble(p.N, a, b, layout, [&](const LatticeIndex& alpha) {
        const cplx v = omega_alpha(alpha, p.N, p.tau) + p.hbar;
        const cplx e1zv = e1(p.z + v, p.tau);
        return phi_twisted(alpha, p.z, v, p.N, p.tau) *
               ((two_pi_i * omega_alpha_dtau(alpha, p.N) + e1zv - e1z) * (e1zv - e1(v, p.tau)) -
                e2(p.z + v, p.tau));
    });
}

/// Classical r-matrix r_{ab}(z) = E1(z) 1 + sum_{alpha != 0} phi_alpha(z, omega_alpha)
/// T_alpha^(a) T_{-alpha}^(b).
inline CMatrix classical_r(int a, int b, cplx z, int N, const Tau& tau,
                           const TensorLayout& layout) {
    CMatrix acc = CMatrix::identity(layout.dim());
    acc *= e1(z, tau);
    acc += detail::assemble(N, a, b, layout, [&](const LatticeIndex& alpha) -> cplx {
        if (alpha.a1 == 0 && alpha.a2 == 0) return 0.0;
        return phi_twisted(alpha, z, omega_alpha(alpha, N, tau), N, tau);
    });
    return acc;
}

/// Second expansion coefficient m_{ab}(z) of R^hbar(z) around hbar = 0.
inline CMatrix classical_m(int a, int b, cplx z, int N, const Tau& tau,
                           const TensorLayout& layout) {
    CMatrix acc = CMatrix::identity(layout.dim());
    const cplx e1z = e1(z, tau);
    acc *= (e1z * e1z - wp(z, tau)) / 2.0;
    acc += detail::assemble(N, a, b, layout, [&](const LatticeIndex& alpha) -> cplx {
        if (alpha.a1 == 0 && alpha.a2 == 0) return 0.0;
        return eu(z * omega_alpha_dtau(alpha, N)) *
               kronecker_phi_du(z, omega_alpha(alpha, N, tau), tau);
    });
    return acc;
}

/// Constant term of the z-expansion: R^hbar(z) = N P_{ab}/z + R^{hbar,(0)} + O(z).
inline CMatrix r_zero(int a, int b, cplx hbar, int N, const Tau& tau,
                      const TensorLayout& layout, double hbar_guard = 0.05) {
    detail::check_hbar_guard(hbar, N, tau, hbar_guard);
    return detail::assemble(N, a, b, layout, [&](const LatticeIndex& alpha) {
        return e1(hbar + omega_alpha(alpha, N, tau), tau) +
               two_pi_i * omega_alpha_dtau(alpha, N);
    });
}

/// Half periods {0, 1/2, (1+tau)/2, tau/2} with their exact tau-derivatives.
struct HalfPeriods {
    std::array<cplx, 4> omega;
    std::array<double, 4> dtau;

    explicit HalfPeriods(const Tau& tau)
        : omega{cplx{0.0}, cplx{0.5}, (1.0 + tau.value) / 2.0, tau.value / 2.0},
          dtau{0.0, 0.0, 0.5, 0.5} {}
};

enum class SlotOrder { s12, s21 };

/// Half-period shifted blocks of the Painleve Lax pair:
///   script-R^{hbar,a}_{12}(u) = exp( 2 pi i N hbar dOmega_a) R^hbar_{12}(u + N Omega_a)
///   script-R^{hbar,a}_{21}(-u) = exp(-2 pi i N hbar dOmega_a) R^hbar_{21}(-u - N Omega_a)
inline CMatrix shifted_r(int a_index, cplx hbar, cplx u, int N, const Tau& tau,
                         SlotOrder dir, double hbar_guard = 0.05) {
    if (a_index < 0 || a_index > 3) throw ConfigError("shifted_r: a_index in 0..3");
    const HalfPeriods hp(tau);
    const TensorLayout layout{2, N};
    if (dir == SlotOrder::s12) {
        const RParams p(N, tau, hbar, u + static_cast<double>(N) * hp.omega[a_index]);
        return eu(static_cast<double>(N) * hbar * hp.dtau[a_index]) *
               quantum_r(1, 2, p, layout, hbar_guard);
    }
    const RParams p(N, tau, hbar, -u - static_cast<double>(N) * hp.omega[a_index]);
    return eu(-static_cast<double>(N) * hbar * hp.dtau[a_index]) *
           quantum_r(2, 1, p, layout, hbar_guard);
}

/// Same phases and arguments with F in place of R.
inline CMatrix shifted_f(int a_index, cplx hbar, cplx u, int N, const Tau& tau,
                         SlotOrder dir, double hbar_guard = 0.05) {
    if (a_index < 0 || a_index > 3) throw ConfigError("shifted_f: a_index in 0..3");
    const HalfPeriods hp(tau);
    const TensorLayout layout{2, N};
    if (dir == SlotOrder::s12) {
        const RParams p(N, tau, hbar, u + static_cast<double>(N) * hp.omega[a_index]);
        return eu(static_cast<double>(N) * hbar * hp.dtau[a_index]) *
               f_matrix(1, 2, p, layout, hbar_guard);
    }
    const RParams p(N, tau, hbar, -u - static_cast<double>(N) * hp.omega[a_index]);
    return eu(-static_cast<double>(N) * hbar * hp.dtau[a_index]) *
           f_matrix(2, 1, p, layout, hbar_guard);
}

/// d/dhbar of the shifted F block (for the analytic dM/dhbar route):
/// differentiates both the exp(+-2 pi i N hbar dOmega_a) phase and
/// F^hbar(arg) itself, with d/dhbar F = d_z d_hbar R.
inline CMatrix shifted_f_dh(int a_index, cplx hbar, cplx u, int N, const Tau& tau,
                            SlotOrder dir, double hbar_guard = 0.05) {
    if (a_index < 0 || a_index > 3) throw ConfigError("shifted_f_dh: a_index in 0..3");
    const HalfPeriods hp(tau);
    const TensorLayout layout{2, N};
    const double sgn = (dir == SlotOrder::s12) ? 1.0 : -1.0;
    const int sa = (dir == SlotOrder::s12) ? 1 : 2;
    const int sb = (dir == SlotOrder::s12) ? 2 : 1;
    const cplx arg = sgn * (u + static_cast<double>(N) * hp.omega[a_index]);
    const RParams p(N, tau, hbar, arg);
    const cplx phase = eu(sgn * static_cast<double>(N) * hbar * hp.dtau[a_index]);
    const cplx dphase = phase * two_pi_i * sgn * static_cast<double>(N) * hp.dtau[a_index];
    CMatrix out = dzdh_quantum_r(sa, sb, p, layout, hbar_guard);
    out *= phase;
    f_matrix(sa, sb, p, layout, hbar_guard).add_scaled_to(out, dphase);
    return out;
}

/// Parameters of the R-matrix-valued Calogero-Moser Lax matrix.
struct CMLaxParams {
    int n_tilde = 2;
    std::vector<cplx> momenta;
    std::vector<cplx> positions;
    cplx nu;
    cplx hbar;
    int N = 2;
    Tau tau;

    // ntilde * N^ntilde above this size is rejected.
    int max_total_dim = 4096;

    CMLaxParams(int nt, std::vector<cplx> p, std::vector<cplx> z, cplx coupling,
                cplx h, int n, Tau t)
        : n_tilde(nt), momenta(std::move(p)), positions(std::move(z)), nu(coupling),
          hbar(h), N(n), tau(t) {
        if (n_tilde < 2) throw ConfigError("CMLaxParams: n_tilde must be >= 2");
        if (static_cast<int>(momenta.size()) != n_tilde ||
            static_cast<int>(positions.size()) != n_tilde)
            throw ConfigError("CMLaxParams: momenta/positions must have n_tilde entries");
    }

    TensorLayout layout() const { return TensorLayout{n_tilde, N}; }
    int block_dim() const { return layout().dim(); }
    int total_dim() const { return n_tilde * block_dim(); }

    void check_poles(double guard) const {
        if (total_dim() > max_total_dim)
            throw ConfigError("CMLaxParams: n_tilde * N^n_tilde exceeds the size cap");
        for (int a = 0; a < n_tilde; ++a)
            for (int b = 0; b < n_tilde; ++b)
                if (a != b && lattice_distance(positions[a] - positions[b], tau) < guard)
                    throw PoleError("CMLaxParams: positions collide mod lattice");
    }
};

namespace detail {

inline void place_block(CMatrix& big, const CMatrix& blk, int a, int b, int bdim) {
    for (int i = 0; i < bdim; ++i)
        for (int j = 0; j < bdim; ++j)
            big.at(a * bdim + i, b * bdim + j) = blk(i, j);
}

}  // namespace detail

/// L_{ab}(hbar) = delta_{ab} p_a 1 + nu (1-delta_{ab}) R^hbar_{ab}(z_a - z_b),
/// laid out slot-major: particle index outer, tensor space inner.
inline CMatrix cm_lax(const CMLaxParams& p, double pole_guard = 0.05) {
    p.check_poles(pole_guard);
    const auto layout = p.layout();
    const int bdim = p.block_dim();
    CMatrix big(p.total_dim());
    for (int a = 0; a < p.n_tilde; ++a) {
        for (int b = 0; b < p.n_tilde; ++b) {
            if (a == b) {
                CMatrix blk = CMatrix::identity(bdim);
                blk *= p.momenta[a];
                detail::place_block(big, blk, a, b, bdim);
            } else {
                const RParams rp(p.N, p.tau, p.hbar, p.positions[a] - p.positions[b]);
                CMatrix blk = quantum_r(a + 1, b + 1, rp, layout);
                blk *= p.nu;
                detail::place_block(big, blk, a, b, bdim);
            }
        }
    }
    return big;
}

namespace detail {

inline CMatrix cm_block_diag(const CMLaxParams& p, const CMatrix& factor) {
    const auto layout = p.layout();
    const int bdim = p.block_dim();
    CMatrix big(p.total_dim());
    for (int a = 0; a < p.n_tilde; ++a)
        place_block(big, tensor_embed(factor, a + 1, layout), a, a, bdim);
    return big;
}

}  // namespace detail

/// Block-diagonal script-Q = diag_a( Q embedded in slot a ).
inline CMatrix cm_block_q(const CMLaxParams& p) {
    return detail::cm_block_diag(p, gen_q(p.N));
}

/// Block-diagonal script-Lambda.
inline CMatrix cm_block_lambda(const CMLaxParams& p) {
    return detail::cm_block_diag(p, gen_lambda(p.N));
}

/// Block-diagonal script-Z = 2 pi i diag_a( z_a 1 ).  The 2 pi i makes the
/// quasi-periodicity L(hbar + tau/N) = exp(-Z/N) Lambda^{-1} L Lambda exp(Z/N)
/// exact, matching the per-block factor exp(-2 pi i (z_a - z_b)/N).
inline CMatrix cm_block_z(const CMLaxParams& p) {
    const int bdim = p.block_dim();
    CMatrix big(p.total_dim());
    for (int a = 0; a < p.n_tilde; ++a)
        for (int i = 0; i < bdim; ++i)
            big.at(a * bdim + i, a * bdim + i) = two_pi_i * p.positions[a];
    return big;
}

/// exp(c * D) for a diagonal matrix D.
inline CMatrix exp_diag(const CMatrix& d, cplx c) {
    CMatrix out(d.dim());
    for (int i = 0; i < d.dim(); ++i) out.at(i, i) = std::exp(c * d(i, i));
    return out;
}

}
