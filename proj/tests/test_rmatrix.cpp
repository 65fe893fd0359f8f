#include <gtest/gtest.h>

#include "elliptica/rmatrix.hpp"

using namespace elliptica;

namespace {

const Tau kTau{cplx{0.0, 0.8}};
const cplx kZ{0.23, 0.11};
const cplx kH{0.17, -0.06};

CMatrix r12(int N, cplx h, cplx z, double guard = 0.05) {
    return quantum_r(1, 2, RParams(N, kTau, h, z), TensorLayout{2, N}, guard);
}

CMatrix r21(int N, cplx h, cplx z, double guard = 0.05) {
    return quantum_r(2, 1, RParams(N, kTau, h, z), TensorLayout{2, N}, guard);
}

}  // namespace

TEST(PhiTwisted, ReducesToPlainPhiAtZero) {
    const cplx u{0.2, 0.0}, v{0.31, 0.12};
    EXPECT_LT(std::abs(phi_twisted({0, 0}, u, v, 2, kTau) - kronecker_phi(u, v, kTau)),
              1e-14);
}

TEST(PhiTwisted, ComposesFromEllipticModule) {
    // N = 2, alpha = (0,1), u = 0.2, hbar = 0.11:
    // e^{2 pi i u / 2} phi(u, tau/2 + 0.11); frozen from the 40-digit oracle
    const cplx got = phi_twisted({0, 1}, 0.2, kTau.value / 2.0 + 0.11, 2, kTau);
    const cplx direct = eu(0.2 * 0.5) * kronecker_phi(0.2, kTau.value / 2.0 + 0.11, kTau);
    EXPECT_LT(std::abs(got - direct), 1e-14);
    EXPECT_LT(std::abs(got - cplx{6.411551797703240906440331, 0.0}), 1e-12);
}

TEST(PhiTwisted, PeriodicityInUForIntegerAlpha2) {
    // u -> u + N leaves phi_twisted invariant (e^{2 pi i alpha_2} = 1)
    const int N = 2;
    const LatticeIndex alpha{1, 1};
    const cplx u{0.2, 0.1}, v{0.31, 0.12};
    EXPECT_LT(std::abs(phi_twisted(alpha, u + static_cast<double>(N), v, N, kTau) -
                       phi_twisted(alpha, u, v, N, kTau)),
              1e-12);
}

TEST(QuantumR, ScalarReductionAtN1) {
    const CMatrix R = r12(1, kH, kZ);
    EXPECT_EQ(R.dim(), 1);
    EXPECT_LT(std::abs(R(0, 0) - kronecker_phi(kZ, kH, kTau)), 1e-13);
}

TEST(QuantumR, ZnZnSymmetry) {
    const int N = 3;
    const CMatrix R = r12(N, kH, kZ);
    for (const CMatrix& g : {gen_q(N), gen_lambda(N)}) {
        const CMatrix gg = kron(g, g);
        EXPECT_LT(max_abs_diff(gg * R * gg.dagger(), R), 1e-11);
    }
}

TEST(QuantumR, Unitarity) {
    for (int N : {1, 2, 3}) {
        const CMatrix lhs = r12(N, kH, kZ) * r21(N, kH, -kZ);
        CMatrix rhs = CMatrix::identity(N * N);
        rhs *= static_cast<double>(N) * N *
               (wp(static_cast<double>(N) * kH, kTau) - wp(kZ, kTau));
        EXPECT_LT(max_abs_diff(lhs, rhs), 1e-11) << "N=" << N;
    }
}

TEST(QuantumR, R21IsPermutationConjugate) {
    const int N = 3;
    const TensorLayout layout{2, N};
    const CMatrix P = permutation_p(1, 2, layout);
    EXPECT_LT(max_abs_diff(r21(N, kH, kZ), P * r12(N, kH, kZ) * P), 1e-12);
}

TEST(QuantumR, HbarGuardRejectsNearPoles) {
    EXPECT_THROW(r12(2, cplx{0.01, 0.0}, kZ), PoleError);          // near -omega_0
    EXPECT_THROW(r12(2, cplx{-0.5, 0.02}, kZ), PoleError);         // near -omega_(1,0)
    EXPECT_NO_THROW(r12(2, cplx{0.01, 0.0}, kZ, 0.0));             // guard disabled
}

TEST(FMatrix, MatchesFiniteDifference) {
    const int N = 2;
    const cplx h{0.11, 0.0}, z{0.23, 0.0};
    const double step = 1e-5;
    CMatrix fd = r12(N, h, z + step);
    fd -= r12(N, h, z - step);
    fd *= 1.0 / (2.0 * step);
    const CMatrix F = f_matrix(1, 2, RParams(N, kTau, h, z), TensorLayout{2, N});
    EXPECT_LT(max_abs_diff(F, fd) / fd.max_abs(), 1e-8);
}

TEST(FMatrix, ScalarReductionAtN1) {
    const CMatrix F = f_matrix(1, 2, RParams(1, kTau, kH, kZ), TensorLayout{2, 1});
    EXPECT_LT(std::abs(F(0, 0) - kronecker_phi_dz(kZ, kH, kTau)), 1e-12);
}

TEST(FMatrix, ParityFromDifferentiatedR08) {
    // F_12^h(z) = F_21^{-h}(-z)
    const int N = 2;
    const TensorLayout layout{2, N};
    const CMatrix lhs = f_matrix(1, 2, RParams(N, kTau, kH, kZ), layout);
    const CMatrix rhs = f_matrix(2, 1, RParams(N, kTau, -kH, -kZ), layout);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-11);
}

TEST(DhQuantumR, MatchesFiniteDifference) {
    const int N = 2;
    const double step = 1e-5;
    CMatrix fd = r12(N, kH + step, kZ);
    fd -= r12(N, kH - step, kZ);
    fd *= 1.0 / (2.0 * step);
    const CMatrix D = dh_quantum_r(1, 2, RParams(N, kTau, kH, kZ), TensorLayout{2, N});
    EXPECT_LT(max_abs_diff(D, fd) / fd.max_abs(), 1e-8);
}

TEST(ClassicalRM, ExpansionCoefficients) {
    // R^h - 1/h - r - h m = O(h^2)
    for (int N : {1, 2}) {
        const TensorLayout layout{2, N};
        const CMatrix r = classical_r(1, 2, kZ, N, kTau, layout);
        const CMatrix m = classical_m(1, 2, kZ, N, kTau, layout);
        auto dev = [&](double h) {
            CMatrix d = r12(N, cplx{h, 0.0}, kZ, 0.0);
            CMatrix eye = CMatrix::identity(N * N);
            eye *= 1.0 / h;
            d -= eye;
            d -= r;
            CMatrix hm = m;
            hm *= h;
            d -= hm;
            return d.max_abs();
        };
        EXPECT_NEAR(std::log2(dev(1e-3) / dev(5e-4)), 2.0, 0.4) << "N=" << N;
    }
}

TEST(ClassicalRM, SquareRelation) {
    // r^2 - 2m = N^2 wp(z) 1
    const int N = 3;
    const TensorLayout layout{2, N};
    const CMatrix r = classical_r(1, 2, kZ, N, kTau, layout);
    CMatrix m2 = classical_m(1, 2, kZ, N, kTau, layout);
    m2 *= 2.0;
    CMatrix rhs = CMatrix::identity(N * N);
    rhs *= static_cast<double>(N * N) * wp(kZ, kTau);
    EXPECT_LT(max_abs_diff(r * r - m2, rhs), 1e-11);
}

TEST(ClassicalRM, QuasiPeriodicityInTau) {
    // r(z + tau) = (L^-1 x 1) r(z) (L x 1) - 2 pi i
    const int N = 2;
    const TensorLayout layout{2, N};
    const CMatrix l = gen_lambda(N);
    const CMatrix eye = CMatrix::identity(N);
    CMatrix rhs = kron(l.dagger(), eye) * classical_r(1, 2, kZ, N, kTau, layout) *
                  kron(l, eye);
    CMatrix shift = CMatrix::identity(N * N);
    shift *= two_pi_i;
    rhs -= shift;
    EXPECT_LT(max_abs_diff(classical_r(1, 2, kZ + kTau.value, N, kTau, layout), rhs),
              1e-11);
}

TEST(RZero, ConstantTermOfZExpansion) {
    for (int N : {1, 2}) {
        const TensorLayout layout{2, N};
        const CMatrix R0 = r_zero(1, 2, kH, N, kTau, layout);
        const CMatrix P = permutation_p(1, 2, layout);
        auto dev = [&](double zz) {
            CMatrix d = r12(N, kH, cplx{zz, 0.0});
            CMatrix p = P;
            p *= static_cast<double>(N) / zz;
            d -= p;
            d -= R0;
            return d.max_abs();
        };
        EXPECT_NEAR(std::log2(dev(1e-2) / dev(5e-3)), 1.0, 0.2) << "N=" << N;
    }
}

TEST(RZero, ScalarReductionAtN1) {
    const CMatrix R0 = r_zero(1, 2, kH, 1, kTau, TensorLayout{2, 1});
    EXPECT_LT(std::abs(R0(0, 0) - e1(kH, kTau)), 1e-13);
}

TEST(RZero, ResidueAtZeroIsNP) {
    const int N = 3;
    const TensorLayout layout{2, N};
    // z R^h(z) -> N P_12 along a shrinking ray
    CMatrix zr = r12(N, kH, cplx{1e-4, 1e-4});
    zr *= cplx{1e-4, 1e-4};
    CMatrix target = permutation_p(1, 2, layout);
    target *= static_cast<double>(N);
    EXPECT_LT(max_abs_diff(zr, target), 1e-2);
    // and the contour quadrature nails it
    CMatrix acc(N * N);
    const int nodes = 64;
    const double rad = 0.24;
    for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * pi * k / nodes;
        const cplx w = rad * cplx{std::cos(th), std::sin(th)};
        CMatrix term = r12(N, kH, w);
        term *= w * (1.0 / nodes);
        acc += term;
    }
    EXPECT_LT(max_abs_diff(acc, target), 1e-11);
}

TEST(ShiftedR, IndexZeroIsUnshifted) {
    const int N = 2;
    EXPECT_LT(max_abs_diff(shifted_r(0, kH, kZ, N, kTau, SlotOrder::s12), r12(N, kH, kZ)),
              1e-14);
    EXPECT_LT(max_abs_diff(shifted_f(0, kH, kZ, N, kTau, SlotOrder::s12),
                           f_matrix(1, 2, RParams(N, kTau, kH, kZ), TensorLayout{2, N})),
              1e-14);
}

TEST(ShiftedR, ShiftedUnitarity) {
    // script-R^{h,a}_12(u) script-R^{h,a}_21(-u) = N^2 (wp(N h) - wp(u + N Omega_a))
    const int N = 3, a = 2;
    const HalfPeriods hp(kTau);
    const CMatrix lhs = shifted_r(a, kH, kZ, N, kTau, SlotOrder::s12) *
                        shifted_r(a, kH, kZ, N, kTau, SlotOrder::s21);
    CMatrix rhs = CMatrix::identity(N * N);
    rhs *= static_cast<double>(N * N) *
           (wp(static_cast<double>(N) * kH, kTau) -
            wp(kZ + static_cast<double>(N) * hp.omega[a], kTau));
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10);
}

TEST(ShiftedR, DerivativeOfShiftedUnitarity) {
    // script-F^{h,a}_12 script-R^{h,a}_21 - script-R^{h,a}_12 script-F^{h,a}_21
    //   = -N^2 wp'(u + N Omega_a)
    const int N = 3, a = 1;
    const HalfPeriods hp(kTau);
    const CMatrix lhs = shifted_f(a, kH, kZ, N, kTau, SlotOrder::s12) *
                            shifted_r(a, kH, kZ, N, kTau, SlotOrder::s21) -
                        shifted_r(a, kH, kZ, N, kTau, SlotOrder::s12) *
                            shifted_f(a, kH, kZ, N, kTau, SlotOrder::s21);
    CMatrix rhs = CMatrix::identity(N * N);
    rhs *= -static_cast<double>(N * N) *
           wp_prime(kZ + static_cast<double>(N) * hp.omega[a], kTau);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10);
}

TEST(ShiftedF, DhMatchesFiniteDifference) {
    const int N = 2, a = 3;
    for (SlotOrder dir : {SlotOrder::s12, SlotOrder::s21}) {
        const double step = 1e-5;
        CMatrix fd = shifted_f(a, kH + step, kZ, N, kTau, dir);
        fd -= shifted_f(a, kH - step, kZ, N, kTau, dir);
        fd *= 1.0 / (2.0 * step);
        const CMatrix an = shifted_f_dh(a, kH, kZ, N, kTau, dir);
        EXPECT_LT(max_abs_diff(an, fd) / fd.max_abs(), 1e-7);
    }
}

TEST(CMLax, QuasiPeriodicityInOneOverN) {
    // L(h + 1/N) = Q^-1 L(h) Q at (n_tilde, N) = (2, 2)
    const CMLaxParams p(2, {cplx{0.3, 0.1}, cplx{-0.2, 0.05}},
                        {cplx{0.21, 0.11}, cplx{0.65, 0.4}}, cplx{0.7, 0.2}, kH, 2, kTau);
    auto shifted = p;
    shifted.hbar += 1.0 / p.N;
    const CMatrix L = cm_lax(p);
    const CMatrix Ls = cm_lax(shifted);
    const CMatrix Q = cm_block_q(p);
    EXPECT_LT(max_abs_diff(Ls, Q.dagger() * L * Q), 1e-10);
}

TEST(CMLax, QuasiPeriodicityInTauOverN) {
    const CMLaxParams p(2, {cplx{0.3, 0.1}, cplx{-0.2, 0.05}},
                        {cplx{0.21, 0.11}, cplx{0.65, 0.4}}, cplx{0.7, 0.2}, kH, 3, kTau);
    auto shifted = p;
    shifted.hbar += kTau.value / static_cast<double>(p.N);
    const CMatrix L = cm_lax(p);
    const CMatrix Ls = cm_lax(shifted);
    const CMatrix Lam = cm_block_lambda(p);
    const CMatrix Z = cm_block_z(p);
    const double invN = 1.0 / p.N;
    const CMatrix lhs = exp_diag(Z, cplx{-invN, 0.0}) * Lam.dagger() * L * Lam *
                        exp_diag(Z, cplx{invN, 0.0});
    EXPECT_LT(max_abs_diff(Ls, lhs), 1e-10);
}

TEST(CMLax, DiagonalAtZeroCoupling) {
    const CMLaxParams p(2, {cplx{0.3, 0.1}, cplx{-0.2, 0.05}},
                        {cplx{0.21, 0.11}, cplx{0.65, 0.4}}, cplx{0.0}, kH, 2, kTau);
    const CMatrix L = cm_lax(p);
    for (int i = 0; i < L.dim(); ++i)
        for (int j = 0; j < L.dim(); ++j) {
            const cplx want = (i != j)             ? cplx{0.0}
                              : (i < p.block_dim()) ? p.momenta[0]
                                                    : p.momenta[1];
            EXPECT_LT(std::abs(L(i, j) - want), 1e-15);
        }
}

TEST(CMLax, BuildingBlockShift) {
    // R_ab^{h + 1/N}(z_a - z_b) = Q_a^-1 R_ab^h(z_a - z_b) Q_b, n_tilde = 2, N = 3
    const int N = 3;
    const TensorLayout layout{2, N};
    const cplx dz = cplx{0.21, 0.11} - cplx{0.65, 0.4};
    const CMatrix R0 = quantum_r(1, 2, RParams(N, kTau, kH, dz), layout);
    const CMatrix R1 = quantum_r(1, 2, RParams(N, kTau, kH + 1.0 / N, dz), layout);
    const CMatrix Qa = tensor_embed(gen_q(N), 1, layout);
    const CMatrix Qb = tensor_embed(gen_q(N), 2, layout);
    EXPECT_LT(max_abs_diff(R1, Qa.dagger() * R0 * Qb), 1e-11);
}

TEST(CMLax, GuardsAndCaps) {
    EXPECT_THROW(
        cm_lax(CMLaxParams(2, {cplx{0.1}, cplx{0.2}}, {cplx{0.2, 0.1}, cplx{0.21, 0.1}},
                           cplx{1.0}, kH, 2, kTau)),
        PoleError);
    CMLaxParams big(2, {cplx{0.1}, cplx{0.2}}, {cplx{0.2, 0.1}, cplx{0.6, 0.3}},
                    cplx{1.0}, kH, 2, kTau);
    big.max_total_dim = 4;
    EXPECT_THROW(cm_lax(big), ConfigError);
    EXPECT_THROW(CMLaxParams(1, {cplx{0.1}}, {cplx{0.2}}, cplx{1.0}, kH, 2, kTau),
                 ConfigError);
}
