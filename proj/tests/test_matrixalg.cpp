#include <gtest/gtest.h>

#include "elliptica/matrixalg.hpp"
#include "elliptica/rng.hpp"

using namespace elliptica;

namespace {

CMatrix mat_pow(const CMatrix& m, int p) {
    CMatrix out = CMatrix::identity(m.dim());
    for (int i = 0; i < p; ++i) out = out * m;
    return out;
}

CMatrix random_matrix(int dim, Rng& rng) {
    CMatrix m(dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            m.at(i, j) = cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return m;
}

}  // namespace

TEST(Heisenberg, ClockShiftRelation) {
    // exp(2 pi i g1 g2 / N) Q^g1 L^g2 = L^g2 Q^g1
    const int N = 3, g1 = 1, g2 = 2;
    const CMatrix lhs = eu(static_cast<double>(g1) * g2 / N) *
                        (mat_pow(gen_q(N), g1) * mat_pow(gen_lambda(N), g2));
    const CMatrix rhs = mat_pow(gen_lambda(N), g2) * mat_pow(gen_q(N), g1);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-14);
}

TEST(Heisenberg, RelationHoldsForAllGammaAndN) {
    for (int N = 1; N <= 5; ++N) {
        const CMatrix Q = gen_q(N), L = gen_lambda(N);
        for (int g1 = 0; g1 < N; ++g1)
            for (int g2 = 0; g2 < N; ++g2) {
                const CMatrix lhs = eu(static_cast<double>(g1) * g2 / N) *
                                    (mat_pow(Q, g1) * mat_pow(L, g2));
                EXPECT_LT(max_abs_diff(lhs, mat_pow(L, g2) * mat_pow(Q, g1)), 1e-13);
            }
    }
}

TEST(Heisenberg, TrivialAndPowers) {
    EXPECT_LT(max_abs_diff(gen_q(1), CMatrix::identity(1)), 1e-15);
    EXPECT_LT(max_abs_diff(gen_lambda(1), CMatrix::identity(1)), 1e-15);
    const int N = 4;
    EXPECT_LT(max_abs_diff(mat_pow(gen_q(N), N), CMatrix::identity(N)), 1e-13);
    EXPECT_LT(max_abs_diff(mat_pow(gen_lambda(N), N), CMatrix::identity(N)), 1e-13);
}

TEST(SinAlgebra, ProductRule) {
    // T_a T_b = kappa_{a,b} T_{a+b} for N = 3, a = (1,0), b = (0,2)
    const int N = 3;
    const LatticeIndex a{1, 0}, b{0, 2};
    const CMatrix lhs = t_basis(a, N) * t_basis(b, N);
    const CMatrix rhs = kappa(a, b, N) * t_basis(a + b, N);
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-14);
}

TEST(SinAlgebra, ProductRuleExhaustive) {
    for (int N = 1; N <= 4; ++N)
        for (int a1 = 0; a1 < N; ++a1)
            for (int a2 = 0; a2 < N; ++a2)
                for (int b1 = 0; b1 < N; ++b1)
                    for (int b2 = 0; b2 < N; ++b2) {
                        const LatticeIndex a{a1, a2}, b{b1, b2};
                        EXPECT_LT(max_abs_diff(t_basis(a, N) * t_basis(b, N),
                                               kappa(a, b, N) * t_basis(a + b, N)),
                                  1e-13);
                    }
}

TEST(SinAlgebra, IdentityAtZero) {
    for (int N : {1, 2, 3, 5})
        EXPECT_LT(max_abs_diff(t_basis({0, 0}, N), CMatrix::identity(N)), 1e-15);
}

TEST(SinAlgebra, TraceOfProduct) {
    // tr(T_{(1,2)} T_{(-1,-2)}) = 3 for N = 3
    const int N = 3;
    const cplx tr = (t_basis({1, 2}, N) * t_basis({-1, -2}, N)).trace();
    EXPECT_LT(std::abs(tr - 3.0), 1e-13);
}

TEST(SinAlgebra, TracePairingWithWrapPhase) {
    // tr(T_a T_b) = N kappa_{a,b} (-1)^{N j1 j2} delta_{a+b = 0 mod N},
    // j_i = [a_i + b_i == N]; the corner phase only bites for odd N.
    for (int N : {2, 3}) {
        for (int a1 = 0; a1 < N; ++a1)
            for (int a2 = 0; a2 < N; ++a2)
                for (int b1 = 0; b1 < N; ++b1)
                    for (int b2 = 0; b2 < N; ++b2) {
                        const LatticeIndex a{a1, a2}, b{b1, b2};
                        const cplx tr = (t_basis(a, N) * t_basis(b, N)).trace();
                        cplx want = 0.0;
                        if ((a + b).is_zero_mod(N)) {
                            const int j1 = (a1 + b1 == N) ? 1 : 0;
                            const int j2 = (a2 + b2 == N) ? 1 : 0;
                            const double sgn = (N * j1 * j2) % 2 ? -1.0 : 1.0;
                            want = static_cast<double>(N) * kappa(a, b, N) * sgn;
                        }
                        EXPECT_LT(std::abs(tr - want), 1e-12);
                        EXPECT_NEAR(std::abs(tr),
                                    (a + b).is_zero_mod(N) ? static_cast<double>(N) : 0.0,
                                    1e-12);
                    }
    }
}

TEST(SinAlgebra, OutOfRangeReduction) {
    // T_{alpha + N e1} = (-1)^{alpha2} T_alpha etc., against direct products
    const int N = 3;
    const LatticeIndex a{1, 2};
    EXPECT_LT(max_abs_diff(t_basis({a.a1 + N, a.a2}, N),
                           ((a.a2 % 2) ? cplx{-1.0} : cplx{1.0}) * t_basis(a, N)),
              1e-13);
    EXPECT_LT(max_abs_diff(t_basis({a.a1, a.a2 + N}, N),
                           ((a.a1 % 2) ? cplx{-1.0} : cplx{1.0}) * t_basis(a, N)),
              1e-13);
    // negative representatives still satisfy the product rule
    const LatticeIndex na{-1, -2};
    EXPECT_LT(max_abs_diff(t_basis(na, N) * t_basis(a, N),
                           kappa(na, a, N) * t_basis(na + a, N)),
              1e-13);
}

TEST(Kappa, BasicProperties) {
    const int N = 5;
    const LatticeIndex a{2, 1}, g{3, 4};
    EXPECT_LT(std::abs(kappa(a, {0, 0}, N) - 1.0), 1e-15);
    EXPECT_LT(std::abs(kappa(a, a, N) - 1.0), 1e-15);
    EXPECT_NEAR(std::abs(kappa(a, g, N)), 1.0, 1e-15);
    EXPECT_LT(std::abs(kappa(a, g, N) - std::conj(kappa(g, a, N))), 1e-15);
    // kappa_{alpha,gamma} = kappa_{alpha,alpha+gamma}
    EXPECT_LT(std::abs(kappa(a, g, N) - kappa(a, a + g, N)), 1e-15);
}

TEST(Kappa, SquareSumIdentity) {
    // sum_alpha kappa^2_{alpha,gamma} = N^2 delta_{gamma,0}, N = 1..5
    for (int N = 1; N <= 5; ++N) {
        for (int g1 = 0; g1 < N; ++g1)
            for (int g2 = 0; g2 < N; ++g2) {
                cplx sum = 0.0;
                for (int a1 = 0; a1 < N; ++a1)
                    for (int a2 = 0; a2 < N; ++a2) {
                        const cplx k = kappa({a1, a2}, {g1, g2}, N);
                        sum += k * k;
                    }
                const cplx want =
                    (g1 == 0 && g2 == 0) ? cplx{static_cast<double>(N * N)} : cplx{0.0};
                EXPECT_LT(std::abs(sum - want), 1e-13);
            }
    }
}

TEST(TensorOps, KronOfIdentitiesAndAssociativity) {
    Rng rng(11);
    EXPECT_LT(max_abs_diff(kron(CMatrix::identity(2), CMatrix::identity(3)),
                           CMatrix::identity(6)),
              1e-15);
    const CMatrix A = random_matrix(2, rng), B = random_matrix(2, rng),
                  C = random_matrix(2, rng);
    EXPECT_LT(max_abs_diff(kron(kron(A, B), C), kron(A, kron(B, C))), 1e-13);
    // mixed-product property
    EXPECT_LT(max_abs_diff(kron(A * B, C * C), kron(A, C) * kron(B, C)), 1e-12);
}

TEST(TensorOps, DisjointSlotEmbeddingsCommute) {
    Rng rng(7);
    const TensorLayout layout{3, 2};
    const CMatrix X = random_matrix(2, rng), Y = random_matrix(2, rng);
    const CMatrix ex = tensor_embed(X, 1, layout), ey = tensor_embed(Y, 2, layout);
    EXPECT_LT(max_abs_diff(ex * ey, ey * ex), 1e-13);
    // embed matches kron at the edges
    EXPECT_LT(max_abs_diff(tensor_embed(X, 1, layout),
                           kron(kron(X, CMatrix::identity(2)), CMatrix::identity(2))),
              1e-14);
    EXPECT_LT(max_abs_diff(tensor_embed(Y, 3, layout),
                           kron(kron(CMatrix::identity(2), CMatrix::identity(2)), Y)),
              1e-14);
}

TEST(TensorOps, TwoSlotAccumulateMatchesEmbedProduct) {
    Rng rng(23);
    const TensorLayout layout{3, 3};
    const CMatrix A = random_matrix(3, rng), B = random_matrix(3, rng);
    CMatrix acc(layout.dim());
    add_two_slot(acc, cplx{0.7, -0.2}, A, B, 1, 3, layout);
    const CMatrix want =
        cplx{0.7, -0.2} * (tensor_embed(A, 1, layout) * tensor_embed(B, 3, layout));
    EXPECT_LT(max_abs_diff(acc, want), 1e-13);
    // also on swapped slot order
    CMatrix acc2(layout.dim());
    add_two_slot(acc2, cplx{1.0}, A, B, 3, 1, layout);
    const CMatrix want2 = tensor_embed(A, 3, layout) * tensor_embed(B, 1, layout);
    EXPECT_LT(max_abs_diff(acc2, want2), 1e-13);
}

TEST(TensorOps, DimensionGuards) {
    const TensorLayout layout{2, 2};
    EXPECT_THROW(tensor_embed(CMatrix::identity(3), 1, layout), ConfigError);
    EXPECT_THROW(tensor_embed(CMatrix::identity(2), 3, layout), ConfigError);
    EXPECT_THROW(CMatrix::identity(2) * CMatrix::identity(3), ConfigError);
}

TEST(Permutation, SquaresToIdentityAndEntrywiseForm) {
    const TensorLayout l3{2, 3};
    const CMatrix P = permutation_p(1, 2, l3);
    EXPECT_LT(max_abs_diff(P * P, CMatrix::identity(9)), 1e-14);

    // P_12 = sum_ij E_ij (x) E_ji, entrywise, N = 2
    const TensorLayout l2{2, 2};
    const CMatrix P2 = permutation_p(1, 2, l2);
    CMatrix want(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CMatrix eij(2), eji(2);
            eij.at(i, j) = 1.0;
            eji.at(j, i) = 1.0;
            want += kron(eij, eji);
        }
    EXPECT_LT(max_abs_diff(P2, want), 1e-15);

    // P (v x w) = w x v for random vectors, N = 4
    Rng rng(5);
    const int N = 4;
    const TensorLayout l4{2, N};
    const CMatrix P4 = permutation_p(1, 2, l4);
    std::vector<cplx> v(N), w(N), vw(N * N), wv(N * N);
    for (int i = 0; i < N; ++i) {
        v[i] = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        w[i] = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            vw[i * N + j] = v[i] * w[j];
            wv[i * N + j] = w[i] * v[j];
        }
    for (int r = 0; r < N * N; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < N * N; ++c) acc += P4(r, c) * vw[c];
        EXPECT_LT(std::abs(acc - wv[r]), 1e-13);
    }
    EXPECT_THROW(permutation_p(1, 1, l4), ConfigError);
}

TEST(Permutation, SinAlgebraResolution) {
    // P_12 = (1/N) sum_alpha T_alpha (x) T_{-alpha}, N = 2
    const int N = 2;
    const TensorLayout layout{2, N};
    CMatrix acc(N * N);
    for (int a1 = 0; a1 < N; ++a1)
        for (int a2 = 0; a2 < N; ++a2)
            acc += kron(t_basis({a1, a2}, N), t_basis({-a1, -a2}, N));
    acc *= 1.0 / N;
    EXPECT_LT(max_abs_diff(acc, permutation_p(1, 2, layout)), 1e-14);
}

TEST(Permutation, ConjugationSymmetry) {
    // (g x g) P (g^-1 x g^-1) = P for g in {Q, Lambda}
    for (int N : {2, 3}) {
        const TensorLayout layout{2, N};
        const CMatrix P = permutation_p(1, 2, layout);
        for (const CMatrix& g : {gen_q(N), gen_lambda(N)}) {
            const CMatrix gg = kron(g, g);
            EXPECT_LT(max_abs_diff(gg * P * gg.dagger(), P), 1e-13);
        }
    }
}
