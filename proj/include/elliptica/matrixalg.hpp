#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "elliptica/elliptic.hpp"
#include "elliptica/errors.hpp"

namespace elliptica {

/// Index into Z_N x Z_N (stored as plain integers; operations accept any
/// integer representatives and reduce where the algebra requires it).
struct LatticeIndex {
    int a1 = 0;
    int a2 = 0;

    LatticeIndex operator-() const { return {-a1, -a2}; }
    LatticeIndex operator+(const LatticeIndex& o) const { return {a1 + o.a1, a2 + o.a2}; }
    bool is_zero_mod(int N) const {
        auto m = [N](int x) { return ((x % N) + N) % N; };
        return m(a1) == 0 && m(a2) == 0;
    }
};

/// Shape of Mat(N,C)^{otimes n_factors}; slots are 1-based.
struct TensorLayout {
    int n_factors = 2;
    int factor_dim = 2;

    int dim() const {
        int d = 1;
        for (int i = 0; i < n_factors; ++i) d *= factor_dim;
        return d;
    }
    void check_slot(int a) const {
        if (a < 1 || a > n_factors) throw ConfigError("tensor slot out of range");
    }
};

/// Dense square complex matrix, row-major.
class CMatrix {
public:
    CMatrix() : dim_(0) {}
    explicit CMatrix(int dim) : dim_(dim), e_(static_cast<std::size_t>(dim) * dim, cplx{0.0}) {}

    static CMatrix identity(int dim) {
        CMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    cplx& at(int r, int c) { return e_[static_cast<std::size_t>(r) * dim_ + c]; }
    const cplx& at(int r, int c) const { return e_[static_cast<std::size_t>(r) * dim_ + c]; }
    cplx operator()(int r, int c) const { return at(r, c); }

    CMatrix& operator+=(const CMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
        return *this;
    }
    CMatrix& operator*=(cplx c) {
        for (auto& v : e_) v *= c;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator*(cplx c, CMatrix a) { return a *= c; }
    friend CMatrix operator*(CMatrix a, cplx c) { return a *= c; }

    CMatrix operator*(const CMatrix& o) const {
        require_same_dim(o);
        CMatrix out(dim_);
        for (int i = 0; i < dim_; ++i) {
            for (int k = 0; k < dim_; ++k) {
                const cplx aik = at(i, k);
                if (aik == cplx{0.0}) continue;
                const cplx* brow = &o.e_[static_cast<std::size_t>(k) * dim_];
                cplx* orow = &out.e_[static_cast<std::size_t>(i) * dim_];
                for (int j = 0; j < dim_; ++j) orow[j] += aik * brow[j];
            }
        }
        return out;
    }

    /// Adds c * this to acc (no temporary).
    void add_scaled_to(CMatrix& acc, cplx c) const {
        acc.require_same_dim(*this);
        for (std::size_t i = 0; i < e_.size(); ++i) acc.e_[i] += c * e_[i];
    }

    cplx trace() const {
        cplx t = 0.0;
        for (int i = 0; i < dim_; ++i) t += at(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : e_) m = std::max(m, std::abs(v));
        return m;
    }

    CMatrix dagger() const {
        CMatrix out(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) out.at(i, j) = std::conj(at(j, i));
        return out;
    }

private:
    void require_same_dim(const CMatrix& o) const {
        if (dim_ != o.dim_) throw ConfigError("CMatrix dimension mismatch");
    }

    int dim_;
    std::vector<cplx> e_;
};

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    return (a - b).max_abs();
}

/// Scale-normalized residual |a - b| / (1 + |a| + |b|); an identity that
/// holds exactly gives roundoff-level values regardless of how large the
/// two sides grow near the pole guards.
inline double normalized_residual(const cplx& a, const cplx& b) {
    return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

inline double normalized_residual(const CMatrix& a, const CMatrix& b) {
    return (a - b).max_abs() / (1.0 + a.max_abs() + b.max_abs());
}

/// Clock matrix Q_{kl} = delta_{kl} exp(2 pi i k / N), k,l = 1..N.
inline CMatrix gen_q(int N) {
    if (N < 1) throw ConfigError("gen_q: N must be >= 1");
    CMatrix q(N);
    for (int k = 0; k < N; ++k) q.at(k, k) = eu(static_cast<double>(k + 1) / N);
    return q;
}

/// Shift matrix Lambda_{kl} = delta_{k-l+1 = 0 mod N}.
inline CMatrix gen_lambda(int N) {
    if (N < 1) throw ConfigError("gen_lambda: N must be >= 1");
    CMatrix l(N);
    for (int k = 0; k < N; ++k) l.at(k, (k + 1) % N) = 1.0;
    return l;
}

/// kappa_{alpha,beta} = exp((pi i / N)(beta1 alpha2 - beta2 alpha1)),
/// defined for arbitrary integer representatives.
inline cplx kappa(const LatticeIndex& alpha, const LatticeIndex& beta, int N) {
    const double arg = pi / N * (static_cast<double>(beta.a1) * alpha.a2 -
                                 static_cast<double>(beta.a2) * alpha.a1);
    return {std::cos(arg), std::sin(arg)};
}

namespace detail {

inline CMatrix matrix_power(const CMatrix& m, int p) {
    CMatrix out = CMatrix::identity(m.dim());
    for (int i = 0; i < p; ++i) out = out * m;
    return out;
}

}  // namespace detail

/// Sin-algebra basis element T_alpha = exp(pi i a1 a2 / N) Q^{a1} Lambda^{a2}.
/// Out-of-range representatives reduce mod N in the matrix powers while the
/// phase keeps the raw integers, which realizes T_{alpha + N e1} =
/// (-1)^{alpha2} T_alpha and T_{alpha + N e2} = (-1)^{alpha1} T_alpha.
inline CMatrix t_basis(const LatticeIndex& alpha, int N) {
    if (N < 1) throw ConfigError("t_basis: N must be >= 1");
    auto m = [N](int x) { return ((x % N) + N) % N; };
    const double arg = pi * static_cast<double>(alpha.a1) * alpha.a2 / N;
    const cplx phase{std::cos(arg), std::sin(arg)};
    CMatrix t = detail::matrix_power(gen_q(N), m(alpha.a1)) *
                detail::matrix_power(gen_lambda(N), m(alpha.a2));
    return t *= phase;
}

/// Kronecker product; slot 1 is the left (most significant) factor.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    const int da = a.dim(), db = b.dim();
    CMatrix out(da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{0.0}) continue;
            for (int k = 0; k < db; ++k)
                for (int l = 0; l < db; ++l)
                    out.at(i * db + k, j * db + l) = aij * b(k, l);
        }
    return out;
}

/// 1 x ... x m x ... x 1 with m in slot a (1-based).
inline CMatrix tensor_embed(const CMatrix& m, int a, const TensorLayout& layout) {
    layout.check_slot(a);
    if (m.dim() != layout.factor_dim)
        throw ConfigError("tensor_embed: factor dimension mismatch");
    const int N = layout.factor_dim;
    // stride of slot a in the row-major multi-index
    int stride = 1;
    for (int s = layout.n_factors; s > a; --s) stride *= N;
    const int dim = layout.dim();
    CMatrix out(dim);
    for (int r = 0; r < dim; ++r) {
        const int ra = (r / stride) % N;
        const int base = r - ra * stride;
        for (int ca = 0; ca < N; ++ca) {
            const cplx v = m(ra, ca);
            if (v == cplx{0.0}) continue;
            out.at(r, base + ca * stride) = v;
        }
    }
    return out;
}

/// acc += coeff * A_(slot a) * B_(slot b), with A, B single-factor matrices
/// acting on distinct slots.  Equivalent to embedding both and multiplying,
/// but O(dim N^2) and with a fixed accumulation order.
inline void add_two_slot(CMatrix& acc, cplx coeff, const CMatrix& A, const CMatrix& B,
                         int a, int b, const TensorLayout& layout) {
    layout.check_slot(a);
    layout.check_slot(b);
    if (a == b) throw ConfigError("add_two_slot: slots must differ");
    const int N = layout.factor_dim;
    int stride_a = 1, stride_b = 1;
    for (int s = layout.n_factors; s > a; --s) stride_a *= N;
    for (int s = layout.n_factors; s > b; --s) stride_b *= N;
    const int dim = layout.dim();
    for (int r = 0; r < dim; ++r) {
        const int ra = (r / stride_a) % N;
        const int rb = (r / stride_b) % N;
        const int base = r - ra * stride_a - rb * stride_b;
        for (int ca = 0; ca < N; ++ca) {
            const cplx va = A(ra, ca);
            if (va == cplx{0.0}) continue;
            for (int cb = 0; cb < N; ++cb) {
                const cplx vb = B(rb, cb);
                if (vb == cplx{0.0}) continue;
                acc.at(r, base + ca * stride_a + cb * stride_b) += coeff * va * vb;
            }
        }
    }
}

/// Permutation operator P_{ab} swapping slots a and b.
inline CMatrix permutation_p(int a, int b, const TensorLayout& layout) {
    layout.check_slot(a);
    layout.check_slot(b);
    if (a == b) throw ConfigError("permutation_p: slot collision");
    const int N = layout.factor_dim;
    int stride_a = 1, stride_b = 1;
    for (int s = layout.n_factors; s > a; --s) stride_a *= N;
    for (int s = layout.n_factors; s > b; --s) stride_b *= N;
    const int dim = layout.dim();
    CMatrix out(dim);
    for (int r = 0; r < dim; ++r) {
        const int ra = (r / stride_a) % N;
        const int rb = (r / stride_b) % N;
        const int c = r - ra * stride_a - rb * stride_b + rb * stride_a + ra * stride_b;
        out.at(r, c) = 1.0;
    }
    return out;
}

}
