// Minimal usage example: evaluate the Kronecker function and its relatives
// at a point, and confirm one Fay identity by hand.

#include <cstdio>

#include "elliptica/elliptic.hpp"

using namespace elliptica;

int main() {
    const Tau tau{cplx{0.0, 0.8}};
    const cplx z{0.2, 0.0}, u{0.3, 0.0};

    const cplx phi = kronecker_phi(z, u, tau);
    std::printf("phi(%.2f, %.2f | 0.8i)  = %.15f %+.15fi\n", z.real(), u.real(),
                phi.real(), phi.imag());
    std::printf("E1(z)                  = %.15f %+.15fi\n", e1(z, tau).real(),
                e1(z, tau).imag());
    std::printf("wp(z)                  = %.15f %+.15fi\n", wp(z, tau).real(),
                wp(z, tau).imag());
    std::printf("q-series route         = %.15f %+.15fi\n",
                kronecker_phi_q_route(z, u, tau).real(),
                kronecker_phi_q_route(z, u, tau).imag());

    // phi(x,z) phi(x,-z) = wp(x) - wp(z)
    const cplx x{0.41, 0.21};
    const cplx lhs = kronecker_phi(x, z, tau) * kronecker_phi(x, -z, tau);
    const cplx rhs = wp(x, tau) - wp(z, tau);
    std::printf("Fay degeneration check: |lhs - rhs| = %.3e\n", std::abs(lhs - rhs));
    return 0;
}
