// Usage example: build the 2N^2 Lax pair, integrate a short stretch of the
// Painleve VI flow and watch the monodromy-preservation residual.

#include <cstdio>

#include "elliptica/painleve.hpp"

using namespace elliptica;

int main() {
    const Tau tau0{cplx{0.0, 0.9}};
    PVIConstants c;
    c.nu = {cplx{0.1}, cplx{0.2}, cplx{0.3}, cplx{0.4}};
    const PVIState s0{0.31 + 0.14 * tau0.value, cplx{0.05}, tau0};

    const int N = 3;
    const LaxPairEval lm = build_lax(s0, c, cplx{0.17, 0.11}, N);
    std::printf("Lax pair size: %d x %d, tr L = %.2e\n", lm.L.dim(), lm.L.dim(),
                std::abs(lm.L.trace()));

    const Trajectory traj = integrate(s0, c, cplx{0.0, 1.2}, {}, N);
    std::printf("integrated %zu steps, halted = %s\n", traj.points.size() - 1,
                traj.halted ? "yes" : "no");
    for (std::size_t i = 0; i < traj.points.size(); i += traj.points.size() / 8) {
        const auto& pt = traj.points[i];
        const double r =
            monodromy_residual(PVIState{pt.u, pt.v, Tau(pt.tau)}, c, cplx{0.17, 0.11}, N);
        std::printf("  Im tau = %.4f  u = %+.6f%+.6fi  residual = %.3e\n",
                    pt.tau.imag(), pt.u.real(), pt.u.imag(), r);
    }
    return 0;
}
