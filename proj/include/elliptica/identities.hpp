#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "elliptica/painleve.hpp"
#include "elliptica/rng.hpp"

namespace elliptica {

/// Deterministic sampling plan; identical plans produce identical streams.
struct SamplePlan {
    std::uint64_t seed = 42;
    int count = 50;
    std::vector<int> N_list{1, 2, 3};
    std::vector<Tau> tau_list{Tau(cplx{0.0, 0.8})};
    double pole_guard = 0.05;

    void validate() const {
        if (count < 1) throw ConfigError("SamplePlan: count must be >= 1");
        if (N_list.empty()) throw ConfigError("SamplePlan: N_list must not be empty");
        if (tau_list.empty()) throw ConfigError("SamplePlan: tau_list must not be empty");
        if (!(pole_guard >= 0.0) || pole_guard > 0.4)
            throw ConfigError("SamplePlan: pole_guard must be in [0, 0.4]");
        for (int n : N_list)
            if (n < 1 || n > 8) throw ConfigError("SamplePlan: N must be in 1..8");
    }
};

/// Full parameter record of one evaluated sample (reproducibility contract).
struct SampleRecord {
    int index = -1;
    int N = 0;
    cplx tau;
    std::vector<std::pair<std::string, cplx>> params;
};

/// Hands a check its random parameters, records everything it draws, and
/// answers pole-guard queries.  A check returning nullopt asks for a
/// resample; the RNG stream continues, so retries stay deterministic.
class Sampler {
public:
    Sampler(Rng& rng, int N, const Tau& tau, double guard, int index)
        : rng_(rng), N_(N), tau_(tau), guard_(guard) {
        record.index = index;
        record.N = N;
        record.tau = tau.value;
    }

    int N() const { return N_; }
    const Tau& tau() const { return tau_; }
    double guard() const { return guard_; }
    int index() const { return record.index; }

    /// Uniform in the rectangle [0,1) + [0, Im tau) i.
    cplx draw(const std::string& name) {
        const cplx v = rng_.complex_in_rect(0.0, 1.0, 0.0, tau_.im());
        record.params.emplace_back(name, v);
        return v;
    }

    /// Uniform with the imaginary part restricted to [lo,hi] * Im tau.
    cplx draw_im_band(const std::string& name, double lo, double hi) {
        const cplx v = rng_.complex_in_rect(0.0, 1.0, lo * tau_.im(), hi * tau_.im());
        record.params.emplace_back(name, v);
        return v;
    }

    double draw_real(const std::string& name, double lo, double hi) {
        const double v = rng_.uniform(lo, hi);
        record.params.emplace_back(name, cplx{v, 0.0});
        return v;
    }

    int draw_index(const std::string& name, int n) {
        const int v = static_cast<int>(rng_.pick_index(static_cast<std::size_t>(n)));
        record.params.emplace_back(name, cplx{static_cast<double>(v), 0.0});
        return v;
    }

    /// Record a derived parameter without drawing.
    void note(const std::string& name, cplx value) {
        record.params.emplace_back(name, value);
    }

    /// All listed arguments at least pole_guard away from the lattice.
    bool ok(std::initializer_list<cplx> args) const {
        for (const cplx& a : args)
            if (lattice_distance(a, tau_) < guard_) return false;
        return true;
    }

    /// omega_alpha + h off-lattice for every alpha in Z_N x Z_N.
    bool ok_hbar(cplx h) const {
        for (int a1 = 0; a1 < N_; ++a1)
            for (int a2 = 0; a2 < N_; ++a2)
                if (lattice_distance(h + omega_alpha({a1, a2}, N_, tau_), tau_) < guard_)
                    return false;
        return true;
    }

    SampleRecord record;

private:
    Rng& rng_;
    int N_;
    Tau tau_;
    double guard_;
};

/// One named identity check: maps a pole-guarded random sample to a
/// nonnegative residual.  Returning nullopt rejects the sample (guard hit).
/// Algebraic residuals are scale-normalized, |LHS-RHS| / (1 + |LHS| + |RHS|),
/// so the pinned tolerances stay meaningful when the two sides grow near the
/// pole guards; order-of-decay checks return the relative order deviation.
struct IdentityCheck {
    std::string id;
    std::string paper_anchor;
    std::string arity;
    double default_tolerance = 1e-10;
    std::vector<int> allowed_N;  // empty: any N from the plan

    std::function<std::optional<double>(Sampler&)> residual_fn;
};

struct CheckReport {
    std::string id;
    int samples_run = 0;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    SampleRecord worst_sample;
    double tolerance = 0.0;
    bool pass = false;
};

namespace detail {

inline std::vector<int> effective_n_list(const IdentityCheck& chk, const SamplePlan& plan) {
    if (chk.allowed_N.empty()) return plan.N_list;
    std::vector<int> eff;
    for (int n : plan.N_list)
        if (std::find(chk.allowed_N.begin(), chk.allowed_N.end(), n) != chk.allowed_N.end())
            eff.push_back(n);
    if (eff.empty())
        throw ConfigError("check '" + chk.id + "' does not apply to any requested N");
    return eff;
}

inline std::pair<double, SampleRecord> run_one_sample(const IdentityCheck& chk,
                                                      const SamplePlan& plan,
                                                      const std::vector<int>& n_list,
                                                      int index) {
    Rng rng(derive_seed(plan.seed, chk.id, static_cast<std::uint64_t>(index)));
    const int N = n_list[static_cast<std::size_t>(index) % n_list.size()];
    const Tau tau = plan.tau_list[(static_cast<std::size_t>(index) / n_list.size()) %
                                  plan.tau_list.size()];
    constexpr int max_attempts = 500;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Sampler smp(rng, N, tau, plan.pole_guard, index);
        if (auto res = chk.residual_fn(smp)) return {*res, std::move(smp.record)};
    }
    throw ConfigError("check '" + chk.id +
                      "': all samples rejected by the pole guard (plan too tight)");
}

}  // namespace detail

/// Evaluate one check over a plan.  Samples are independent streams, so the
/// worker pool size never changes the report; results aggregate in sample
/// order.
inline CheckReport run_check(const IdentityCheck& chk, const SamplePlan& plan,
                             std::optional<double> tolerance_override = {},
                             int jobs = 0) {
    plan.validate();
    const auto n_list = detail::effective_n_list(chk, plan);
    const int count = plan.count;
    std::vector<double> residuals(static_cast<std::size_t>(count), 0.0);
    std::vector<SampleRecord> records(static_cast<std::size_t>(count));

    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::clamp(jobs, 1, 64);

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&]() {
        for (int i; (i = next.fetch_add(1)) < count;) {
            try {
                auto [res, rec] = detail::run_one_sample(chk, plan, n_list, i);
                residuals[static_cast<std::size_t>(i)] = res;
                records[static_cast<std::size_t>(i)] = std::move(rec);
            } catch (...) {
                std::scoped_lock lk(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (jobs == 1 || count == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    CheckReport rep;
    rep.id = chk.id;
    rep.samples_run = count;
    rep.tolerance = tolerance_override.value_or(chk.default_tolerance);
    double sum = 0.0;
    int worst = 0;
    for (int i = 0; i < count; ++i) {
        sum += residuals[static_cast<std::size_t>(i)];
        if (residuals[static_cast<std::size_t>(i)] > residuals[static_cast<std::size_t>(worst)])
            worst = i;
    }
    rep.max_residual = residuals[static_cast<std::size_t>(worst)];
    rep.mean_residual = sum / count;
    rep.worst_sample = records[static_cast<std::size_t>(worst)];
    rep.pass = rep.max_residual <= rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace detail {

/// |observed decay order / expected - 1| from residuals at step h and h/2.
inline double order_residual(double d_h, double d_half, double expected) {
    if (d_half <= 0.0 || d_h <= 0.0) return 0.0;  // below roundoff: accept
    const double observed = std::log2(d_h / d_half);
    return std::abs(observed / expected - 1.0);
}

/// Central difference with one Richardson step: error O(h^4).
template <typename F>
auto richardson_central(F&& f, double h) {
    auto d = [&](double step) { return (f(step) - f(-step)) * (1.0 / (2.0 * step)); };
    return (d(h / 2) * 4.0 - d(h)) * (1.0 / 3.0);
}

inline CMatrix conj_by(const CMatrix& g_left, const CMatrix& m, const CMatrix& g_right) {
    return g_left * m * g_right;
}

/// Trapezoid contour integral (1/2 pi i) \oint f(w) dw over |w| = radius.
template <typename F>
auto contour_residue(F&& f, double radius, int nodes = 64) {
    auto acc = f(cplx{radius, 0.0}) * (cplx{radius, 0.0} * (1.0 / nodes));
    for (int k = 1; k < nodes; ++k) {
        const double th = 2.0 * pi * k / nodes;
        const cplx w = radius * cplx{std::cos(th), std::sin(th)};
        acc += f(w) * (w * (1.0 / nodes));
    }
    return acc;
}

inline const cplx* find_param(const SampleRecord& rec, const std::string& name) {
    for (const auto& [k, v] : rec.params)
        if (k == name) return &v;
    return nullptr;
}

std::vector<IdentityCheck> build_registry();

}  // namespace detail

/// The full registry of named checks.
inline const std::vector<IdentityCheck>& registry() {
    static const std::vector<IdentityCheck> r = detail::build_registry();
    return r;
}

inline const IdentityCheck& find_check(const std::string& id) {
    for (const auto& c : registry())
        if (c.id == id) return c;
    throw ConfigError("unknown check id '" + id + "'");
}

namespace detail {

inline std::vector<IdentityCheck> build_registry() {
    std::vector<IdentityCheck> reg;
    auto add = [&reg](IdentityCheck c) { reg.push_back(std::move(c)); };

    // ---- scalar suite -----------------------------------------------------

    add({"scalar_fay", "Fay trisecant identity, eq. (18)", "tau; x,y,u,w", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx x = s.draw("x"), y = s.draw("y"), u = s.draw("u"), w = s.draw("w");
             if (!s.ok({x, y, u, w, x - y, u + w})) return std::nullopt;
             const cplx lhs = kronecker_phi(x, u, tau) * kronecker_phi(y, w, tau);
             const cplx rhs = kronecker_phi(x - y, u, tau) * kronecker_phi(y, u + w, tau) +
                              kronecker_phi(y - x, w, tau) * kronecker_phi(x, u + w, tau);
             return normalized_residual(lhs, rhs);
         }});

    add({"scalar_fay_deg1", "degenerated Fay, eq. (19)", "tau; x,z,w", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx x = s.draw("x"), z = s.draw("z"), w = s.draw("w");
             if (!s.ok({x, z, w, z + w, x + z + w})) return std::nullopt;
             const cplx lhs = kronecker_phi(x, z, tau) * kronecker_phi(x, w, tau);
             const cplx rhs = kronecker_phi(x, z + w, tau) *
                              (e1(x, tau) + e1(z, tau) + e1(w, tau) - e1(x + z + w, tau));
             return normalized_residual(lhs, rhs);
         }});

    add({"scalar_fay_deg2", "degenerated Fay, arguments swapped, eq. (20)", "tau; x,y,z",
         1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx x = s.draw("x"), y = s.draw("y"), z = s.draw("z");
             if (!s.ok({x, y, z, x + y, x + y + z})) return std::nullopt;
             const cplx lhs = kronecker_phi(x, z, tau) * kronecker_phi(y, z, tau);
             const cplx rhs = kronecker_phi(x + y, z, tau) *
                              (e1(x, tau) + e1(y, tau) + e1(z, tau) - e1(x + y + z, tau));
             return normalized_residual(lhs, rhs);
         }});

    add({"scalar_fay_deg3", "phi(x,z) phi(x,-z) = wp(x) - wp(z), eq. (21)", "tau; x,z",
         1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx x = s.draw("x"), z = s.draw("z");
             if (!s.ok({x, z, x + z, x - z})) return std::nullopt;
             const cplx lhs = kronecker_phi(x, z, tau) * kronecker_phi(x, -z, tau);
             const double r1 = normalized_residual(lhs, wp(x, tau) - wp(z, tau));
             const double r2 = normalized_residual(lhs, e2(x, tau) - e2(z, tau));
             return std::max(r1, r2);
         }});

    add({"scalar_symmetry", "arguments symmetry phi(z,u) = phi(u,z), eq. (6)", "tau; z,u",
         1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u})) return std::nullopt;
             return normalized_residual(kronecker_phi(z, u, tau), kronecker_phi(u, z, tau));
         }});

    add({"scalar_parity", "parity of phi, E1, E2, eq. (8)", "tau; z,u", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u})) return std::nullopt;
             const double r1 = normalized_residual(kronecker_phi(-z, -u, tau),
                                                    -kronecker_phi(z, u, tau));
             const double r2 = normalized_residual(e1(-z, tau), -e1(z, tau));
             const double r3 = normalized_residual(e2(-z, tau), e2(z, tau));
             return std::max({r1, r2, r3});
         }});

    add({"scalar_qp_1", "periodicity in z+1 for phi, E1, E2, eq. (9)", "tau; z,u", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u})) return std::nullopt;
             const double r1 = normalized_residual(kronecker_phi(z + 1.0, u, tau),
                                                    kronecker_phi(z, u, tau));
             const double r2 = normalized_residual(e1(z + 1.0, tau), e1(z, tau));
             const double r3 = normalized_residual(e2(z + 1.0, tau), e2(z, tau));
             return std::max({r1, r2, r3});
         }});

    add({"scalar_qp_tau", "quasi-periodicity in z+tau, eq. (10)", "tau; z,u", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u})) return std::nullopt;
             const double r1 = normalized_residual(kronecker_phi(z + tau.value, u, tau),
                                                    eu(-u) * kronecker_phi(z, u, tau));
             const double r2 =
                 normalized_residual(e1(z + tau.value, tau), e1(z, tau) - two_pi_i);
             const double r3 = normalized_residual(e2(z + tau.value, tau), e2(z, tau));
             return std::max({r1, r2, r3});
         }});

    add({"scalar_residue", "residues of phi and E1 equal 1, eq. (7)", "tau; z,u", 1e-11, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u})) return std::nullopt;
             const double rad = 0.3 * std::min(1.0, tau.im());
             const cplx rz = contour_residue(
                 [&](cplx w) { return kronecker_phi(w, u, tau); }, rad);
             const cplx ru = contour_residue(
                 [&](cplx w) { return kronecker_phi(z, w, tau); }, rad);
             const cplx re = contour_residue([&](cplx w) { return e1(w, tau); }, rad);
             return std::max({normalized_residual(rz, 1.0), normalized_residual(ru, 1.0),
                              normalized_residual(re, 1.0)});
         }});

    add({"scalar_local_expansion", "local expansion of phi at z=0, eq. (a09)", "tau; u",
         0.2, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx u = s.draw("u");
             if (!s.ok({u})) return std::nullopt;
             auto dev = [&](double h) {
                 const cplx zz{h, 0.0};
                 return std::abs(kronecker_phi(zz, u, tau) - 1.0 / zz - e1(u, tau) -
                                 zz / 2.0 * (e1(u, tau) * e1(u, tau) - wp(u, tau)));
             };
             return order_residual(dev(1e-2), dev(5e-3), 2.0);
         }});

    add({"scalar_heat", "heat equation for phi, eq. (11), FD in tau", "tau; z,u", 1e-6, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u, z + u})) return std::nullopt;
             const cplx rhs = kronecker_phi_dzdu(z, u, tau);
             double worst = 0.0;
             for (cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
                 const cplx d = richardson_central(
                     [&](double h) { return kronecker_phi(z, u, Tau(tau.value + dir * h)); },
                     1e-4);
                 worst = std::max(worst, normalized_residual(two_pi_i * (d / dir), rhs));
             }
             return worst;
         }});

    add({"scalar_deriv_u", "d/du phi analytic vs finite differences, eq. (16)", "tau; z,u",
         1e-8, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u, z + u})) return std::nullopt;
             const cplx fd = richardson_central(
                 [&](double h) { return kronecker_phi(z, u + h, tau); }, 1e-5);
             return normalized_residual(fd, kronecker_phi_du(z, u, tau));
         }});

    add({"scalar_deriv_z", "d/dz phi analytic vs finite differences, eq. (17)", "tau; z,u",
         1e-8, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), u = s.draw("u");
             if (!s.ok({z, u, z + u})) return std::nullopt;
             const cplx fd = richardson_central(
                 [&](double h) { return kronecker_phi(z + h, u, tau); }, 1e-5);
             return normalized_residual(fd, kronecker_phi_dz(z, u, tau));
         }});

    // ---- route agreement ----------------------------------------------------

    add({"route_q_series", "theta-ratio phi vs 2 pi i g(s,t|q), eq. (deq5)", "tau; z,u",
         1e-12, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw_im_band("z", 0.0, 0.9);
             const cplx u = s.draw_im_band("u", 0.0, 0.9);
             if (!s.ok({z, u, z + u})) return std::nullopt;
             return normalized_residual(kronecker_phi_q_route(z, u, tau),
                                        kronecker_phi(z, u, tau));
         }});

    add({"route_double_series",
         "square-truncated Kronecker double series vs e(u2 z) phi, eq. (k1), M=200",
         "tau; z, u (u2 in [0.05,0.95])", 5e-2, {},
         [](Sampler& s) -> std::optional<double> {
             const Tau& tau = s.tau();
             const cplx z = s.draw("z");
             const double u1 = s.draw_real("u1", 0.0, 1.0);
             const double u2 = s.draw_real("u2", 0.05, 0.95);
             const cplx u = u1 + u2 * tau.value;
             s.note("u", u);
             if (!s.ok({z, u})) return std::nullopt;
             const cplx sm = kronecker_double_series(z, u, tau, 200);
             const cplx target = kronecker_phi(z, u, tau);
             return std::abs(sm * eu(-u2 * z) - target) / std::abs(target);
         }});

    // ---- R-matrix suite -------------------------------------------------

    add({"sym_args", "arguments symmetry R^h_12(z) = R^{z/N}_12(N h) P_12, eq. (r04)",
         "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
             const cplx nh = static_cast<double>(N) * h;
             if (!s.ok({nh})) return std::nullopt;
             for (int a1 = 0; a1 < N; ++a1)
                 for (int a2 = 0; a2 < N; ++a2)
                     if (lattice_distance(omega_alpha({a1, a2}, N, tau) + z / static_cast<double>(N),
                                          tau) < s.guard())
                         return std::nullopt;
             const CMatrix lhs = quantum_r(1, 2, RParams(N, tau, h, z), layout, 0.0);
             const CMatrix rhs = quantum_r(1, 2, RParams(N, tau, z / static_cast<double>(N), nh),
                                           layout, 0.0) *
                                 permutation_p(1, 2, layout);
             return normalized_residual(lhs, rhs);
         }});

    add({"prop31_components",
         "component identities behind (r04): eqs. (a502)/(a5021), all gamma incl. "
         "out-of-range representatives",
         "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
             const cplx nh = static_cast<double>(N) * h;
             if (!s.ok({nh})) return std::nullopt;
             const cplx zn = z / static_cast<double>(N);
             for (int a1 = 0; a1 < N; ++a1)
                 for (int a2 = 0; a2 < N; ++a2)
                     if (lattice_distance(omega_alpha({a1, a2}, N, tau) + zn, tau) < s.guard())
                         return std::nullopt;
             double worst = 0.0;
             std::vector<LatticeIndex> gammas;
             for (int g1 = 0; g1 < N; ++g1)
                 for (int g2 = 0; g2 < N; ++g2) gammas.push_back({g1, g2});
             gammas.push_back({N + 1, 1 % N});
             gammas.push_back({1 % N, N + 2});
             for (const auto& gam : gammas) {
                 cplx lhs502 = 0.0, lhs5021 = 0.0;
                 for (int a1 = 0; a1 < N; ++a1)
                     for (int a2 = 0; a2 < N; ++a2) {
                         const LatticeIndex alpha{a1, a2};
                         const cplx k2 = kappa(alpha, gam, N) * kappa(alpha, gam, N);
                         lhs502 += k2 * phi_twisted(alpha, nh,
                                                    omega_alpha(alpha, N, tau) + zn, N, tau);
                         lhs5021 += k2 * phi_twisted(alpha, z,
                                                     omega_alpha(alpha, N, tau) + h, N, tau);
                     }
                 lhs502 /= static_cast<double>(N);
                 lhs5021 /= static_cast<double>(N);
                 const cplx rhs502 =
                     phi_twisted(gam, z, omega_alpha(gam, N, tau) + h, N, tau);
                 const cplx rhs5021 =
                     phi_twisted(gam, nh, omega_alpha(gam, N, tau) + zn, N, tau);
                 worst = std::max({worst, normalized_residual(lhs502, rhs502),
                                   normalized_residual(lhs5021, rhs5021)});
             }
             return worst;
         }});

    add({"kappa_sum", "sum_alpha kappa^2_{alpha,gamma} = N^2 delta_{gamma,0}, eq. (a503)",
         "N", 1e-13, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             double worst = 0.0;
             for (int g1 = 0; g1 < N; ++g1)
                 for (int g2 = 0; g2 < N; ++g2) {
                     cplx sum = 0.0;
                     for (int a1 = 0; a1 < N; ++a1)
                         for (int a2 = 0; a2 < N; ++a2) {
                             const cplx k = kappa({a1, a2}, {g1, g2}, N);
                             sum += k * k;
                         }
                     const cplx target =
                         (g1 == 0 && g2 == 0) ? cplx{static_cast<double>(N) * N} : cplx{0.0};
                     worst = std::max(worst, std::abs(sum - target));
                 }
             return worst;
         }});

    add({"unitarity", "R_12^h(z) R_21^h(-z) = N^2 (wp(N h) - wp(z)), eq. (a20)",
         "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
             const cplx nh = static_cast<double>(N) * h;
             if (!s.ok({nh})) return std::nullopt;
             const CMatrix lhs = quantum_r(1, 2, RParams(N, tau, h, z), layout, 0.0) *
                                 quantum_r(2, 1, RParams(N, tau, h, -z), layout, 0.0);
             CMatrix rhs = CMatrix::identity(layout.dim());
             rhs *= static_cast<double>(N) * N * (wp(nh, tau) - wp(z, tau));
             return normalized_residual(lhs, rhs);
         }});

    add({"znzn_symmetry", "(g x g) R (g^-1 x g^-1) = R for g in {Q, Lambda}, eq. (a191)",
         "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
             const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
             double worst = 0.0;
             for (const CMatrix& g : {gen_q(N), gen_lambda(N)}) {
                 const CMatrix gg = kron(g, g);
                 worst = std::max(worst, normalized_residual(gg * R * gg.dagger(), R));
             }
             return worst;
         }});

    add({"parity_R", "R^h_12(z) = -R^{-h}_21(-z), eq. (r08)", "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h) || !s.ok_hbar(-h)) return std::nullopt;
             const CMatrix lhs = quantum_r(1, 2, RParams(N, tau, h, z), layout, 0.0);
             CMatrix rhs = quantum_r(2, 1, RParams(N, tau, -h, -z), layout, 0.0);
             rhs *= -1.0;
             return normalized_residual(lhs, rhs);
         }});

    add({"parity_rm", "r_12(z) = -r_21(-z) and m_12(z) = m_21(-z), eq. (r08)",
         "N, tau; z", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z");
             if (!s.ok({z})) return std::nullopt;
             CMatrix rneg = classical_r(2, 1, -z, N, tau, layout);
             rneg *= -1.0;
             const double r1 =
                 normalized_residual(classical_r(1, 2, z, N, tau, layout), rneg);
             const double r2 = normalized_residual(classical_m(1, 2, z, N, tau, layout),
                                                   classical_m(2, 1, -z, N, tau, layout));
             return std::max(r1, r2);
         }});

    auto qp_check = [](const char* id, const char* anchor,
                       std::function<std::optional<double>(Sampler&)> fn) {
        return IdentityCheck{id, anchor, "N, tau; z, hbar", 1e-10, {}, std::move(fn)};
    };

    add(qp_check("qp_z_1", "R^h(z+1) = (Q^-1 x 1) R^h(z) (Q x 1), eq. (r721)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(RParams(N, tau, h, z + 1.0), 0.0);
                     const CMatrix q = gen_q(N);
                     const CMatrix eye = CMatrix::identity(N);
                     return normalized_residual(Rs, kron(q.dagger(), eye) * R * kron(q, eye));
                 }));

    add(qp_check("qp_z_tau", "R^h(z+tau) = e^{-2 pi i h} (L^-1 x 1) R^h(z) (L x 1), eq. (r721)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(RParams(N, tau, h, z + tau.value), 0.0);
                     const CMatrix l = gen_lambda(N);
                     const CMatrix eye = CMatrix::identity(N);
                     return normalized_residual(
                         Rs, eu(-h) * (kron(l.dagger(), eye) * R * kron(l, eye)));
                 }));

    add(qp_check("qp_h_1", "R^{h+1}(z) = R^h(z), eq. (r722)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(RParams(N, tau, h + 1.0, z), 0.0);
                     return normalized_residual(Rs, R);
                 }));

    add(qp_check("qp_h_tau", "R^{h+tau}(z) = e^{-2 pi i z} R^h(z), eq. (r722)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(RParams(N, tau, h + tau.value, z), 0.0);
                     return normalized_residual(Rs, eu(-z) * R);
                 }));

    add(qp_check("qp_gamma_z",
                 "R^h(z + N omega_gamma) = e^{-2 pi i N h dtau(omega_gamma)} "
                 "(T_gamma^-1 x 1) R^h(z) (T_gamma x 1), eq. (r723)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     const LatticeIndex gam{s.draw_index("gamma1", N),
                                            s.draw_index("gamma2", N)};
                     if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
                     const cplx om = omega_alpha(gam, N, tau);
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(
                         RParams(N, tau, h, z + static_cast<double>(N) * om), 0.0);
                     const CMatrix tg = t_basis(gam, N);
                     const CMatrix eye = CMatrix::identity(N);
                     const cplx ph = eu(-static_cast<double>(N) * h * omega_alpha_dtau(gam, N));
                     return normalized_residual(
                         Rs, ph * (kron(tg.dagger(), eye) * R * kron(tg, eye)));
                 }));

    add(qp_check("qp_gamma_h",
                 "R^{h+omega_gamma}(z) = e^{-2 pi i z dtau(omega_gamma)} "
                 "(T_gamma^-1 x 1) R^h(z) (1 x T_gamma), eq. (r724)",
                 [](Sampler& s) -> std::optional<double> {
                     const int N = s.N();
                     const Tau& tau = s.tau();
                     const cplx z = s.draw("z"), h = s.draw("hbar");
                     const LatticeIndex gam{s.draw_index("gamma1", N),
                                            s.draw_index("gamma2", N)};
                     const cplx om = omega_alpha(gam, N, tau);
                     if (!s.ok({z}) || !s.ok_hbar(h) || !s.ok_hbar(h + om))
                         return std::nullopt;
                     const CMatrix R = quantum_r12(RParams(N, tau, h, z), 0.0);
                     const CMatrix Rs = quantum_r12(RParams(N, tau, h + om, z), 0.0);
                     const CMatrix tg = t_basis(gam, N);
                     const CMatrix eye = CMatrix::identity(N);
                     const cplx ph = eu(-z * omega_alpha_dtau(gam, N));
                     return normalized_residual(
                         Rs, ph * (kron(tg.dagger(), eye) * R * kron(eye, tg)));
                 }));

    add({"local_h_expansion",
         "classical limit R = 1/h + r + h m + O(h^2), eq. (r09): quadratic decay",
         "N, tau; z", 0.2, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z");
             if (!s.ok({z})) return std::nullopt;
             const CMatrix r = classical_r(1, 2, z, N, tau, layout);
             const CMatrix m = classical_m(1, 2, z, N, tau, layout);
             auto dev = [&](double h) {
                 CMatrix d = quantum_r(1, 2, RParams(N, tau, cplx{h, 0.0}, z), layout, 0.0);
                 CMatrix eye = CMatrix::identity(layout.dim());
                 eye *= 1.0 / h;
                 d -= eye;
                 d -= r;
                 CMatrix hm = m;
                 hm *= cplx{h, 0.0};
                 d -= hm;
                 return d.max_abs();
             };
             return order_residual(dev(1e-3), dev(5e-4), 2.0);
         }});

    add({"local_z_expansion",
         "R = N P/z + R^{(0)} + O(z), eqs. (r095)/(r096): linear decay", "N, tau; hbar",
         0.2, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx h = s.draw("hbar");
             if (!s.ok_hbar(h)) return std::nullopt;
             const CMatrix r0 = r_zero(1, 2, h, N, tau, layout, 0.0);
             const CMatrix P = permutation_p(1, 2, layout);
             auto dev = [&](double zz) {
                 CMatrix d = quantum_r(1, 2, RParams(N, tau, h, cplx{zz, 0.0}), layout, 0.0);
                 CMatrix p = P;
                 p *= static_cast<double>(N) / zz;
                 d -= p;
                 d -= r0;
                 return d.max_abs();
             };
             return order_residual(dev(1e-2), dev(5e-3), 1.0);
         }});

    add({"r2_minus_2m", "r_12^2(z) - 2 m_12(z) = N^2 wp(z), eq. (r094)", "N, tau; z",
         1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z");
             if (!s.ok({z})) return std::nullopt;
             const CMatrix r = classical_r(1, 2, z, N, tau, layout);
             CMatrix m2 = classical_m(1, 2, z, N, tau, layout);
             m2 *= 2.0;
             CMatrix rhs = CMatrix::identity(layout.dim());
             rhs *= static_cast<double>(N) * N * wp(z, tau);
             rhs += m2;
             return normalized_residual(r * r, rhs);
         }});

    add({"residue_h", "res_{h=0} R^h(z) = 1 x 1, eq. (r05), contour quadrature",
         "N, tau; z", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z");
             if (!s.ok({z})) return std::nullopt;
             const double rad = 0.35 * std::min(1.0, tau.im()) / N;
             const CMatrix res = contour_residue(
                 [&](cplx w) { return quantum_r(1, 2, RParams(N, tau, w, z), layout, 0.0); },
                 rad);
             return normalized_residual(res, CMatrix::identity(layout.dim()));
         }});

    add({"residue_z", "res_{z=0} R^h(z) = N P_12, eq. (r05), contour quadrature",
         "N, tau; hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx h = s.draw("hbar");
             if (!s.ok_hbar(h)) return std::nullopt;
             const double rad = 0.3 * std::min(1.0, tau.im());
             const CMatrix res = contour_residue(
                 [&](cplx w) { return quantum_r(1, 2, RParams(N, tau, h, w), layout, 0.0); },
                 rad);
             CMatrix target = permutation_p(1, 2, layout);
             target *= static_cast<double>(N);
             return normalized_residual(res, target);
         }});

    add({"heat", "2 pi i d/dtau R = d/dz d/dh R, eq. (r091); FD tau vs analytic",
         "N, tau; z, hbar", 1e-6, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             if (!s.ok({z}) || !s.ok_hbar(h)) return std::nullopt;
             const CMatrix rhs = dzdh_quantum_r(1, 2, RParams(N, tau, h, z), layout, 0.0);
             double worst = 0.0;
             for (cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
                 const CMatrix d = richardson_central(
                     [&](double hh) {
                         return quantum_r(1, 2, RParams(N, Tau(tau.value + dir * hh), h, z),
                                          layout, 0.0);
                     },
                     1e-4);
                 worst = std::max(worst, normalized_residual(d * (two_pi_i / dir), rhs));
             }
             return worst;
         }});

    add({"deriv_h", "d/dh R via classical r, eq. (r74)", "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             const cplx nh = static_cast<double>(N) * h;
             if (!s.ok({z, nh, z + nh, z - nh}) || !s.ok_hbar(h)) return std::nullopt;
             const RParams p(N, tau, h, z);
             const CMatrix R = quantum_r(1, 2, p, layout, 0.0);
             const CMatrix lhs = dh_quantum_r(1, 2, p, layout, 0.0);
             CMatrix rhs = classical_r(1, 2, z + nh, N, tau, layout) * R +
                           R * classical_r(1, 2, z - nh, N, tau, layout);
             rhs *= 0.5;
             R.add_scaled_to(rhs, 0.5 * static_cast<double>(N) *
                                      (e1(z + nh, tau) - e1(z - nh, tau) - 2.0 * e1(nh, tau)));
             return normalized_residual(lhs, rhs);
         }});

    add({"deriv_z", "d/dz R via classical r, eq. (r75)", "N, tau; z, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const cplx z = s.draw("z"), h = s.draw("hbar");
             const cplx nh = static_cast<double>(N) * h;
             if (!s.ok({z, nh, z + nh, z - nh}) || !s.ok_hbar(h)) return std::nullopt;
             const RParams p(N, tau, h, z);
             const CMatrix R = quantum_r(1, 2, p, layout, 0.0);
             const CMatrix lhs = f_matrix(1, 2, p, layout, 0.0);
             CMatrix rhs = classical_r(1, 2, z + nh, N, tau, layout) * R -
                           R * classical_r(1, 2, z - nh, N, tau, layout);
             rhs *= 0.5 / static_cast<double>(N);
             R.add_scaled_to(rhs, 0.5 * (e1(z + nh, tau) + e1(z - nh, tau) - 2.0 * e1(z, tau)));
             return normalized_residual(lhs, rhs);
         }});

    // ---- Mat^{x3} identities ------------------------------------------------

    add({"aybe", "associative Yang-Baxter equation, eq. (r101)",
         "N, tau; z_a, z_b, z_c, hbar, hbar2", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{3, N};
             const cplx za = s.draw("z_a"), zb = s.draw("z_b"), zc = s.draw("z_c");
             const cplx h = s.draw("hbar"), h2 = s.draw("hbar2");
             if (!s.ok({za - zb, zb - zc, za - zc})) return std::nullopt;
             if (!s.ok_hbar(h) || !s.ok_hbar(h2) || !s.ok_hbar(h - h2) || !s.ok_hbar(h2 - h))
                 return std::nullopt;
             auto R = [&](cplx hh, cplx zz, int sa, int sb) {
                 return quantum_r(sa, sb, RParams(N, tau, hh, zz), layout, 0.0);
             };
             const CMatrix lhs = R(h, za - zb, 1, 2) * R(h2, zb - zc, 2, 3);
             const CMatrix rhs = R(h2, za - zc, 1, 3) * R(h - h2, za - zb, 1, 2) +
                                 R(h2 - h, zb - zc, 2, 3) * R(h, za - zc, 1, 3);
             return normalized_residual(lhs, rhs);
         }});

    add({"fay_mat3_deg_r11",
         "degenerated Mat^{x3} Fay with analytic d/dh R, eq. (r11)",
         "N, tau; z_a, z_b, z_c, hbar", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{3, N};
             const cplx za = s.draw("z_a"), zb = s.draw("z_b"), zc = s.draw("z_c");
             const cplx h = s.draw("hbar");
             if (!s.ok({za - zb, zb - zc, za - zc}) || !s.ok_hbar(h)) return std::nullopt;
             auto R = [&](cplx zz, int sa, int sb) {
                 return quantum_r(sa, sb, RParams(N, tau, h, zz), layout, 0.0);
             };
             const CMatrix lhs = R(za - zb, 1, 2) * R(zb - zc, 2, 3);
             const CMatrix rac = R(za - zc, 1, 3);
             CMatrix rhs = rac * classical_r(1, 2, za - zb, N, tau, layout) +
                           classical_r(2, 3, zb - zc, N, tau, layout) * rac;
             rhs -= dh_quantum_r(1, 3, RParams(N, tau, h, za - zc), layout, 0.0);
             return normalized_residual(lhs, rhs);
         }});

    add({"fay_mat3_deg_r120",
         "degenerated Mat^{x3} Fay with R^{(0)} and F, eq. (r120)",
         "N, tau; z, hbar, hbar2", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{3, N};
             const cplx z = s.draw("z"), h = s.draw("hbar"), h2 = s.draw("hbar2");
             if (!s.ok({z})) return std::nullopt;
             if (!s.ok_hbar(h) || !s.ok_hbar(h2) || !s.ok_hbar(h - h2) || !s.ok_hbar(h2 - h))
                 return std::nullopt;
             auto R = [&](cplx hh, cplx zz, int sa, int sb) {
                 return quantum_r(sa, sb, RParams(N, tau, hh, zz), layout, 0.0);
             };
             const CMatrix lhs = R(h, z, 1, 2) * R(h2, -z, 2, 3);
             CMatrix rhs = r_zero(1, 3, h2, N, tau, layout, 0.0) * R(h - h2, z, 1, 2) +
                           R(h2 - h, -z, 2, 3) * r_zero(1, 3, h, N, tau, layout, 0.0);
             CMatrix fp = f_matrix(2, 3, RParams(N, tau, h2 - h, -z), layout, 0.0) *
                          permutation_p(1, 3, layout);
             fp *= static_cast<double>(N);
             rhs += fp;
             return normalized_residual(lhs, rhs);
         }});

    // ---- Mat^{x2} Fay identities (the paper's central new results) -----------

    add({"fay_mat2", "Fay identity in Mat^{x2}, eq. (r102)", "N, tau; z, w, hbar, hbar2",
         1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const double Nd = static_cast<double>(N);
             const cplx z = s.draw("z"), w = s.draw("w");
             const cplx h = s.draw("hbar"), h2 = s.draw("hbar2");
             const cplx arg = (z - w) / Nd + h2 - h;
             if (!s.ok({z, w, Nd * h, Nd * h2, arg, z + Nd * h2, w + Nd * h}))
                 return std::nullopt;
             if (!s.ok_hbar(h) || !s.ok_hbar(h2) || !s.ok_hbar(h - h2)) return std::nullopt;
             for (int a1 = 0; a1 < N; ++a1)
                 for (int a2 = 0; a2 < N; ++a2)
                     if (lattice_distance(omega_alpha({a1, a2}, N, tau) + (z - w) / Nd, tau) <
                         s.guard())
                         return std::nullopt;
             auto R12 = [&](cplx hh, cplx zz) {
                 return quantum_r(1, 2, RParams(N, tau, hh, zz), layout, 0.0);
             };
             const CMatrix lhs = R12(h, z) * quantum_r(2, 1, RParams(N, tau, h2, -w), layout, 0.0);
             CMatrix rhs = R12(h - h2, z + Nd * h2);
             rhs *= Nd * kronecker_phi(Nd * h2, arg, tau);
             R12(h - h2, w + Nd * h).add_scaled_to(rhs, -Nd * kronecker_phi(Nd * h, arg, tau));
             R12((z - w) / Nd, w + Nd * h).add_scaled_to(rhs, Nd * kronecker_phi(-w, arg, tau));
             R12((z - w) / Nd, z + Nd * h2).add_scaled_to(rhs, -Nd * kronecker_phi(-z, arg, tau));
             return normalized_residual(lhs, rhs);
         }});

    add({"fay_mat2_deg_r12", "degenerated Mat^{x2} Fay, eq. (r12)", "N, tau; z, w, hbar",
         1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const double Nd = static_cast<double>(N);
             const cplx z = s.draw("z"), w = s.draw("w"), h = s.draw("hbar");
             const cplx dzw = (z - w) / Nd;
             if (!s.ok({z, w, Nd * h, dzw, z + Nd * h, w + Nd * h, Nd * h + dzw}))
                 return std::nullopt;
             if (!s.ok_hbar(h)) return std::nullopt;
             for (int a1 = 0; a1 < N; ++a1)
                 for (int a2 = 0; a2 < N; ++a2)
                     if (lattice_distance(omega_alpha({a1, a2}, N, tau) + dzw, tau) < s.guard())
                         return std::nullopt;
             auto R12 = [&](cplx hh, cplx zz) {
                 return quantum_r(1, 2, RParams(N, tau, hh, zz), layout, 0.0);
             };
             const CMatrix lhs =
                 R12(h, z) * quantum_r(2, 1, RParams(N, tau, h, -w), layout, 0.0);
             CMatrix rhs = classical_r(1, 2, z + Nd * h, N, tau, layout) -
                           classical_r(1, 2, w + Nd * h, N, tau, layout);
             rhs *= Nd * kronecker_phi(dzw, Nd * h, tau);
             R12(dzw, z + Nd * h).add_scaled_to(rhs, Nd * kronecker_phi(-dzw, z, tau));
             R12(dzw, w + Nd * h).add_scaled_to(rhs, -Nd * kronecker_phi(-dzw, w, tau));
             CMatrix eye = CMatrix::identity(layout.dim());
             eye *= Nd * Nd * kronecker_phi(dzw, Nd * h, tau) *
                    (e1(Nd * h, tau) - e1(Nd * h + dzw, tau));
             rhs += eye;
             return normalized_residual(lhs, rhs);
         }});

    add({"fay_mat2_deg_r13", "degenerated Mat^{x2} Fay, eq. (r13)",
         "N, tau; z, hbar, hbar2", 1e-10, {},
         [](Sampler& s) -> std::optional<double> {
             const int N = s.N();
             const Tau& tau = s.tau();
             const TensorLayout layout{2, N};
             const double Nd = static_cast<double>(N);
             const cplx z = s.draw("z"), h = s.draw("hbar"), h2 = s.draw("hbar2");
             const cplx dh = h2 - h;
             if (!s.ok({z, dh, Nd * h, Nd * h2, z + Nd * h, z + Nd * h2, z - dh}))
                 return std::nullopt;
             if (!s.ok_hbar(h) || !s.ok_hbar(h2) || !s.ok_hbar(h - h2)) return std::nullopt;
             auto R12 = [&](cplx hh, cplx zz) {
                 return quantum_r(1, 2, RParams(N, tau, hh, zz), layout, 0.0);
             };
             const CMatrix lhs =
                 R12(h, z) * quantum_r(2, 1, RParams(N, tau, h2, -z), layout, 0.0);
             CMatrix rhs = classical_r(1, 2, z + Nd * h, N, tau, layout) -
                           classical_r(1, 2, z + Nd * h2, N, tau, layout);
             rhs *= Nd * kronecker_phi(dh, -z, tau);
             R12(h - h2, z + Nd * h).add_scaled_to(rhs, -Nd * kronecker_phi(dh, Nd * h, tau));
             R12(h - h2, z + Nd * h2).add_scaled_to(rhs, Nd * kronecker_phi(dh, Nd * h2, tau));
             CMatrix eye = CMatrix::identity(layout.dim());
             eye *= Nd * Nd * kronecker_phi(dh, -z, tau) *
                    (e1(z, tau) - e1(z - dh, tau));
             rhs += eye;
             return normalized_residual(lhs, rhs);
         }});

    // ---- Calogero-Moser Lax quasi-periodicity --------------------------------

    auto cm_sample = [](Sampler& s) -> std::optional<CMLaxParams> {
        static const std::array<std::pair<int, int>, 3> pairs{{{2, 2}, {2, 3}, {3, 2}}};
        const auto [nt, N] = pairs[static_cast<std::size_t>(s.index()) % pairs.size()];
        s.note("n_tilde", cplx{static_cast<double>(nt), 0.0});
        s.note("N_cm", cplx{static_cast<double>(N), 0.0});
        std::vector<cplx> p, z;
        for (int a = 0; a < nt; ++a) p.push_back(s.draw("p" + std::to_string(a)));
        for (int a = 0; a < nt; ++a) z.push_back(s.draw("z" + std::to_string(a)));
        const cplx nu = s.draw("nu");
        const cplx h = s.draw("hbar");
        CMLaxParams params(nt, p, z, nu, h, N, s.tau());
        for (int a = 0; a < nt; ++a)
            for (int b = 0; b < nt; ++b)
                if (a != b &&
                    lattice_distance(z[static_cast<std::size_t>(a)] - z[static_cast<std::size_t>(b)],
                                     s.tau()) < s.guard())
                    return std::nullopt;
        return params;
    };

    add({"cm_qp_1", "CM Lax quasi-periodicity L(h + 1/N) = Q^-1 L Q, eq. (r728)",
         "(n_tilde, N) in {(2,2),(2,3),(3,2)}; p_a, z_a, nu, hbar", 1e-10, {},
         [cm_sample](Sampler& s) -> std::optional<double> {
             auto params = cm_sample(s);
             if (!params) return std::nullopt;
             const double Nd = params->N;
             Sampler& smp = s;
             auto shifted = *params;
             shifted.hbar += 1.0 / Nd;
             // guard both hbar values against summand poles
             for (const cplx h : {params->hbar, shifted.hbar})
                 for (int a1 = 0; a1 < params->N; ++a1)
                     for (int a2 = 0; a2 < params->N; ++a2)
                         if (lattice_distance(
                                 h + omega_alpha({a1, a2}, params->N, params->tau),
                                 params->tau) < smp.guard())
                             return std::nullopt;
             const CMatrix L = cm_lax(*params, smp.guard());
             const CMatrix Ls = cm_lax(shifted, smp.guard());
             const CMatrix Q = cm_block_q(*params);
             return normalized_residual(Ls, Q.dagger() * L * Q);
         }});

    add({"cm_qp_tau",
         "CM Lax quasi-periodicity L(h + tau/N) = e^{-Z/N} L^-conj e^{Z/N}, eq. (r728)",
         "(n_tilde, N) in {(2,2),(2,3),(3,2)}; p_a, z_a, nu, hbar", 1e-10, {},
         [cm_sample](Sampler& s) -> std::optional<double> {
             auto params = cm_sample(s);
             if (!params) return std::nullopt;
             auto shifted = *params;
             shifted.hbar += params->tau.value / static_cast<double>(params->N);
             for (const cplx h : {params->hbar, shifted.hbar})
                 for (int a1 = 0; a1 < params->N; ++a1)
                     for (int a2 = 0; a2 < params->N; ++a2)
                         if (lattice_distance(
                                 h + omega_alpha({a1, a2}, params->N, params->tau),
                                 params->tau) < s.guard())
                             return std::nullopt;
             const CMatrix L = cm_lax(*params, s.guard());
             const CMatrix Ls = cm_lax(shifted, s.guard());
             const CMatrix Lam = cm_block_lambda(*params);
             const CMatrix Z = cm_block_z(*params);
             const double invN = 1.0 / params->N;
             const CMatrix expm = exp_diag(Z, cplx{-invN, 0.0});
             const CMatrix expp = exp_diag(Z, cplx{invN, 0.0});
             return normalized_residual(Ls, expm * Lam.dagger() * L * Lam * expp);
         }});

    // ---- Proposition 4.1 / Painleve blocks ------------------------------------

    auto pvi_guards = [](Sampler& s, cplx u, cplx h) {
        const HalfPeriods hp(s.tau());
        const double Nd = static_cast<double>(s.N());
        for (int a = 0; a < 4; ++a) {
            if (lattice_distance(u + Nd * hp.omega[a], s.tau()) < s.guard()) return false;
            if (lattice_distance(u + hp.omega[a], s.tau()) < s.guard()) return false;
        }
        return s.ok({Nd * h}) && s.ok_hbar(h);
    };

    add({"prop41_a702", "[L^a, M^b] + [L^b, M^a] = 0, eq. (a702), odd N",
         "N in {1,3}, tau; u, hbar", 1e-10, {1, 3},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             return check_prop41_identities(u, h, s.tau(), s.N(), 0.0).a702;
         }});

    add({"prop41_a703", "shifted unitarity, eq. (a703)", "N, tau; u, hbar", 1e-10, {},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             return check_prop41_identities(u, h, s.tau(), s.N(), 0.0).a703;
         }});

    add({"prop41_a704", "F R - R F = -N^2 wp'(u + N Omega_a), eq. (a704)",
         "N, tau; u, hbar", 1e-10, {},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             return check_prop41_identities(u, h, s.tau(), s.N(), 0.0).a704;
         }});

    add({"prop41_a707",
         "cross products sum to a scalar, eq. (a707), plus u-independence; odd N",
         "N in {1,3}, tau; u, hbar", 1e-10, {1, 3},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             const auto r = check_prop41_identities(u, h, s.tau(), s.N(), 0.0);
             return std::max(r.a707, r.a707_u_independence);
         }});

    add({"prop41_a708", "u-derivative of (a707) vanishes, eq. (a708), odd N",
         "N in {1,3}, tau; u, hbar", 1e-10, {1, 3},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             return check_prop41_identities(u, h, s.tau(), s.N(), 0.0).a708;
         }});

    add({"monodromy_onshell",
         "monodromy residual dL/dtau - (1/2 pi i) dM/dh - [L,M] on shell, eq. (a48); "
         "even N uses the single-constant collapse (a49)",
         "N, tau; u, v, nu, hbar", 1e-8, {},
         [pvi_guards](Sampler& s) -> std::optional<double> {
             const cplx u = s.draw("u"), h = s.draw("hbar");
             const cplx v = s.draw("v");
             if (!pvi_guards(s, u, h)) return std::nullopt;
             PVIConstants c;
             if (s.N() % 2 == 1) {
                 for (int a = 0; a < 4; ++a)
                     c.nu[a] = s.draw_real("nu" + std::to_string(a), 0.05, 0.5);
             } else {
                 c.nu[0] = s.draw_real("nu0", 0.05, 0.5);
             }
             const PVIState state{u, v, s.tau()};
             return monodromy_residual(state, c, h, s.N(), MonodromyMode::analytic, {}, 0.0);
         }});

    return reg;
}

}  // namespace detail

}
