#ifndef LOOPMAPS_MODEL_HPP
#define LOOPMAPS_MODEL_HPP

#include <array>
#include <optional>
#include <string>

#include "loopmaps/geometry.hpp"
#include "loopmaps/specfun.hpp"

namespace loopmaps {

enum class Phase { Dense, Dilute, OffCritical };

std::string phase_name(Phase p);

// Parameters of the O(n) model with bending energy on triangulations.
struct ModelContext {
    double n;      // loop fugacity, in (0,2)
    double alpha;  // bending energy
    double g;      // weight per unvisited triangle
    double h;      // weight per visited triangle
    double u;      // weight per vertex

    double b() const { return std::acos(n / 2.0) / kPi; }
    BParam bparam() const { return BParam::from_n(n); }

    Phase phase() const;      // dense/dilute only on the alpha=1 critical line
    int d_flag() const;       // +1 dense, -1 dilute
    double c_exponent() const;  // 1/(1-b) dense, 1 dilute

    static ModelContext make(double n, double alpha, double g, double h,
                             double u);
};

// ---- involution and annulus kernels ----

// sigma(x) = (1 - alpha h x) / (alpha h + (1-alpha^2) h^2 x)
double involution_sigma(const ModelContext& ctx, double x);
double involution_sigma_prime(const ModelContext& ctx, double x);
double involution_sigma_second(const ModelContext& ctx, double x);
double involution_fixed_point(const ModelContext& ctx);  // gamma_+^*
double involution_at_infinity(const ModelContext& ctx);  // sigma(inf)

struct AnnulusKernels {
    double R;  // n log(1/(1 - alpha h (x+z) - (1-alpha^2) h^2 x z))
    double A;  // d/dx R
};
AnnulusKernels annulus_kernels(const ModelContext& ctx, double x, double z);

// ---- alpha = 1 phase diagram ----

struct RhoBounds {
    double rho_min;        // dilute endpoint (rhominf)
    double rho_max;        // fully packed endpoint
    double rho_min_naive;  // positivity-only bound, superseded by rho_min
};
RhoBounds rho_bounds(double n);

struct CriticalPoint {
    double g_over_h;
    double h_squared;
    Phase phase;  // Dilute at rho = rho_min, Dense otherwise
};
CriticalPoint critical_line(double n, double rho);

struct QOfU {
    double c;       // q ~ ((1-u)/q_star)^c
    double q_star;
};
// Requires (g,h) on the alpha=1 non-generic critical line.
QOfU q_of_u(const ModelContext& ctx);

// Classify (g,h) against the alpha=1 critical line (tolerance 1e-9 on h^2).
struct PhaseClassification {
    Phase phase;
    double rho;  // valid when phase != OffCritical
};
PhaseClassification classify_phase(const ModelContext& ctx);

// ---- disk function and endpoint solver ----

struct GHat {
    std::array<cplx, 4> ghat;  // ghat_0 .. ghat_3

    std::array<cplx, 4> gtilde(const EllipticFrame& fr) const;  // (iC)^l ghat_l
};
GHat ghat_coeffs(const ModelContext& ctx, const EllipticFrame& fr);

// G(v) of the disk solution and its v-derivatives.
cplx disk_G(const ModelContext& ctx, const EllipticFrame& fr, cplx v,
            int deriv_order = 0);

// F(x(v)) recovered from G via the potential-part shift.
cplx disk_F_of_v(const ModelContext& ctx, const EllipticFrame& fr, cplx v);

struct EndpointSolution {
    Branchpoints bp;
    EllipticFrame frame;
    double residual;  // max |Im G(tau + eps)| at the solution
    int iterations;
};

struct SolveOptions {
    int max_iterations = 80;
    double tolerance = 1e-10;
    int ladder_steps = 8;
};

struct NoConvergenceError : std::runtime_error {
    double last_residual;
    NoConvergenceError(const std::string& w, double r)
        : std::runtime_error(w), last_residual(r) {}
};

// Gaussian endpoints for (g,h) = (0,0): the moment conditions of the quadratic
// potential give gamma_{+-} = +- 2 sqrt(u).
std::array<double, 2> gaussian_endpoints(double u);

// Damped Newton on (gamma_-, gamma_+) for G(tau) = G(tau+1/2) = 0, with a
// continuation ladder in (g,h) from the Gaussian seed.
EndpointSolution solve_endpoints(const ModelContext& ctx,
                                 const SolveOptions& opts = {});

// ---- refined cylinder / pointed disk ----

// G^(2)_s(v1,v2), the 4-term Upsilon' kernel over (4 - n^2 s^2); the product
// n s is recovered from bs as 2 cos(pi b(s)).
cplx cylinder_G2s(const BParam& bs, const EllipticFrame& fr, cplx v1, cplx v2);

// G^bullet_s(v), the 4-term Upsilon kernel times u/(2 + n s).
cplx pointed_disk_Gs(const BParam& bs, const ModelContext& ctx,
                     const EllipticFrame& fr, cplx v, double s);

// Gbar^(2) = G^(2)_{s=1} plus the cylinder shift of the recursion.
cplx cylinder_G2bar(const ModelContext& ctx, const EllipticFrame& fr, cplx v1,
                    cplx v2);

// Small-T limit kernels of G^(2)_s.
cplx cylinder_limit_H(const BParam& bs, double eps_xor, cplx w1, cplx w2);

// betatilde^(0,2)(s, eps1, eps2) of the cylinder singular exponent.
double cylinder_exponent_betatilde(const BParam& bs, double eps1, double eps2);

}  // namespace loopmaps

#endif
