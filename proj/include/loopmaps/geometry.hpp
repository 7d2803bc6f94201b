#ifndef LOOPMAPS_GEOMETRY_HPP
#define LOOPMAPS_GEOMETRY_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include "loopmaps/specfun.hpp"

namespace loopmaps {

// The four real branch points gm < gp < sgp < sgm.
struct Branchpoints {
    double gm, gp, sgp, sgm;

    void check_ordering() const;
    bool degenerate(double tol = 1e-12) const;
};

struct DegenerateFrameError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Elliptic frame of the four-branch-point geometry. k is primary; T derived.
struct EllipticFrame {
    Branchpoints bp;
    double k;       // modulus from the cross-ratio of the endpoints
    double T;       // half period, T = K(k)/(2 K'(k))
    double C;       // scale in x(v) ~ -iC/(v - v_inf)
    double w_inf;   // v_inf = 1/2 + tau w_inf, w_inf in (0,1)
    double E1, E2, E3;  // symmetric polynomials of the endpoints

    cplx tau() const { return cplx(0.0, T); }
    cplx v_inf() const { return cplx(0.5, T * w_inf); }
    QModulus mod() const { return QModulus{T}; }
    double q() const { return std::exp(-kPi / T); }
};

EllipticFrame build_parametrization(const Branchpoints& bp);

// x(v) and v-derivatives through the theta-quotient representation
// (periods 1 and 2*tau).
std::vector<cplx> x_jet(const EllipticFrame& fr, cplx v, int max_order);
cplx x_of_v(const EllipticFrame& fr, cplx v, int deriv_order = 0);

// Laurent coefficients of x at v_inf:
//   x(v) = -iC/(v - v_inf) + E1/4 + (i/C)(3E1^2-8E2)/48 (v-v_inf) + ...
// Returns coefficients of (v-v_inf)^{-1}, ..., (v-v_inf)^{order-1}.
std::vector<cplx> x_infinity_expansion(const EllipticFrame& fr, int order);

// Critical (q -> 0) endpoint data: gamma+ and sigma(gamma+) merged at the
// involution's fixed point.
struct CriticalFrame {
    double gm_star, gp_star, sgm_star;
    double w_inf_star;
};

// Limit functions x*_eps(w) of x(eps + tau w) - gamma_+ ~ q^{1/2-eps} x*_eps(w).
cplx x_critical_limit(double eps, cplx w, const CriticalFrame& star);

}  // namespace loopmaps

#endif
