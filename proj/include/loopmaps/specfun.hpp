#ifndef LOOPMAPS_SPECFUN_HPP
#define LOOPMAPS_SPECFUN_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace loopmaps {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Purely imaginary half-period ratio tau = iT, T > 0.
struct QModulus {
    double T;

    cplx tau() const { return cplx(0.0, T); }
    // series nome e^{i pi tau} = e^{-pi T}
    double q_theta() const { return std::exp(-kPi * T); }
    // critical nome e^{-pi/T}, used in small-T asymptotics
    double q_crit() const { return std::exp(-kPi / T); }

    static QModulus from_T(double T);
};

// b with n = 2 cos(pi b).
struct BParam {
    double b;

    double n_equiv() const { return 2.0 * std::cos(kPi * b); }

    // b = arccos(n/2)/pi for n in (0,2)
    static BParam from_n(double n);
    // b(s) = arccos(n s/2)/pi, needs |n s| < 2
    static BParam from_ns(double n, double s);
    static BParam from_b(double b);
};

struct PoleProximityError : std::runtime_error {
    cplx lattice_point;
    PoleProximityError(const std::string& what, cplx lp)
        : std::runtime_error(what), lattice_point(lp) {}
};

struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Jacobi theta_1 and its v-derivatives, generic tau in the upper half plane.
// Returns [theta, theta', ..., theta^(max_order)]. Termwise-differentiated
// q-series, truncated when the running term drops below tol * |partial sum|.
std::vector<cplx> theta1_jet(cplx v, cplx tau, int max_order);

// d^r/dv^r theta_1(v | iT). deriv_order capped (default max 12) to keep the
// public surface honest about what has been validated.
cplx theta1(cplx v, const QModulus& mod, int deriv_order = 0);

int theta1_max_order();

// Upsilon_b and derivatives, evaluated through the modular theta
// representation (stable for all T, including T -> 0). Arguments are first
// reduced to the fundamental cell using
//   Upsilon_b(v+1) = Upsilon_b(v),  Upsilon_b(v+tau) = e^{i pi b} Upsilon_b(v).
std::vector<cplx> upsilon_jet(const BParam& b, cplx v, const QModulus& mod,
                              int max_order);

cplx upsilon(const BParam& b, cplx v, const QModulus& mod, int deriv_order = 0);

// upsilon_b = lim_{w->0} (Upsilon_b'(w) + 1/w^2), modular closed form.
cplx upsilon_const(const BParam& b, const QModulus& mod);

// Laurent coefficients of Upsilon_b at v = 0:
//   Upsilon_b(w) = sum_{j >= -1} a_j w^j,  a_{-1} = 1.
// Returns a_{-1}, a_0, ..., a_{depth-1} (depth+1 values).
std::vector<cplx> upsilon_laurent_at_zero(const BParam& b, const QModulus& mod,
                                          int depth);

// Taylor coefficients of Upsilon_b at a regular point v0 (default use: 1/2).
std::vector<cplx> upsilon_taylor_at(const BParam& b, cplx v0,
                                    const QModulus& mod, int depth);

// Small-T limit functions of Lemma-type rescalings:
//   eps = 0:   e^{i pi (b-1) w} / (2 i sin(pi w))
//   eps = 1/2: -e^{i pi b w}
cplx upsilon_limit(const BParam& b, double eps, cplx w);

// Complete elliptic integral K(k) by AGM, 0 <= k < 1.
double elliptic_K(double k);
// K'(k) = K(sqrt(1-k^2))
double elliptic_Kprime(double k);

}  // namespace loopmaps

#endif
