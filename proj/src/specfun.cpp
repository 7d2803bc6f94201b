#include "loopmaps/specfun.hpp"

#include <algorithm>
#include <cmath>

#include "loopmaps/jet.hpp"

namespace loopmaps {

namespace {

constexpr int kThetaMaxTerms = 512;
constexpr double kSeriesTol = 1e-16;
constexpr int kThetaMaxOrder = 12;
constexpr double kPoleExclusion = 1e-8;

const cplx kI(0.0, 1.0);

}  // namespace

QModulus QModulus::from_T(double T) {
    if (!(T > 0.0)) throw std::invalid_argument("QModulus: T must be positive");
    return QModulus{T};
}

BParam BParam::from_n(double n) {
    if (!(n > 0.0 && n < 2.0))
        throw std::invalid_argument("BParam: n must lie in (0,2)");
    return BParam{std::acos(n / 2.0) / kPi};
}

BParam BParam::from_ns(double n, double s) {
    if (!(std::abs(n * s) < 2.0))
        throw std::invalid_argument("BParam: need |n s| < 2");
    return BParam{std::acos(n * s / 2.0) / kPi};
}

BParam BParam::from_b(double b) {
    if (!(b > 0.0 && b < 1.0))
        throw std::invalid_argument("BParam: b must lie in (0,1)");
    return BParam{b};
}

int theta1_max_order() { return kThetaMaxOrder; }

// theta_1(v | tau) = -sum_m exp(i pi tau (m+1/2)^2 + i pi (v+1/2)(2m+1)),
// differentiated termwise: each term picks up (i pi (2m+1))^r.
std::vector<cplx> theta1_jet(cplx v, cplx tau, int max_order) {
    if (!(tau.imag() > 0.0))
        throw std::invalid_argument("theta1: Im(tau) must be positive");
    if (std::exp(-kPi * tau.imag()) >= 1.0 - 1e-12)
        throw NonConvergenceError("theta1: nome too close to 1");

    std::vector<cplx> sum(max_order + 1, cplx(0.0));
    std::vector<double> mag(max_order + 1, 0.0);

    for (int m = 0; m < kThetaMaxTerms; ++m) {
        double peak = 0.0;
        for (int mm : {m, -1 - m}) {
            const double half = mm + 0.5;
            const cplx base =
                -std::exp(kI * kPi * tau * half * half +
                          kI * kPi * (v + 0.5) * double(2 * mm + 1));
            cplx fac = 1.0;
            const cplx dfac = kI * kPi * double(2 * mm + 1);
            for (int r = 0; r <= max_order; ++r) {
                const cplx term = base * fac;
                sum[r] += term;
                mag[r] = std::max(mag[r], std::abs(sum[r]));
                peak = std::max(peak, std::abs(term) / (mag[r] + 1e-300));
                fac *= dfac;
            }
        }
        if (m >= max_order / 2 + 2 && peak < kSeriesTol) return sum;
    }
    throw NonConvergenceError("theta1: series did not settle within term cap");
}

cplx theta1(cplx v, const QModulus& mod, int deriv_order) {
    if (deriv_order < 0 || deriv_order > kThetaMaxOrder)
        throw std::invalid_argument("theta1: deriv_order out of range");
    return theta1_jet(v, mod.tau(), deriv_order)[deriv_order];
}

namespace {

// Reduce v to the fundamental cell of the lattice Z + tau Z, tracking the
// pseudo-periodicity multiplier e^{i pi b m} across the tau direction.
struct ReducedArg {
    cplx v;
    cplx multiplier;
    cplx removed;  // lattice point that was subtracted
};

ReducedArg reduce_upsilon_arg(const BParam& b, cplx v, const QModulus& mod) {
    const double T = mod.T;
    const long mshift = std::lround(v.imag() / T);
    const long kshift = std::lround(v.real());
    const cplx lattice = cplx(double(kshift), 0.0) + double(mshift) * mod.tau();
    ReducedArg out;
    out.v = v - lattice;
    out.multiplier = std::exp(kI * kPi * b.b * double(mshift));
    out.removed = lattice;
    return out;
}

// Jets of the three modular ingredients of Upsilon_b:
//   Upsilon_b(v) = e^{i pi b v / tau} / (i T)
//                  * theta1'(0 | -1/tau) / theta1(-b/(2 tau) | -1/tau)
//                  * theta1((v - b/2)/tau | -1/tau) / theta1(v/tau | -1/tau)
jet::Jet upsilon_jet_reduced(const BParam& b, cplx v, const QModulus& mod,
                             int R) {
    const cplx tau = mod.tau();
    const cplx tt = -1.0 / tau;  // = i/T

    const cplx c0 = theta1_jet(cplx(0.0), tt, 1)[1] /
                    theta1_jet(-b.b / (2.0 * tau), tt, 0)[0] / (kI * mod.T);

    // e^{i pi b v / tau}
    jet::Jet E(R + 1);
    E[0] = std::exp(kI * kPi * b.b * v / tau);
    const cplx dE = kI * kPi * b.b / tau;
    for (int r = 1; r <= R; ++r) E[r] = E[r - 1] * dE;

    jet::Jet Q = jet::affine_pullback(theta1_jet((v - b.b / 2.0) / tau, tt, R),
                                      1.0 / tau);
    jet::Jet D =
        jet::affine_pullback(theta1_jet(v / tau, tt, R), 1.0 / tau);

    return jet::scale(jet::div(jet::mul(E, Q), D), c0);
}

}  // namespace

std::vector<cplx> upsilon_jet(const BParam& b, cplx v, const QModulus& mod,
                              int max_order) {
    const ReducedArg red = reduce_upsilon_arg(b, v, mod);
    if (std::abs(red.v) < kPoleExclusion)
        throw PoleProximityError("upsilon: argument within exclusion radius of a pole",
                                 red.removed);
    jet::Jet out = upsilon_jet_reduced(b, red.v, mod, max_order);
    return jet::scale(out, red.multiplier);
}

cplx upsilon(const BParam& b, cplx v, const QModulus& mod, int deriv_order) {
    if (deriv_order < 0)
        throw std::invalid_argument("upsilon: negative deriv_order");
    return upsilon_jet(b, v, mod, deriv_order)[deriv_order];
}

cplx upsilon_const(const BParam& b, const QModulus& mod) {
    const cplx tau = mod.tau();
    const cplx tt = -1.0 / tau;
    const cplx z = b.b * tt / 2.0;
    const auto th_z = theta1_jet(z, tt, 2);
    const auto th_0 = theta1_jet(cplx(0.0), tt, 3);
    const cplx itau2 = tau * tau;  // (iT)^2
    return (0.5 * th_z[2] / th_z[0] - th_0[3] / (6.0 * th_0[1]) +
            kI * kPi * b.b * th_z[1] / th_z[0] -
            kPi * kPi * b.b * b.b / 2.0) /
           itau2;
}

std::vector<cplx> upsilon_laurent_at_zero(const BParam& b, const QModulus& mod,
                                          int depth) {
    const int R = depth + 2;
    const cplx tau = mod.tau();
    const cplx tt = -1.0 / tau;

    const cplx c0 = theta1_jet(cplx(0.0), tt, 1)[1] /
                    theta1_jet(-b.b / (2.0 * tau), tt, 0)[0] / (kI * mod.T);

    // numerator N(w) = e^{i pi b w/tau} theta1((w - b/2)/tau), Taylor at 0
    jet::Jet E(R + 1);
    E[0] = 1.0;
    const cplx dE = kI * kPi * b.b / tau;
    for (int r = 1; r <= R; ++r) E[r] = E[r - 1] * dE;
    jet::Jet Q = jet::affine_pullback(theta1_jet(-b.b / (2.0 * tau), tt, R),
                                      1.0 / tau);
    jet::Jet N = jet::mul(E, Q);

    // denominator theta1(w/tau) = w * (d1 + d3 w^2 + ...), odd
    jet::Jet D =
        jet::affine_pullback(theta1_jet(cplx(0.0), tt, R + 1), 1.0 / tau);

    // Taylor coefficients n_k, and of D shifted down one power: s_k = D_{k+1}
    std::vector<cplx> n(R + 1), s(R + 1);
    double fact = 1.0;
    for (int r = 0; r <= R; ++r) {
        if (r > 0) fact *= r;
        n[r] = N[r] / fact;
    }
    fact = 1.0;
    for (int r = 0; r <= R; ++r) {
        fact = 1.0;
        for (int j = 2; j <= r + 1; ++j) fact *= j;
        s[r] = D[r + 1] / fact;
    }
    // Upsilon(w) = c0 * (sum n_k w^k) / (w * sum s_k w^k)
    std::vector<cplx> u(depth + 1);
    for (int k = 0; k <= depth; ++k) {
        cplx acc = (k <= R) ? n[k] : cplx(0.0);
        for (int j = 0; j < k; ++j) acc -= u[j] * s[k - j];
        u[k] = acc / s[0];
    }
    for (auto& x : u) x *= c0;
    return u;  // u[k] = coefficient of w^{k-1}
}

std::vector<cplx> upsilon_taylor_at(const BParam& b, cplx v0,
                                    const QModulus& mod, int depth) {
    auto j = upsilon_jet(b, v0, mod, depth);
    double fact = 1.0;
    for (int r = 0; r <= depth; ++r) {
        if (r > 0) fact *= r;
        j[r] /= fact;
    }
    return j;
}

cplx upsilon_limit(const BParam& b, double eps, cplx w) {
    if (eps == 0.0) {
        if (std::abs(w - std::round(w.real())) < kPoleExclusion &&
            std::abs(w.imag()) < kPoleExclusion)
            throw PoleProximityError("upsilon_limit: pole at integer w",
                                     std::round(w.real()));
        return std::exp(kI * kPi * (b.b - 1.0) * w) /
               (2.0 * kI * std::sin(kPi * w));
    }
    if (eps == 0.5) return -std::exp(kI * kPi * b.b * w);
    throw std::invalid_argument("upsilon_limit: eps must be 0 or 1/2");
}

double elliptic_K(double k) {
    if (!(k >= 0.0 && k < 1.0))
        throw std::domain_error("elliptic_K: need 0 <= k < 1");
    double a = 1.0, g = std::sqrt(1.0 - k * k);
    for (int i = 0; i < 64 && std::abs(a - g) > 1e-17 * a; ++i) {
        const double an = 0.5 * (a + g);
        g = std::sqrt(a * g);
        a = an;
    }
    return kPi / (2.0 * a);
}

double elliptic_Kprime(double k) {
    if (!(k > 0.0 && k <= 1.0))
        throw std::domain_error("elliptic_Kprime: need 0 < k <= 1");
    double a = 1.0, g = k;
    for (int i = 0; i < 64 && std::abs(a - g) > 1e-17 * a; ++i) {
        const double an = 0.5 * (a + g);
        g = std::sqrt(a * g);
        a = an;
    }
    return kPi / (2.0 * a);
}

}  // namespace loopmaps
