#include "loopmaps/geometry.hpp"

#include <cmath>

#include "loopmaps/jet.hpp"

namespace loopmaps {

namespace {

const cplx kI(0.0, 1.0);

// theta_1 jets with an automatic modular transform when Im(tau) is small:
//   theta1(v|tau) = i e^{-i pi v^2/tau} / sqrt(-i tau) * theta1(v/tau|-1/tau).
jet::Jet theta1_jet_auto(cplx v, cplx tau, int R) {
    if (tau.imag() >= 1.0) return theta1_jet(v, tau, R);
    jet::Jet G(R + 1);
    G[0] = kI * std::exp(-kI * kPi * v * v / tau) / std::sqrt(-kI * tau);
    const cplx a = -2.0 * kI * kPi / tau;
    for (int r = 1; r <= R; ++r) {
        G[r] = a * v * G[r - 1];
        if (r >= 2) G[r] += a * double(r - 1) * G[r - 2];
    }
    jet::Jet B = jet::affine_pullback(theta1_jet(v / tau, -1.0 / tau, R),
                                      1.0 / tau);
    return jet::mul(G, B);
}

// integrand of the period integral, 1/sqrt((y-gm)(y-gp)(y-sgp)(y-sgm))
double period_integrand(const Branchpoints& bp, double y) {
    return 1.0 / std::sqrt((y - bp.gm) * (y - bp.gp) * (y - bp.sgp) *
                           (y - bp.sgm));
}

// int_{sgm}^{infty} dy / sqrt(prod (y - e_i)), via y = sgm + t^2/(1-t),
// composite Gauss-Legendre (the substituted integrand is analytic on [0,1]).
double tail_period_integral(const Branchpoints& bp) {
    static std::vector<double> nodes, weights;
    if (nodes.empty()) {
        const int N = 48;
        nodes.resize(N);
        weights.resize(N);
        for (int i = 0; i < N; ++i) {
            // Gauss-Legendre on [0,1] by Newton on Legendre polynomials
            double x = std::cos(kPi * (i + 0.75) / (N + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= N; ++j) {
                    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= N; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = N * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = 0.5 * (x + 1.0);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
    }
    double acc = 0.0;
    const int panels = 6;
    for (int p = 0; p < panels; ++p) {
        const double a = double(p) / panels, w = 1.0 / panels;
        for (size_t i = 0; i < nodes.size(); ++i) {
            const double t = a + w * nodes[i];
            const double y = bp.sgm + t * t / (1.0 - t);
            const double dydt = t * (2.0 - t) / ((1.0 - t) * (1.0 - t));
            acc += w * weights[i] * period_integrand(bp, y) * dydt;
        }
    }
    return acc;
}

cplx x_norm_constant(const EllipticFrame& fr) {
    const cplx t2 = 2.0 * fr.tau();
    const cplx vi = fr.v_inf();
    return -kI * fr.C * theta1_jet_auto(cplx(0.0), t2, 1)[1] *
           theta1_jet_auto(2.0 * vi, t2, 0)[0] /
           (theta1_jet_auto(vi - fr.tau(), t2, 0)[0] *
            theta1_jet_auto(vi + fr.tau(), t2, 0)[0]);
}

cplx x_theta_eval(const EllipticFrame& fr, cplx v) {
    const cplx t2 = 2.0 * fr.tau();
    const cplx vi = fr.v_inf();
    return fr.bp.gp + x_norm_constant(fr) *
                          theta1_jet_auto(v - fr.tau(), t2, 0)[0] *
                          theta1_jet_auto(v + fr.tau(), t2, 0)[0] /
                          (theta1_jet_auto(v - vi, t2, 0)[0] *
                           theta1_jet_auto(v + vi, t2, 0)[0]);
}

cplx reduce_x_arg(cplx v, double T) {
    v -= std::round(v.imag() / (2.0 * T)) * cplx(0.0, 2.0 * T);
    v -= std::round(v.real());
    return v;
}

}  // namespace

void Branchpoints::check_ordering() const {
    if (!(gm < gp && gp < sgp && sgp < sgm))
        throw std::invalid_argument(
            "Branchpoints: ordering gm < gp < sgp < sgm violated");
}

bool Branchpoints::degenerate(double tol) const {
    return (gp - gm) < tol || (sgp - gp) < tol || (sgm - sgp) < tol;
}

EllipticFrame build_parametrization(const Branchpoints& bp) {
    bp.check_ordering();
    if (bp.degenerate())
        throw DegenerateFrameError(
            "build_parametrization: coinciding endpoints; use the critical-limit "
            "operations instead");

    EllipticFrame fr;
    fr.bp = bp;
    fr.k = std::sqrt((bp.sgm - bp.gm) * (bp.sgp - bp.gp) /
                     ((bp.sgm - bp.gp) * (bp.sgp - bp.gm)));
    const double Kp = elliptic_Kprime(fr.k);
    fr.T = elliptic_K(fr.k) / (2.0 * Kp);
    fr.C = std::sqrt((bp.sgp - bp.gm) * (bp.sgm - bp.gp)) / (4.0 * Kp);
    fr.E1 = bp.gm + bp.gp + bp.sgp + bp.sgm;
    fr.E2 = bp.gm * (bp.gp + bp.sgp + bp.sgm) + bp.gp * (bp.sgp + bp.sgm) +
            bp.sgp * bp.sgm;
    fr.E3 = bp.gm * bp.gp * bp.sgp + bp.gm * bp.gp * bp.sgm +
            bp.gm * bp.sgp * bp.sgm + bp.gp * bp.sgp * bp.sgm;

    // w_inf: the image of x = infinity on the segment v = 1/2 + tau w. When
    // the frame is symmetric under x <-> K - x (the alpha = 1 involution
    // pattern sgp + gp = sgm + gm), w_inf = 1/2 exactly. Otherwise evaluate
    // the complete period integral; the incomplete integral and any zero
    // search through x(v) itself are avoided -- near the symmetric point the
    // corner values depend only quadratically on w_inf, so locating the pole
    // through the parametrization is noise-limited.
    if (std::abs((bp.sgp + bp.gp) - (bp.sgm + bp.gm)) <
        1e-13 * (std::abs(bp.sgm) + std::abs(bp.gm) + 1.0)) {
        fr.w_inf = 0.5;
    } else {
        fr.w_inf = fr.C * tail_period_integral(bp) / fr.T;
    }
    if (!(fr.w_inf > 0.0 && fr.w_inf < 1.0))
        throw std::runtime_error("build_parametrization: w_inf not in (0,1)");
    return fr;
}

std::vector<cplx> x_jet(const EllipticFrame& fr, cplx v, int max_order) {
    const cplx t2 = 2.0 * fr.tau();
    const cplx vi = fr.v_inf();
    v = reduce_x_arg(v, fr.T);
    for (cplx pole : {vi, -vi, vi - 1.0, -vi + 1.0, vi - t2, -vi + t2}) {
        if (std::abs(v - pole) < 1e-8)
            throw PoleProximityError("x_of_v: v within exclusion radius of v_inf",
                                     pole);
    }
    jet::Jet num = jet::mul(theta1_jet_auto(v - fr.tau(), t2, max_order),
                            theta1_jet_auto(v + fr.tau(), t2, max_order));
    jet::Jet den = jet::mul(theta1_jet_auto(v - vi, t2, max_order),
                            theta1_jet_auto(v + vi, t2, max_order));
    jet::Jet out = jet::scale(jet::div(num, den), x_norm_constant(fr));
    out[0] += fr.bp.gp;
    return out;
}

cplx x_of_v(const EllipticFrame& fr, cplx v, int deriv_order) {
    return x_jet(fr, v, deriv_order)[deriv_order];
}

std::vector<cplx> x_infinity_expansion(const EllipticFrame& fr, int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("x_infinity_expansion: order must be 0..3");
    const double E1 = fr.E1, E2 = fr.E2, E3 = fr.E3, C = fr.C;
    std::vector<cplx> coeffs = {
        -kI * C,
        E1 / 4.0,
        (kI / C) * (3.0 * E1 * E1 - 8.0 * E2) / 48.0,
        (-E1 * E1 * E1 + 4.0 * E1 * E2 - 8.0 * E3) / (64.0 * C * C),
    };
    coeffs.resize(order + 1);
    return coeffs;
}

cplx x_critical_limit(double eps, cplx w, const CriticalFrame& star) {
    const double amp =
        std::sqrt((star.sgm_star - star.gp_star) * (star.gp_star - star.gm_star));
    const double sw = std::sin(kPi * star.w_inf_star);
    if (eps == 0.0) {
        const cplx c = std::cos(kPi * w / 2.0);
        return 8.0 * amp * sw * c * c;
    }
    if (eps == 0.5) {
        const cplx den = std::cos(kPi * w) - std::cos(kPi * star.w_inf_star);
        if (std::abs(den) < 1e-12)
            throw PoleProximityError("x_critical_limit: pole at w = +-w_inf*",
                                     star.w_inf_star);
        return amp * sw / den;
    }
    throw std::invalid_argument("x_critical_limit: eps must be 0 or 1/2");
}

}  // namespace loopmaps
