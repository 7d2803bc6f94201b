#ifndef LOOPMAPS_JET_HPP
#define LOOPMAPS_JET_HPP

#include <complex>
#include <vector>

namespace loopmaps {

// Arrays of derivatives [f, f', ..., f^(R)] at a point, combined by Leibniz.
namespace jet {

using cplx = std::complex<double>;
using Jet = std::vector<cplx>;

inline double binom(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * double(n - k + j) / double(j);
    return r;
}

inline Jet mul(const Jet& a, const Jet& b) {
    const int R = int(a.size()) - 1;
    Jet c(R + 1, cplx(0.0));
    for (int r = 0; r <= R; ++r)
        for (int j = 0; j <= r; ++j) c[r] += binom(r, j) * a[j] * b[r - j];
    return c;
}

// q = n / d with d[0] != 0
inline Jet div(const Jet& n, const Jet& d) {
    const int R = int(n.size()) - 1;
    Jet q(R + 1);
    for (int r = 0; r <= R; ++r) {
        cplx acc = n[r];
        for (int j = 0; j < r; ++j) acc -= binom(r, j) * q[j] * d[r - j];
        q[r] = acc / d[0];
    }
    return q;
}

inline Jet scale(Jet a, cplx s) {
    for (auto& x : a) x *= s;
    return a;
}

// derivatives of v |-> f(a v + c) given derivatives of f at (a v + c)
inline Jet affine_pullback(const Jet& f, cplx a) {
    Jet g(f.size());
    cplx p = 1.0;
    for (size_t r = 0; r < f.size(); ++r) {
        g[r] = p * f[r];
        p *= a;
    }
    return g;
}

}  // namespace jet
}  // namespace loopmaps

#endif
