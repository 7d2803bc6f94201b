#include "loopmaps/series.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace loopmaps {
namespace series {

int VarSet::index(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return int(i);
    throw std::invalid_argument("VarSet: unknown variable " + name);
}

bool MultiSeries::admissible(const Expo& e) const {
    const VarSet& vs = *vars_;
    for (size_t i = 0; i < e.size(); ++i)
        if (e[i] > vs.caps[i]) return false;
    if (vs.graded_cap >= 0) {
        int total = 0;
        for (int i : vs.graded) total += e[i];
        if (total > vs.graded_cap) return false;
    }
    return true;
}

MultiSeries MultiSeries::constant(std::shared_ptr<const VarSet> vars,
                                  const Rational& c) {
    MultiSeries out(vars);
    if (c != 0) out.terms_[Expo(vars->names.size(), 0)] = c;
    return out;
}

MultiSeries MultiSeries::monomial(std::shared_ptr<const VarSet> vars,
                                  const Expo& e, const Rational& c) {
    MultiSeries out(vars);
    out.add_term(e, c);
    return out;
}

MultiSeries MultiSeries::variable(std::shared_ptr<const VarSet> vars,
                                  const std::string& name) {
    Expo e(vars->names.size(), 0);
    e[vars->index(name)] = 1;
    return monomial(vars, e);
}

void MultiSeries::add_term(const Expo& e, const Rational& c) {
    if (c == 0 || !admissible(e)) return;
    auto it = terms_.find(e);
    if (it == terms_.end()) {
        terms_.emplace(e, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Rational MultiSeries::coeff(const Expo& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
}

MultiSeries& MultiSeries::operator+=(const MultiSeries& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

MultiSeries& MultiSeries::operator-=(const MultiSeries& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
}

MultiSeries MultiSeries::operator+(const MultiSeries& o) const {
    MultiSeries out = *this;
    out += o;
    return out;
}

MultiSeries MultiSeries::operator-(const MultiSeries& o) const {
    MultiSeries out = *this;
    out -= o;
    return out;
}

MultiSeries MultiSeries::operator*(const MultiSeries& o) const {
    MultiSeries out(vars_);
    Expo e(vars_->names.size());
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : o.terms_) {
            for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    return out;
}

MultiSeries MultiSeries::operator*(const Rational& c) const {
    MultiSeries out(vars_);
    if (c == 0) return out;
    for (const auto& [e, cc] : terms_) out.terms_[e] = cc * c;
    return out;
}

MultiSeries MultiSeries::derivative(int var) const {
    MultiSeries out(vars_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0) continue;
        Expo d = e;
        d[var] -= 1;
        out.add_term(d, c * e[var]);
    }
    return out;
}

MultiSeries MultiSeries::euler(int var) const {
    MultiSeries out(vars_);
    for (const auto& [e, c] : terms_)
        if (e[var] != 0) out.add_term(e, c * e[var]);
    return out;
}

MultiSeries MultiSeries::substitute(const std::vector<MultiSeries>& images,
                                    std::shared_ptr<const VarSet> target) const {
    if (images.size() != vars_->names.size())
        throw std::invalid_argument("substitute: one image per variable");
    MultiSeries out(target);
    for (const auto& [e, c] : terms_) {
        MultiSeries prod = MultiSeries::constant(target, c);
        for (size_t i = 0; i < e.size() && !prod.is_zero(); ++i)
            for (int p = 0; p < e[i]; ++p) prod = prod * images[i];
        out += prod;
    }
    return out;
}

MultiSeries MultiSeries::evaluate(int var, const Rational& value) const {
    MultiSeries out(vars_);
    for (const auto& [e, c] : terms_) {
        Rational cc = c;
        for (int p = 0; p < e[var]; ++p) cc *= value;
        Expo d = e;
        d[var] = 0;
        out.add_term(d, cc);
    }
    return out;
}

std::string MultiSeries::to_json() const {
    // graded-lex term order keeps the dump deterministic
    std::vector<std::pair<Expo, Rational>> sorted(terms_.begin(), terms_.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        const int da = std::accumulate(a.first.begin(), a.first.end(), 0);
        const int db = std::accumulate(b.first.begin(), b.first.end(), 0);
        if (da != db) return da < db;
        return a.first < b.first;
    });
    std::ostringstream os;
    os << "{\"vars\":[";
    for (size_t i = 0; i < vars_->names.size(); ++i)
        os << (i ? "," : "") << '"' << vars_->names[i] << '"';
    os << "],\"terms\":[";
    bool first = true;
    for (const auto& [e, c] : sorted) {
        if (!first) os << ",";
        first = false;
        os << "{\"exps\":[";
        for (size_t i = 0; i < e.size(); ++i) os << (i ? "," : "") << e[i];
        os << "],\"num\":" << boost::multiprecision::numerator(c)
           << ",\"den\":" << boost::multiprecision::denominator(c) << "}";
    }
    os << "]}";
    return os.str();
}

// ---- Tutte disks ----

TutteDisks tutte_disk(int max_face_degree, int lmax, int max_faces) {
    auto vs = std::make_shared<VarSet>();
    vs->names.push_back("u");
    vs->caps.push_back(1 << 20);
    for (int l = 1; l <= max_face_degree; ++l) {
        vs->names.push_back("g" + std::to_string(l));
        vs->caps.push_back(max_faces);
        vs->graded.push_back(l);
    }
    vs->graded_cap = max_faces;
    std::shared_ptr<const VarSet> vars = vs;

    // F[m][l]: exactly m faces, perimeter l. Perimeters can transiently grow
    // by up to max_face_degree - 2 per glued face.
    const int lbig = lmax + max_faces * std::max(1, max_face_degree - 2) + 2;
    std::vector<std::vector<MultiSeries>> Fm(
        max_faces + 1, std::vector<MultiSeries>(lbig + 1, MultiSeries(vars)));
    Fm[0][0] = MultiSeries::variable(vars, "u");
    for (int l = 2; l <= lbig; ++l) {
        MultiSeries acc(vars);
        for (int l1 = 0; l1 + 2 <= l; ++l1) acc += Fm[0][l1] * Fm[0][l - 2 - l1];
        Fm[0][l] = acc;
    }
    for (int m = 1; m <= max_faces; ++m) {
        for (int l = 1; l <= lbig; ++l) {
            MultiSeries acc(vars);
            for (int k = 1; k <= max_face_degree; ++k) {
                if (l + k - 2 < 0 || l + k - 2 > lbig) continue;
                acc += MultiSeries::variable(vars, "g" + std::to_string(k)) *
                       Fm[m - 1][l + k - 2];
            }
            for (int l1 = 0; l1 + 2 <= l; ++l1)
                for (int m1 = 0; m1 <= m; ++m1)
                    acc += Fm[m1][l1] * Fm[m - m1][l - 2 - l1];
            Fm[m][l] = acc;
        }
    }
    TutteDisks out;
    out.vars = vars;
    out.F.assign(lmax + 1, MultiSeries(vars));
    for (int l = 0; l <= lmax; ++l)
        for (int m = 0; m <= max_faces; ++m) out.F[l] += Fm[m][l];
    return out;
}

// ---- annuli ----

std::shared_ptr<const VarSet> base_varset(const Window& w) {
    auto vs = std::make_shared<VarSet>();
    vs->names = {"u", "g", "h", "n", "alpha", "s"};
    const int D = w.degree_cap;
    vs->caps = {3 * D + w.lmax + 4, D, D, D + 1, 2 * D + 2, D + 1};
    vs->graded = {1, 2};  // total (g,h) degree window
    vs->graded_cap = D;
    return vs;
}

AnnulusTable annulus_coeffs(std::shared_ptr<const VarSet> base, int lcap) {
    AnnulusTable out;
    out.vars = base;
    const int in = base->index("n"), ia = base->index("alpha"),
              ih = base->index("h");
    out.R.assign(lcap + 1, std::vector<MultiSeries>(lcap + 1, MultiSeries(base)));
    out.A = out.R;
    auto binom = [](long nn, long kk) {
        Rational r = 1;
        for (long j = 1; j <= kk; ++j) r = r * (nn - kk + j) / j;
        return r;
    };
    for (int l = 0; l <= lcap; ++l)
        for (int lp = 0; lp <= lcap; ++lp) {
            if (l + lp == 0) continue;  // R_{0,0} = 0
            // [x^l z^l'] of -n log(1 - alpha h (x+z) - (1-alpha^2) h^2 x z):
            // R_{l,l'} = n h^{l+l'} sum_i (1/j) C(j,i) C(j-i, l-i)
            //            alpha^{l+l'-2i} (1-alpha^2)^i  with j = l+l'-i
            MultiSeries acc(base);
            for (int i = 0; i <= std::min(l, lp); ++i) {
                const int j = l + lp - i;
                if (j < 1) continue;
                const Rational c = binom(j, i) * binom(j - i, l - i) / j;
                for (int t = 0; t <= i; ++t) {
                    Rational ct = c * binom(i, t);
                    if (t % 2 == 1) ct = -ct;
                    Expo e(base->names.size(), 0);
                    e[in] = 1;
                    e[ih] = l + lp;
                    e[ia] = (l + lp - 2 * i) + 2 * t;
                    acc.add_term(e, ct);
                }
            }
            out.R[l][lp] = acc;
            out.A[l][lp] = acc * Rational(l);
        }
    return out;
}

// ---- renormalized weights ----

RenormalizedModel renormalized_weights(const Window& w) {
    RenormalizedModel out;
    out.window = w;
    out.vars = base_varset(w);
    const int D = w.degree_cap;
    // one size for face degrees, boundary lengths and annulus indices; the
    // h-grading of A kills everything beyond the window automatically
    const int L = std::max({3, D, w.lmax});
    out.annuli = annulus_coeffs(out.vars, L);
    out.gasket = tutte_disk(L, L, D);

    const MultiSeries gvar = MultiSeries::variable(out.vars, "g");
    const MultiSeries uvar = MultiSeries::variable(out.vars, "u");

    auto eval_gasket = [&](const MultiSeries& sym,
                           const std::vector<MultiSeries>& Gcur) {
        std::vector<MultiSeries> images;
        images.reserve(L + 1);
        images.push_back(uvar);
        for (int l = 1; l <= L; ++l) images.push_back(Gcur[l]);
        return sym.substitute(images, out.vars);
    };

    std::vector<MultiSeries> G(L + 1, MultiSeries(out.vars));
    G[3] = gvar;
    bool stabilized = false;
    for (int iter = 0; iter <= D + 2 && !stabilized; ++iter) {
        std::vector<MultiSeries> F(L + 1, MultiSeries(out.vars));
        F[0] = uvar;
        for (int lp = 1; lp <= L; ++lp)
            F[lp] = eval_gasket(out.gasket.F[lp], G);
        std::vector<MultiSeries> Gn(L + 1, MultiSeries(out.vars));
        Gn[3] = gvar;
        for (int l = 1; l <= L; ++l)
            for (int lp = 0; lp <= L; ++lp)
                Gn[l] += out.annuli.A[l][lp] * F[lp];
        stabilized = true;
        for (int l = 1; l <= L; ++l)
            if (!(Gn[l] == G[l])) stabilized = false;
        G = std::move(Gn);
    }
    if (!stabilized)
        throw std::runtime_error(
            "renormalized_weights: fixed point failed to stabilize (grading)");
    out.G = G;
    out.F.assign(L + 1, MultiSeries(out.vars));
    out.F[0] = uvar;
    for (int l = 1; l <= L; ++l) out.F[l] = eval_gasket(out.gasket.F[l], G);
    return out;
}

MultiSeries RenormalizedModel::gasket_cylinder(int l, int m) const {
    const int L = int(G.size()) - 1;
    if (m < 1 || m > L || l < 1 || l > L)
        return MultiSeries(vars);
    const MultiSeries sym =
        gasket.F[l].derivative(gasket.vars->index("g" + std::to_string(m)));
    std::vector<MultiSeries> images;
    images.push_back(MultiSeries::variable(vars, "u"));
    for (int ll = 1; ll <= L; ++ll) images.push_back(G[ll]);
    return sym.substitute(images, vars) * Rational(m);
}

MultiSeries RenormalizedModel::gasket_pointed(int l) const {
    const int L = int(G.size()) - 1;
    if (l == 0) return MultiSeries::variable(vars, "u");
    const MultiSeries sym = gasket.F[l].euler(gasket.vars->index("u"));
    std::vector<MultiSeries> images;
    images.push_back(MultiSeries::variable(vars, "u"));
    for (int ll = 1; ll <= L; ++ll) images.push_back(G[ll]);
    return sym.substitute(images, vars);
}

MultiSeries refined_pointed_disk(const RenormalizedModel& m, int l) {
    const int L = int(m.G.size()) - 1;
    const MultiSeries svar = MultiSeries::variable(m.vars, "s");
    // precompute the gasket data once
    std::vector<MultiSeries> pointed(L + 1, MultiSeries(m.vars));
    std::vector<std::vector<MultiSeries>> cyl(
        L + 1, std::vector<MultiSeries>(L + 1, MultiSeries(m.vars)));
    for (int ll = 0; ll <= L; ++ll) {
        pointed[ll] = m.gasket_pointed(ll);
        for (int a = 1; a <= L; ++a) cyl[ll][a] = m.gasket_cylinder(ll, a);
    }
    // F*_l[s] = calF*_l + s sum_{a>=1,b>=0} calF2_{l,a} R_{a,b} F*_b[s]
    std::vector<MultiSeries> Fb(L + 1, MultiSeries(m.vars));
    bool stabilized = false;
    for (int it = 0; it <= m.window.degree_cap + 2 && !stabilized; ++it) {
        std::vector<MultiSeries> next(L + 1, MultiSeries(m.vars));
        stabilized = true;
        for (int ll = 0; ll <= L; ++ll) {
            MultiSeries acc = pointed[ll];
            for (int a = 1; a <= L; ++a) {
                if (cyl[ll][a].is_zero()) continue;
                MultiSeries inner(m.vars);
                for (int b = 0; b <= L; ++b) inner += m.annuli.R[a][b] * Fb[b];
                acc += svar * cyl[ll][a] * inner;
            }
            if (!(acc == Fb[ll])) stabilized = false;
            next[ll] = std::move(acc);
        }
        Fb = std::move(next);
    }
    if (!stabilized)
        throw std::runtime_error("refined_pointed_disk: no stabilization");
    return Fb[l];
}

MultiSeries refined_cylinder(const RenormalizedModel& m, int l1, int l2) {
    const int L = int(m.G.size()) - 1;
    const MultiSeries svar = MultiSeries::variable(m.vars, "s");
    std::vector<std::vector<MultiSeries>> cyl(
        L + 1, std::vector<MultiSeries>(L + 1, MultiSeries(m.vars)));
    for (int ll = 1; ll <= L; ++ll)
        for (int a = 1; a <= L; ++a) cyl[ll][a] = m.gasket_cylinder(ll, a);
    std::vector<MultiSeries> base(L + 1, MultiSeries(m.vars));
    for (int b0 = 1; b0 <= L; ++b0) base[b0] = m.gasket_cylinder(b0, l2);
    // col[b0] = F2_{b0,l2}[s] = calF2_{b0,l2}
    //           + s sum_{a>=1,b>=0} calF2_{b0,a} R_{a,b} col[b]
    std::vector<MultiSeries> col(L + 1, MultiSeries(m.vars));
    bool stabilized = false;
    for (int it = 0; it <= m.window.degree_cap + 2 && !stabilized; ++it) {
        std::vector<MultiSeries> next(L + 1, MultiSeries(m.vars));
        stabilized = true;
        for (int b0 = 1; b0 <= L; ++b0) {
            MultiSeries acc = base[b0];
            for (int a = 1; a <= L; ++a) {
                if (cyl[b0][a].is_zero()) continue;
                MultiSeries inner(m.vars);
                for (int b = 0; b <= L; ++b) inner += m.annuli.R[a][b] * col[b];
                acc += svar * cyl[b0][a] * inner;
            }
            if (!(acc == col[b0])) stabilized = false;
            next[b0] = std::move(acc);
        }
        col = std::move(next);
    }
    if (!stabilized)
        throw std::runtime_error("refined_cylinder: no stabilization");
    return col[l1];
}

}  // namespace series
}  // namespace loopmaps
