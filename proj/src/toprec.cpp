#include "loopmaps/toprec.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

#include <algorithm>
#include <cmath>

namespace loopmaps {

namespace {
const cplx kI(0.0, 1.0);
constexpr int kMaxDepth = 120;
}

// ---- CoefficientTable ----

LegTuple CoefficientTable::sorted(LegTuple key) {
    std::sort(key.begin(), key.end());
    return key;
}

cplx CoefficientTable::at(const LegTuple& key) const {
    const auto it = entries_.find(sorted(key));
    return it == entries_.end() ? cplx(0.0) : it->second;
}

void CoefficientTable::add(const LegTuple& key, cplx val) {
    entries_[sorted(key)] += val;
}

// ---- LaurentSeries ----

void LaurentSeries::trim() {
    size_t nz = 0;
    while (nz < c.size() && std::abs(c[nz]) == 0.0) ++nz;
    if (nz > 0) {
        c.erase(c.begin(), c.begin() + nz);
        lo += int(nz);
    }
}

LaurentSeries LaurentSeries::mul(const LaurentSeries& a, const LaurentSeries& b,
                                 int keep_hi) {
    LaurentSeries out;
    out.lo = a.lo + b.lo;
    const int len = std::max(0, keep_hi - out.lo + 1);
    out.c.assign(len, cplx(0.0));
    for (size_t i = 0; i < a.c.size(); ++i) {
        if (a.c[i] == cplx(0.0)) continue;
        for (size_t j = 0; j < b.c.size(); ++j) {
            const size_t t = i + j;
            if (t >= out.c.size()) break;
            out.c[t] += a.c[i] * b.c[j];
        }
    }
    return out;
}

LaurentSeries LaurentSeries::inverse(const LaurentSeries& a, int keep_hi) {
    LaurentSeries t = a;
    t.trim();
    if (t.c.empty() || t.c[0] == cplx(0.0))
        throw std::invalid_argument("LaurentSeries::inverse: zero leading term");
    LaurentSeries out;
    out.lo = -t.lo;
    const int len = std::max(0, keep_hi - out.lo + 1);
    out.c.assign(len, cplx(0.0));
    if (len == 0) return out;
    out.c[0] = 1.0 / t.c[0];
    for (int m = 1; m < len; ++m) {
        cplx acc = 0.0;
        for (int j = 1; j <= m && j < int(t.c.size()); ++j)
            acc += t.c[j] * out.c[m - j];
        out.c[m] = -acc / t.c[0];
    }
    return out;
}

// ---- RecursionSession ----

RecursionSession::RecursionSession(const ModelContext& ctx,
                                   const EllipticFrame& frame, int laurent_depth)
    : ctx_(ctx), frame_(frame), depth_(laurent_depth > 0 ? laurent_depth : 32) {
    const QModulus mod = frame_.mod();
    upsilon_const_[0] = upsilon_const(ctx_.bparam(), mod);
    upsilon_const_[1] = upsilon_const(BParam::from_b(0.5), mod);
    depth_ = -depth_;  // force initial fill
    ensure_depth(-depth_);
}

double RecursionSession::bval(Flavor f) const {
    return f == Flavor::LoopModel ? ctx_.b() : 0.5;
}

void RecursionSession::ensure_depth(int d) const {
    if (d <= depth_) return;
    if (d > kMaxDepth)
        throw std::runtime_error(
            "RecursionSession: Laurent depth exceeds hard cap");
    depth_ = d;
    const QModulus mod = frame_.mod();
    const int ups_depth = depth_ + 28;
    for (int f = 0; f < 2; ++f) {
        const BParam b =
            f == 0 ? ctx_.bparam() : BParam::from_b(0.5);
        ups_laurent0_[f] = upsilon_laurent_at_zero(b, mod, ups_depth);
        ups_taylor_half_[f] = upsilon_taylor_at(b, cplx(0.5), mod, ups_depth);
    }
    // Delta_eps G(w) = G(tau+eps+w) + G(tau+eps-w): Taylor data assembled
    // from Upsilon jets at the four shifted base points.
    const BParam b = ctx_.bparam();
    const int R = depth_ + 6;
    const auto gt = ghat_coeffs(ctx_, frame_).gtilde(frame_);
    const cplx vi = frame_.v_inf();
    for (int eps = 0; eps < 2; ++eps) {
        const cplx base = frame_.tau() + 0.5 * eps;
        // G(base + w) = sum_l gt_l/(2 l!) * [ U^(l)(base+w+vi) + (-1)^l U^(l)(base+w-vi)
        //   - (-1)^? ... ] handled atom by atom with chain-rule parities
        const cplx pts[4] = {base + vi, base - vi, -base + vi, -base - vi};
        std::vector<std::vector<cplx>> jets(4);
        for (int a = 0; a < 4; ++a)
            jets[a] = upsilon_jet(b, pts[a], mod, R + 3);
        // Taylor of G(base + w) in w: atom a contributes with w-sign s_a and
        // v_inf-parity p_a: G = sum_l gt_l/(2 l!) * sum_a q_a(l) U^(l+r)(pt_a) s_a^r
        // with q_a(l): +1, (-1)^l, -1, -(-1)^l and s_a: +1, +1, -1, -1.
        std::vector<cplx> taylor(R + 1, cplx(0.0));
        double lfact = 1.0;
        for (int l = 0; l <= 3; ++l) {
            if (l > 0) lfact *= l;
            const double pl = (l % 2 == 0) ? 1.0 : -1.0;
            const double qa[4] = {1.0, pl, -1.0, -pl};
            const double sa[4] = {1.0, 1.0, -1.0, -1.0};
            double rfact = 1.0;
            for (int r = 0; r <= R; ++r) {
                if (r > 0) rfact *= r;
                const double sr = (r % 2 == 0) ? 1.0 : -1.0;
                cplx acc = 0.0;
                for (int a = 0; a < 4; ++a)
                    acc += qa[a] * (sa[a] > 0 ? 1.0 : sr) * jets[a][l + r];
                taylor[r] += gt[l] / (2.0 * lfact) * acc / rfact;
            }
        }
        // even part, coefficients of w^{2j+2}
        std::vector<cplx>& out = deltaG_[eps];
        out.assign(R / 2, cplx(0.0));
        for (int j = 0; 2 * j + 2 <= R; ++j) out[j] = 2.0 * taylor[2 * j + 2];
    }
    // memoized tables and K caches stay valid: every coefficient was computed
    // after ensuring the depth its own indices require, and a deeper rebuild
    // reproduces the same leading data
}

const std::vector<cplx>& RecursionSession::deltaG_even_coeffs(int eps) const {
    return deltaG_[eps];
}

cplx RecursionSession::y1(int eps) const {
    const cplx v = deltaG_[eps][0];
    if (std::abs(v) < 1e-12)
        throw std::runtime_error("deltaG: |y1| < 1e-12, frame is critical");
    return v;
}

cplx RecursionSession::y2(int eps) const { return 6.0 * deltaG_[eps][1]; }

cplx RecursionSession::block_B(Flavor flavor, int eps, int l, cplx v) const {
    const BParam b = BParam::from_b(bval(flavor));
    const double ns = b.n_equiv();
    const QModulus mod = frame_.mod();
    const cplx ts = frame_.tau() + 0.5 * eps;
    const int r = 2 * l + 1;
    // d^{2l}/dv^{2l} of [U'(v+ts) - U'(v-ts) - U'(-v+ts) + U'(-v-ts)]/(4-ns^2)
    const cplx val = upsilon(b, v + ts, mod, r) - upsilon(b, v - ts, mod, r) -
                     upsilon(b, -v + ts, mod, r) + upsilon(b, -v - ts, mod, r);
    return val / (4.0 - ns * ns);
}

LaurentSeries RecursionSession::block_laurent(Flavor flavor, int sigma, int m,
                                              int eps) const {
    // B_{sigma,m}(tau + eps + w) =
    //   [ (e^{2 i pi b} - 1) U^{(2m+1)}(s0 + w)
    //   + (e^{-2 i pi b} - 1) U^{(2m+1)}(s0 - w) ] / (4 - ns^2),  s0 = eps+sigma
    ensure_depth(2 * m + 6);
    const int f = flavor == Flavor::LoopModel ? 0 : 1;
    const double b = bval(flavor);
    const double ns = 2.0 * std::cos(kPi * b);
    const cplx cp = (std::exp(2.0 * kI * kPi * b) - 1.0) / (4.0 - ns * ns);
    const cplx cm = (std::exp(-2.0 * kI * kPi * b) - 1.0) / (4.0 - ns * ns);
    const int r = 2 * m + 1;
    const int hi = depth_;
    LaurentSeries out;

    if (sigma == eps) {
        // s0 = 0 or 1: Laurent data of Upsilon at 0 (period 1)
        const auto& a = ups_laurent0_[f];  // a[i] = coeff of w^{i-1}
        out.lo = -(r + 1);
        out.c.assign(hi - out.lo + 1, cplx(0.0));
        for (int i = 0; i < int(a.size()); ++i) {
            const int j = i - 1;      // power in Upsilon
            const int t = j - r;      // power in Upsilon^{(r)}
            if (t > hi) break;
            double fall = 1.0;        // j (j-1) ... (j-r+1)
            for (int s = 0; s < r; ++s) fall *= double(j - s);
            const cplx der = a[i] * fall;  // coeff of w^t in U^{(r)}(w)
            const double sg = (t % 2 == 0) ? 1.0 : -1.0;  // U^{(r)}(-w) parity
            out.c[t - out.lo] += cp * der + cm * der * sg;
        }
    } else {
        // s0 = 1/2: Taylor data at 1/2
        const auto& a = ups_taylor_half_[f];  // a[i] = coeff of w^i
        out.lo = 0;
        out.c.assign(hi + 1, cplx(0.0));
        for (int i = r; i < int(a.size()); ++i) {
            const int t = i - r;
            if (t > hi) break;
            double fall = 1.0;
            for (int s = 0; s < r; ++s) fall *= double(i - s);
            const cplx der = a[i] * fall;
            const double sg = (t % 2 == 0) ? 1.0 : -1.0;
            out.c[t - out.lo] += cp * der + cm * der * sg;
        }
    }
    return out;
}

namespace {

// flip w -> -w
LaurentSeries parity_flip(const LaurentSeries& a) {
    LaurentSeries out = a;
    for (size_t i = 0; i < out.c.size(); ++i) {
        const int p = out.lo + int(i);
        if (p % 2 != 0) out.c[i] = -out.c[i];
    }
    return out;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

cplx RecursionSession::K_coeff(Flavor flavor, ColoredLeg l, ColoredLeg m,
                               ColoredLeg mp) const {
    // selection rules (selvK): exact zero outside
    if (m.eps == l.eps && mp.eps == l.eps) {
        if (l.l > m.l + mp.l + 2) return 0.0;
    } else if (m.eps == l.eps) {
        if (l.l > m.l + 1) return 0.0;
    } else if (mp.eps == l.eps) {
        if (l.l > mp.l + 1) return 0.0;
    } else {
        if (l.l != 0) return 0.0;
    }
    const std::array<int, 7> ckey = {int(flavor), l.l, l.eps, m.l,
                                     m.eps,       mp.l, mp.eps};
    if (auto it = kcache_.find(ckey); it != kcache_.end()) return it->second;
    const int need = 2 * (m.l + mp.l) + 6;
    ensure_depth(std::max(depth_, need));

    const LaurentSeries B1 = block_laurent(flavor, m.eps, m.l, l.eps);
    const LaurentSeries B2 =
        parity_flip(block_laurent(flavor, mp.eps, mp.l, l.eps));
    // w^{2l+1} / Delta_eps G(w)
    LaurentSeries dg;
    dg.lo = 2;
    dg.c.assign(deltaG_[l.eps].size() * 2, cplx(0.0));
    for (size_t j = 0; j < deltaG_[l.eps].size(); ++j)
        dg.c[2 * j] = deltaG_[l.eps][j];
    const int hi = 2;
    LaurentSeries inv = LaurentSeries::inverse(dg, hi + 2 * (m.l + mp.l) + 6);
    LaurentSeries prod = LaurentSeries::mul(B1, B2, 4);
    prod = LaurentSeries::mul(prod, inv, 1);
    // residue of -w^{2l+1} * prod / (2l+1)!
    const cplx out = -prod.coeff(-1 - (2 * l.l + 1)) / factorial(2 * l.l + 1);
    kcache_[ckey] = out;
    return out;
}

cplx RecursionSession::Ktilde_coeff(Flavor flavor, ColoredLeg l, ColoredLeg lp,
                                    ColoredLeg m) const {
    if (l.eps != lp.eps) return 0.0;
    if (m.eps == l.eps) {
        if (l.l + lp.l > m.l + 1) return 0.0;
    } else {
        if (l.l != 0 || lp.l != 0) return 0.0;
    }
    const std::array<int, 7> ckey = {int(flavor), l.l, l.eps, lp.l,
                                     lp.eps,      m.l, m.eps};
    if (auto it = ktcache_.find(ckey); it != ktcache_.end()) return it->second;
    const int need = 2 * m.l + 6;
    ensure_depth(std::max(depth_, need));

    const LaurentSeries B = block_laurent(flavor, m.eps, m.l, l.eps);
    LaurentSeries dg;
    dg.lo = 2;
    dg.c.assign(deltaG_[l.eps].size() * 2, cplx(0.0));
    for (size_t j = 0; j < deltaG_[l.eps].size(); ++j)
        dg.c[2 * j] = deltaG_[l.eps][j];
    LaurentSeries inv = LaurentSeries::inverse(dg, 2 * m.l + 6);
    LaurentSeries prod = LaurentSeries::mul(B, inv, 1);
    // residue of -w^{2(l+l')+1} * prod / ((2l+1)! (2l')!)
    const cplx out = -prod.coeff(-1 - (2 * (l.l + lp.l) + 1)) /
                     (factorial(2 * l.l + 1) * factorial(2 * lp.l));
    ktcache_[ckey] = out;
    return out;
}

CoefficientTable RecursionSession::initial_data(Flavor flavor, int g,
                                                int k) const {
    CoefficientTable out(flavor, g, k);
    const int f = flavor == Flavor::LoopModel ? 0 : 1;
    if (g == 0 && k == 3) {
        for (int eps = 0; eps < 2; ++eps)
            out.add({{0, eps}, {0, eps}, {0, eps}}, -2.0 / y1(eps));
        return out;
    }
    if (g == 1 && k == 1) {
        for (int eps = 0; eps < 2; ++eps) {
            out.add({{0, eps}}, y2(eps) / (24.0 * y1(eps) * y1(eps)) +
                                    upsilon_const_[f] / y1(eps));
            out.add({{1, eps}}, -1.0 / (24.0 * y1(eps)));
        }
        return out;
    }
    throw std::invalid_argument("initial_data: only (0,3) and (1,1)");
}

const CoefficientTable& RecursionSession::recursion_C(Flavor flavor, int g,
                                                      int k) const {
    if (2 * g - 2 + k <= 0)
        throw std::invalid_argument("recursion_C: need 2g-2+k > 0");
    const auto key = std::make_tuple(int(flavor), g, k);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    CoefficientTable table(flavor, g, k);
    if (2 * g - 2 + k == 1) {
        table = initial_data(flavor, g, k);
        memo_.emplace(key, std::move(table));
        return memo_.at(key);
    }

    auto max_l = [](const CoefficientTable& t) {
        int m = 0;
        for (const auto& [kk, vv] : t.entries())
            for (const auto& leg : kk) m = std::max(m, leg.l);
        return m;
    };

    // dependencies
    const CoefficientTable* sub1 =
        (g >= 1) ? &recursion_C(flavor, g - 1, k + 1) : nullptr;
    const CoefficientTable* sub3 =
        (k >= 2) ? &recursion_C(flavor, g, k - 1) : nullptr;
    std::vector<const CoefficientTable*> splits;  // indexed by h, k' handled below

    int m_bound = 0;
    if (sub1) m_bound = std::max(m_bound, max_l(*sub1));
    if (sub3) m_bound = std::max(m_bound, max_l(*sub3));
    for (int h = 0; h <= g; ++h) {
        for (int kj = 1; kj <= k; ++kj) {
            if (2 * h - 2 + kj > 0 && 2 * (g - h) - 2 + (k - kj) + 1 > 0 &&
                2 * h - 2 + kj < 2 * g - 2 + k)
                m_bound = std::max(m_bound, max_l(recursion_C(flavor, h, kj)));
        }
    }
    const int l1_bound = 2 * m_bound + 2 + 1;
    const int rest_bound = std::max(m_bound, m_bound + 1);

    // candidate sorted key tuples
    std::vector<ColoredLeg> values;
    for (int l = 0; l <= std::max(l1_bound, rest_bound); ++l)
        for (int e = 0; e < 2; ++e) values.push_back({l, e});

    std::vector<LegTuple> keys;
    LegTuple cur;
    auto rec = [&](auto&& self, size_t start) -> void {
        if (cur.size() == size_t(k)) {
            keys.push_back(cur);
            return;
        }
        for (size_t i = start; i < values.size(); ++i) {
            cur.push_back(values[i]);
            self(self, i);
            cur.pop_back();
        }
    };
    rec(rec, 0);

    for (const auto& tkey : keys) {
        const ColoredLeg l1 = tkey[0];
        const LegTuple rest(tkey.begin() + 1, tkey.end());
        cplx acc = 0.0;

        // term 1: K * C^{(g-1,k+1)}
        if (sub1) {
            for (int me = 0; me < 2; ++me)
                for (int mpe = 0; mpe < 2; ++mpe)
                    for (int ml = 0; ml <= m_bound; ++ml)
                        for (int mpl = 0; mpl <= m_bound; ++mpl) {
                            LegTuple skey = rest;
                            skey.push_back({ml, me});
                            skey.push_back({mpl, mpe});
                            const cplx cv = sub1->at(skey);
                            if (cv == cplx(0.0)) continue;
                            acc += K_coeff(flavor, l1, {ml, me}, {mpl, mpe}) * cv;
                        }
        }

        // term 2: stable splittings
        const int nrest = int(rest.size());
        for (int mask = 0; mask < (1 << nrest); ++mask) {
            LegTuple J, Jp;
            for (int i = 0; i < nrest; ++i)
                ((mask >> i) & 1 ? J : Jp).push_back(rest[i]);
            for (int h = 0; h <= g; ++h) {
                const int hp = g - h;
                if (2 * h - 2 + (1 + int(J.size())) <= 0) continue;
                if (2 * hp - 2 + (1 + int(Jp.size())) <= 0) continue;
                const CoefficientTable& A = recursion_C(flavor, h, 1 + int(J.size()));
                const CoefficientTable& B = recursion_C(flavor, hp, 1 + int(Jp.size()));
                for (int me = 0; me < 2; ++me)
                    for (int mpe = 0; mpe < 2; ++mpe)
                        for (int ml = 0; ml <= m_bound; ++ml)
                            for (int mpl = 0; mpl <= m_bound; ++mpl) {
                                LegTuple ka = J;
                                ka.push_back({ml, me});
                                const cplx av = A.at(ka);
                                if (av == cplx(0.0)) continue;
                                LegTuple kb = Jp;
                                kb.push_back({mpl, mpe});
                                const cplx bv = B.at(kb);
                                if (bv == cplx(0.0)) continue;
                                acc += K_coeff(flavor, l1, {ml, me}, {mpl, mpe}) *
                                       av * bv;
                            }
            }
        }

        // term 3: 2 Ktilde * C^{(g,k-1)}
        if (sub3) {
            for (int i = 0; i < nrest; ++i) {
                LegTuple others;
                for (int j = 0; j < nrest; ++j)
                    if (j != i) others.push_back(rest[j]);
                for (int me = 0; me < 2; ++me)
                    for (int ml = 0; ml <= m_bound; ++ml) {
                        LegTuple skey = others;
                        skey.push_back({ml, me});
                        const cplx cv = sub3->at(skey);
                        if (cv == cplx(0.0)) continue;
                        acc += 2.0 * Ktilde_coeff(flavor, l1, rest[i], {ml, me}) *
                               cv;
                    }
            }
        }

        if (acc != cplx(0.0)) table.add(tkey, acc);
    }
    memo_.emplace(key, std::move(table));
    return memo_.at(key);
}

cplx RecursionSession::assemble_G(Flavor flavor, const CoefficientTable& table,
                                  const std::vector<cplx>& v) const {
    if (int(v.size()) != table.legs())
        throw std::invalid_argument("assemble_G: wrong number of arguments");
    cplx acc = 0.0;
    for (const auto& [key, val] : table.entries()) {
        // symmetrize over distinct permutations of the sorted key
        LegTuple perm = key;
        std::map<LegTuple, int> dummy;
        do {
            cplx prod = val;
            for (size_t i = 0; i < perm.size(); ++i)
                prod *= block_B(flavor, perm[i].eps, perm[i].l, v[i]);
            acc += prod;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return acc;
}

// ---- trivalent graphs ----

int TrivalentGraph::betti() const {
    // connected: b1 = E - V + 1 with V counting trivalent vertices and legs
    return num_edges() - (n_vertices + k) + 1;
}

namespace {

struct SlotGraph {
    // slot layout: legs occupy slots 0..k-1; vertex v owns slots
    // k+3v .. k+3v+2 in cyclic order
    int k, nv;
    std::vector<int> twin;

    int slot_count() const { return k + 3 * nv; }
    bool is_leg(int s) const { return s < k; }
    int vertex_of(int s) const { return (s - k) / 3; }
    int cyc_next(int s) const {
        const int v = vertex_of(s), i = (s - k) % 3;
        return k + 3 * v + (i + 1) % 3;
    }
};

TrivalentGraph to_graph(const SlotGraph& sg) {
    TrivalentGraph g;
    g.k = sg.k;
    g.n_vertices = sg.nv;
    g.vertex_slots.resize(sg.nv);
    for (int v = 0; v < sg.nv; ++v)
        g.vertex_slots[v] = {sg.k + 3 * v, sg.k + 3 * v + 1, sg.k + 3 * v + 2};
    g.leg_slot.resize(sg.k);
    for (int i = 0; i < sg.k; ++i) g.leg_slot[i] = i;
    g.twin = sg.twin;
    return g;
}

bool connected(const SlotGraph& sg) {
    std::vector<int> seen(sg.nv, 0);
    std::vector<int> stack;
    auto push_slot = [&](int s) {
        if (!sg.is_leg(s)) {
            const int v = sg.vertex_of(s);
            if (!seen[v]) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    };
    if (sg.k > 0)
        push_slot(sg.twin[0]);
    else
        push_slot(sg.twin[sg.k]);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int i = 0; i < 3; ++i) push_slot(sg.twin[sg.k + 3 * v + i]);
    }
    for (int v = 0; v < sg.nv; ++v)
        if (!seen[v]) return false;
    return true;
}

}  // namespace

std::vector<int> TrivalentGraph::canonical_word() const {
    // deterministic relabeling walk from leg 1; the word reconstructs the
    // rotation system, so equal words <=> isomorphic (legs fixed pointwise)
    std::vector<int> best;
    std::vector<int> word;
    std::vector<int> vlabel(n_vertices, -1);
    int next_label = 0;
    // BFS over slots: queue of (slot, arrival direction)
    std::vector<int> slot_order;
    std::vector<char> slot_seen(twin.size(), 0);
    std::vector<int> queue;
    auto slot_vertex = [&](int s) {
        for (int v = 0; v < n_vertices; ++v)
            for (int i = 0; i < 3; ++i)
                if (vertex_slots[v][i] == s) return v;
        return -1;
    };
    auto leg_of_slot = [&](int s) {
        for (int i = 0; i < k; ++i)
            if (leg_slot[i] == s) return i;
        return -1;
    };
    // canonical slot numbering: explore from each leg in order
    std::vector<int> canon(twin.size(), -1);
    int next_slot = 0;
    std::vector<int> to_visit;
    for (int i = 0; i < k; ++i) to_visit.push_back(leg_slot[i]);
    size_t qi = 0;
    std::vector<int> vfirst(n_vertices, -1);
    while (qi < to_visit.size()) {
        int s = to_visit[qi++];
        if (canon[s] < 0) canon[s] = next_slot++;
        const int t = twin[s];
        if (canon[t] < 0) {
            canon[t] = next_slot++;
            const int v = slot_vertex(t);
            if (v >= 0 && vfirst[v] < 0) {
                vfirst[v] = t;
                if (vlabel[v] < 0) vlabel[v] = next_label++;
                // enqueue the other two slots in cyclic order
                int s1 = t;
                for (int step = 0; step < 2; ++step) {
                    int idx = -1;
                    for (int i = 0; i < 3; ++i)
                        if (vertex_slots[v][i] == s1) idx = i;
                    s1 = vertex_slots[v][(idx + 1) % 3];
                    to_visit.push_back(s1);
                }
            }
        }
    }
    // word: for each slot in canonical order, the canonical ids of its twin
    // and of its cyclic successor (so matching and rotation system are both
    // encoded), plus leg markers
    word.clear();
    std::vector<int> inv(next_slot, -1);
    for (size_t s = 0; s < twin.size(); ++s)
        if (canon[s] >= 0) inv[canon[s]] = int(s);
    auto cyc_next = [&](int s) {
        const int v = slot_vertex(s);
        if (v < 0) return -1;
        int idx = -1;
        for (int i = 0; i < 3; ++i)
            if (vertex_slots[v][i] == s) idx = i;
        return vertex_slots[v][(idx + 1) % 3];
    };
    for (int cs = 0; cs < next_slot; ++cs) {
        const int s = inv[cs];
        word.push_back(canon[twin[s]]);
        const int nx = cyc_next(s);
        word.push_back(nx < 0 ? -1 : canon[nx]);
        word.push_back(leg_of_slot(s));
    }
    best = word;
    return best;
}

TrivalentGraph TrivalentGraph::mirrored() const {
    TrivalentGraph m = *this;
    for (auto& vs : m.vertex_slots) std::swap(vs[1], vs[2]);
    return m;
}

std::vector<TrivalentGraph> enumerate_trivalent_graphs_for_leg(int g, int k,
                                                               int initial_leg) {
    if (2 * g - 2 + k <= 0)
        throw std::invalid_argument("enumerate_trivalent_graphs: 2g-2+k <= 0");
    const int nv = 2 * g - 2 + k;
    SlotGraph sg;
    sg.k = k;
    sg.nv = nv;
    const int S = sg.slot_count();
    sg.twin.assign(S, -1);

    std::vector<TrivalentGraph> out;
    std::set<std::vector<int>> seen;

    auto rec = [&](auto&& self) -> void {
        int s0 = -1;
        for (int s = 0; s < S; ++s)
            if (sg.twin[s] < 0) {
                s0 = s;
                break;
            }
        if (s0 < 0) {
            if (!connected(sg)) return;
            TrivalentGraph gma = to_graph(sg);
            if (gma.betti() != g) return;
            auto w = gma.canonical_word();
            if (seen.insert(w).second) out.push_back(std::move(gma));
            return;
        }
        for (int t = s0 + 1; t < S; ++t) {
            if (sg.twin[t] >= 0) continue;
            if (sg.is_leg(s0) && sg.is_leg(t)) continue;  // leg-leg edge
            sg.twin[s0] = t;
            sg.twin[t] = s0;
            self(self);
            sg.twin[s0] = -1;
            sg.twin[t] = -1;
        }
    };
    rec(rec);

    // The cyclic orders carry weight information only where they change the
    // structure of the recursion's unfolding. A flip of (e1,e2) at a vertex
    // is quotiented away when it leaves the exploration's class structure
    // (vertex classes, first-explored edges, dead edges) unchanged -- the
    // coloring sum and the explicit per-class prefactors absorb it. Flips
    // that alter the structure (e.g. reversing the direction a cycle is
    // explored, which moves the Ktilde vertex) produce genuinely distinct
    // summands and are kept.
    std::map<std::vector<int>, TrivalentGraph> orbits;
    auto structure_of = [initial_leg](const TrivalentGraph& G) {
        const Exploration ex = explore_graph(G, initial_leg);
        std::vector<int> enc;
        auto edge_id = [&](int s) { return std::min(s, G.twin[s]); };
        for (int v = 0; v < G.n_vertices; ++v) {
            enc.push_back(int(ex.vclass[v]));
            enc.push_back(edge_id(ex.e_labels[v][0]));
            const int e1 = edge_id(ex.e_labels[v][1]);
            const int e2 = edge_id(ex.e_labels[v][2]);
            if (ex.vclass[v] == VertexClass::Terminal) {
                // dead/alive identity matters, cyclic position does not
                enc.push_back(ex.dead[v][0] ? e1 : e2);
                enc.push_back(ex.dead[v][0] ? e2 : e1);
            } else {
                enc.push_back(std::min(e1, e2));
                enc.push_back(std::max(e1, e2));
            }
        }
        return enc;
    };
    auto flipped = [](TrivalentGraph G, int v) {
        std::swap(G.vertex_slots[v][1], G.vertex_slots[v][2]);
        return G;
    };
    for (const TrivalentGraph& G : out) {
        const auto base_struct = structure_of(G);
        std::vector<int> flippable;
        for (int v = 0; v < G.n_vertices; ++v)
            if (structure_of(flipped(G, v)) == base_struct) flippable.push_back(v);
        std::vector<int> best = G.canonical_word();
        for (int mask = 1; mask < (1 << flippable.size()); ++mask) {
            TrivalentGraph fl = G;
            for (size_t i = 0; i < flippable.size(); ++i)
                if ((mask >> i) & 1)
                    std::swap(fl.vertex_slots[flippable[i]][1],
                              fl.vertex_slots[flippable[i]][2]);
            best = std::min(best, fl.canonical_word());
        }
        orbits.emplace(best, G);
    }
    out.clear();
    for (auto& [w, G] : orbits) out.push_back(std::move(G));
    return out;
}

std::vector<TrivalentGraph> enumerate_trivalent_graphs(int g, int k) {
    return enumerate_trivalent_graphs_for_leg(g, k, 1);
}

Exploration explore_graph(const TrivalentGraph& G, int initial_leg) {
    if (initial_leg < 1 || initial_leg > G.k)
        throw std::invalid_argument("explore_graph: bad initial leg");
    const int E = G.num_edges();
    // edge ids: map slot -> edge id by pairing
    std::vector<int> edge_of_slot(G.twin.size(), -1);
    std::vector<std::array<int, 2>> edge_slots;
    for (size_t s = 0; s < G.twin.size(); ++s) {
        if (edge_of_slot[s] >= 0) continue;
        const int id = int(edge_slots.size());
        edge_of_slot[s] = id;
        edge_of_slot[G.twin[s]] = id;
        edge_slots.push_back({int(s), G.twin[int(s)]});
    }
    auto slot_vertex = [&](int s) {
        for (int v = 0; v < G.n_vertices; ++v)
            for (int i = 0; i < 3; ++i)
                if (G.vertex_slots[v][i] == s) return v;
        return -1;  // leg
    };
    auto leg_of_slot = [&](int s) {
        for (int i = 0; i < G.k; ++i)
            if (G.leg_slot[i] == s) return i;
        return -1;
    };

    Exploration ex;
    std::vector<char> edge_seen(E, 0);
    std::vector<char> vertex_seen(G.n_vertices, 0);
    std::vector<char> leg_seen(G.k, 0);
    std::vector<int> phi;   // edge ids in exploration order
    std::vector<int> eta;   // vertices (>=0) and legs (-(i+1))

    auto visit_edge = [&](int e) {
        edge_seen[e] = 1;
        phi.push_back(e);
    };
    auto visit_vertex = [&](int v) {
        vertex_seen[v] = 1;
        eta.push_back(v);
    };
    auto visit_leg = [&](int i) {
        leg_seen[i] = 1;
        eta.push_back(-(i + 1));
    };

    const int ls = G.leg_slot[initial_leg - 1];
    visit_leg(initial_leg - 1);
    const int e1 = edge_of_slot[ls];
    visit_edge(e1);
    int vslot = G.twin[ls];
    int v = slot_vertex(vslot);
    if (v < 0) throw std::invalid_argument("explore_graph: leg-leg edge");
    visit_vertex(v);

    // seed: (arrival slot at v, v)
    int seed_slot = vslot;
    auto cyc = [&](int s, int dir) {
        const int vv = slot_vertex(s);
        int idx = -1;
        for (int i = 0; i < 3; ++i)
            if (G.vertex_slots[vv][i] == s) idx = i;
        return G.vertex_slots[vv][(idx + 3 + dir) % 3];
    };

    for (int guard = 0; guard < 10 * (E + 4); ++guard) {
        const int vv = slot_vertex(seed_slot);
        const int sp = cyc(seed_slot, +1);  // e^+
        const int sm = cyc(seed_slot, -1);  // e^-
        const int ep = edge_of_slot[sp], em = edge_of_slot[sm];
        int go_slot = -1;
        if (!edge_seen[em])
            go_slot = sm;
        else if (!edge_seen[ep])
            go_slot = sp;
        if (go_slot < 0) {
            // case 1: backtrack or terminate; termination needs phi total on
            // edges as well (cycles may leave edges after all vertices)
            if (int(eta.size()) == G.n_vertices + G.k && int(phi.size()) == E)
                break;
            // most recent non-leg eta entry owning an unexplored incident edge
            int found = -1;
            for (int j = int(eta.size()) - 1; j >= 0 && found < 0; --j) {
                if (eta[j] < 0) continue;
                const int w = eta[j];
                for (int i = 0; i < 3; ++i)
                    if (!edge_seen[edge_of_slot[G.vertex_slots[w][i]]]) {
                        found = w;
                        break;
                    }
            }
            if (found < 0)
                throw std::logic_error("explore_graph: disconnected graph");
            // maximal explored edge incident to it
            int best_rank = -1, best_slot = -1;
            for (int i = 0; i < 3; ++i) {
                const int e = edge_of_slot[G.vertex_slots[found][i]];
                if (!edge_seen[e]) continue;
                for (int rknk = 0; rknk < int(phi.size()); ++rknk)
                    if (phi[rknk] == e && rknk > best_rank) {
                        best_rank = rknk;
                        best_slot = G.vertex_slots[found][i];
                    }
            }
            seed_slot = best_slot;
            continue;
        }
        const int e = edge_of_slot[go_slot];
        visit_edge(e);
        const int other = G.twin[go_slot];
        const int w = slot_vertex(other);
        if (w < 0) {
            const int li = leg_of_slot(other);
            if (!leg_seen[li]) visit_leg(li);
            // stay at vv (seed unchanged vertex, but mark the new edge rank)
            continue;
        }
        if (w == vv) continue;       // loop edge at the same vertex
        if (!vertex_seen[w]) visit_vertex(w);
        seed_slot = other;
    }

    ex.edge_order = phi;
    ex.visit_order = eta;

    // labels e0,e1,e2 per vertex and classification. An edge counts as dead
    // at a vertex when it leads to a leg or to a vertex visited earlier --
    // i.e. it does not open a new part of the graph. Two live edges give a
    // K vertex, one a Ktilde vertex, none a C^(0,3) vertex; the paper's
    // leg-based wording is the special case of trees.
    std::vector<int> edge_rank(E, 1 << 20);
    for (int r = 0; r < int(phi.size()); ++r) edge_rank[phi[r]] = r;
    std::vector<int> vrank(G.n_vertices, -1);
    for (int r = 0; r < int(eta.size()); ++r)
        if (eta[r] >= 0) vrank[eta[r]] = r;
    ex.e_labels.resize(G.n_vertices);
    ex.vclass.resize(G.n_vertices);
    ex.dead.resize(G.n_vertices);
    for (int vv = 0; vv < G.n_vertices; ++vv) {
        // loop vertex?
        int loop_slot = -1, stem_slot = -1;
        for (int i = 0; i < 3; ++i) {
            const int s = G.vertex_slots[vv][i];
            if (slot_vertex(G.twin[s]) == vv) loop_slot = s;
        }
        if (loop_slot >= 0) {
            for (int i = 0; i < 3; ++i) {
                const int s = G.vertex_slots[vv][i];
                if (s != loop_slot && s != G.twin[loop_slot]) stem_slot = s;
            }
            ex.e_labels[vv] = {stem_slot, loop_slot, G.twin[loop_slot]};
            ex.vclass[vv] = VertexClass::Loop;
            ex.dead[vv] = {1, 1};
            continue;
        }
        int s0 = G.vertex_slots[vv][0];
        for (int i = 1; i < 3; ++i) {
            const int s = G.vertex_slots[vv][i];
            if (edge_rank[edge_of_slot[s]] < edge_rank[edge_of_slot[s0]]) s0 = s;
        }
        const int s1 = cyc(s0, +1), s2 = cyc(s1, +1);
        ex.e_labels[vv] = {s0, s1, s2};
        auto is_dead = [&](int s) {
            const int w = slot_vertex(G.twin[s]);
            if (w < 0) return true;            // leg
            return vrank[w] < vrank[vv];       // closes back on explored part
        };
        const bool d1 = is_dead(s1), d2 = is_dead(s2);
        ex.dead[vv] = {char(d1), char(d2)};
        if (d1 && d2)
            ex.vclass[vv] = VertexClass::BiTerminal;
        else if (d1 || d2)
            ex.vclass[vv] = VertexClass::Terminal;
        else
            ex.vclass[vv] = VertexClass::Inner;
    }
    return ex;
}

CoefficientTable RecursionSession::graph_sum_C(Flavor flavor, int g, int k,
                                               int initial_leg) const {
    CoefficientTable out(flavor, g, k);
    const auto graphs = enumerate_trivalent_graphs_for_leg(g, k, initial_leg);
    const int f = flavor == Flavor::LoopModel ? 0 : 1;

    // bound on internal colors from the selection rules
    const int Mmax = 2 * (2 * g - 2 + k) + 4;
    // candidate leg colors: reuse the recursion table's support plus zero-probes
    const CoefficientTable& ref = recursion_C(flavor, g, k);
    std::set<LegTuple> keys;
    for (const auto& [kk, vv] : ref.entries()) keys.insert(kk);

    for (const TrivalentGraph& G : graphs) {
        const Exploration ex = explore_graph(G, initial_leg);
        // Splitting-type K vertices (their two live edges lead to parts that
        // only meet at the vertex) realize the recursion's ordered sum over
        // the two parts: weight 2 unless swapping the parts is an
        // automorphism.
        double graph_mult = 1.0;
        for (int v = 0; v < G.n_vertices; ++v) {
            if (ex.vclass[v] != VertexClass::Inner) continue;
            auto far_vertex = [&](int slot) {
                const int t = G.twin[slot];
                for (int w = 0; w < G.n_vertices; ++w)
                    for (int i = 0; i < 3; ++i)
                        if (G.vertex_slots[w][i] == t) return w;
                return -1;
            };
            const int wa = far_vertex(ex.e_labels[v][1]);
            const int wb = far_vertex(ex.e_labels[v][2]);
            bool reconnect = (wa == wb);
            if (!reconnect && wa >= 0 && wb >= 0) {
                std::vector<char> seen(G.n_vertices, 0);
                seen[v] = 1;
                std::vector<int> stack = {wa};
                seen[wa] = 1;
                while (!stack.empty() && !reconnect) {
                    const int w = stack.back();
                    stack.pop_back();
                    if (w == wb) reconnect = true;
                    for (int i = 0; i < 3 && !reconnect; ++i) {
                        const int x = far_vertex(G.vertex_slots[w][i]);
                        if (x >= 0 && !seen[x]) {
                            seen[x] = 1;
                            stack.push_back(x);
                        }
                    }
                }
                if (!reconnect && wb >= 0) reconnect = seen[wb];
            }
            if (!reconnect) {
                TrivalentGraph fl = G;
                std::swap(fl.vertex_slots[v][1], fl.vertex_slots[v][2]);
                if (fl.canonical_word() != G.canonical_word()) graph_mult *= 2.0;
            }
        }
        // edge ids
        std::vector<int> edge_of_slot(G.twin.size(), -1);
        int E = 0;
        for (size_t s = 0; s < G.twin.size(); ++s)
            if (edge_of_slot[s] < 0) {
                edge_of_slot[s] = E;
                edge_of_slot[G.twin[s]] = E;
                ++E;
            }
        std::vector<int> leg_edge(G.k);
        for (int i = 0; i < G.k; ++i) leg_edge[i] = edge_of_slot[G.leg_slot[i]];

        for (const LegTuple& key : keys) {
            // leg i (1-based label) carries color key[i-1] -- the table key is
            // sorted; by symmetry of the table, assign sorted colors to legs
            std::vector<ColoredLeg> col(E, {-1, -1});
            bool clash = false;
            for (int i = 0; i < G.k && !clash; ++i) {
                ColoredLeg& c = col[leg_edge[i]];
                if (c.l >= 0 && !(c == key[i])) clash = true;
                c = key[i];
            }
            if (clash) continue;

            // interior edges in exploration order
            std::vector<int> interior;
            for (int r = 0; r < int(ex.edge_order.size()); ++r) {
                const int e = ex.edge_order[r];
                if (col[e].l < 0 &&
                    std::find(interior.begin(), interior.end(), e) ==
                        interior.end())
                    interior.push_back(e);
            }

            cplx total = 0.0;
            auto weight = [&]() -> cplx {
                cplx w = 1.0;
                for (int v = 0; v < G.n_vertices && w != cplx(0.0); ++v) {
                    const auto& lab = ex.e_labels[v];
                    const ColoredLeg c0 = col[edge_of_slot[lab[0]]];
                    const ColoredLeg c1 = col[edge_of_slot[lab[1]]];
                    const ColoredLeg c2 = col[edge_of_slot[lab[2]]];
                    switch (ex.vclass[v]) {
                        case VertexClass::Loop: {
                            if (!(c1 == c0)) return 0.0;  // loop color tied
                            const cplx y = y1(c0.eps);
                            if (c0.l == 0)
                                w *= y2(c0.eps) / (24.0 * y * y) +
                                     upsilon_const_[f] / y;
                            else if (c0.l == 1)
                                w *= -1.0 / (24.0 * y);
                            else
                                return 0.0;
                            break;
                        }
                        case VertexClass::BiTerminal: {
                            if (!(c0.l == 0 && c1.l == 0 && c2.l == 0 &&
                                  c0.eps == c1.eps && c0.eps == c2.eps))
                                return 0.0;
                            w *= -2.0 / y1(c0.eps);
                            break;
                        }
                        case VertexClass::Terminal: {
                            // dead edge supplies the second index of Ktilde;
                            // the factor 2 carries the vertex's two cyclic
                            // orders, which the graph set quotients away
                            const ColoredLeg cl = ex.dead[v][0] ? c1 : c2;
                            const ColoredLeg cm = ex.dead[v][0] ? c2 : c1;
                            w *= 2.0 * Ktilde_coeff(flavor, c0, cl, cm);
                            break;
                        }
                        case VertexClass::Inner:
                            w *= K_coeff(flavor, c0, c1, c2);
                            break;
                    }
                }
                return w;
            };

            auto dfs = [&](auto&& self, size_t idx) -> void {
                if (idx == interior.size()) {
                    total += weight();
                    return;
                }
                for (int e = 0; e < 2; ++e)
                    for (int l = 0; l <= Mmax; ++l) {
                        col[interior[idx]] = {l, e};
                        self(self, idx + 1);
                    }
                col[interior[idx]] = {-1, -1};
            };
            dfs(dfs, 0);
            total *= graph_mult;
            if (const char* dbg = std::getenv("LOOPMAPS_DEBUG_KEY")) {
                std::string want(dbg), have;
                for (auto& c : key)
                    have += std::to_string(c.l) + std::to_string(c.eps);
                if (want == have)
                    std::fprintf(stderr, "  graph %p key %s total %.6e\n",
                                 (const void*)&G, have.c_str(), total.imag());
            }
            if (total != cplx(0.0)) out.add(key, total);
        }
    }
    return out;
}

// ---- critical exponents ----

double f_table(Phase phase, double b, int eps, int sigma, int sigmap) {
    const int d = phase == Phase::Dense ? 1 : -1;
    if (phase == Phase::OffCritical)
        throw std::invalid_argument("f_table: phase must be dense or dilute");
    const double x1 = (eps != sigma) ? 0.5 : 0.0;
    const double x2 = (eps != sigmap) ? 0.5 : 0.0;
    return b * (x1 + x2) + (d * b / 2.0 - 1.0) * (1.0 - 2.0 * (eps ? 0.5 : 0.0));
}

double beta_exponent(Phase phase, double b, int g, int k0, int i_half) {
    if (phase == Phase::OffCritical)
        throw std::invalid_argument("beta_exponent: phase must be critical");
    const int k = k0 + i_half;
    if (2 * g - 2 + k < 1)
        throw std::invalid_argument("beta_exponent: invalid topology");
    const int d = phase == Phase::Dense ? 1 : -1;
    const int beta1 = i_half / 2 + (i_half == 1 ? 2 : 0);
    const int beta2 = 2 * g - 2 + k / 2 + (k0 + (k % 2)) / 2;
    if (beta2 <= 0) return 0.0;
    return beta1 * b / 2.0 + beta2 * (d * b / 2.0 - 1.0);
}

double F_critical_exponent(Flavor flavor, Phase phase, double b, int g, int k0,
                           int k_half) {
    if (phase == Phase::OffCritical)
        throw std::invalid_argument("F_critical_exponent: phase must be critical");
    const int k = k0 + k_half;
    if (2 * g - 2 + k <= 0 && !(g == 0 && k == 2))
        throw std::invalid_argument("F_critical_exponent: invalid topology");
    const int d = phase == Phase::Dense ? 1 : -1;
    const double base = (2 * g - 2 + k) * (d * b / 2.0 - 1.0) - 0.5 * k;
    if (flavor == Flavor::LoopModel) return base + 0.5 * (b + 1.0) * k_half;
    return base + 0.75 * k_half;
}

double beta_by_coloring_minimization(Phase phase, double b, int g, int k0,
                                     int i_half) {
    const int k = k0 + i_half;
    const auto graphs = enumerate_trivalent_graphs(g, k);
    double best = 1e100;
    for (const TrivalentGraph& G : graphs) {
        const Exploration ex = explore_graph(G, 1);
        std::vector<int> edge_of_slot(G.twin.size(), -1);
        int E = 0;
        for (size_t s = 0; s < G.twin.size(); ++s)
            if (edge_of_slot[s] < 0) {
                edge_of_slot[s] = E;
                edge_of_slot[G.twin[s]] = E;
                ++E;
            }
        std::vector<int> col(E, -1);
        // fix leg colors: legs 1..i_half get 1/2, the rest 0 (symmetry)
        bool clash = false;
        for (int i = 0; i < G.k; ++i) {
            const int e = edge_of_slot[G.leg_slot[i]];
            const int want = i < i_half ? 1 : 0;
            if (col[e] >= 0 && col[e] != want) clash = true;
            col[e] = want;
        }
        if (clash) continue;
        std::vector<int> interior;
        for (int e = 0; e < E; ++e)
            if (col[e] < 0) interior.push_back(e);

        auto feasible_cost = [&]() -> double {
            double cost = 0.0;
            for (int v = 0; v < G.n_vertices; ++v) {
                const auto& lab = ex.e_labels[v];
                const int c0 = col[edge_of_slot[lab[0]]];
                const int c1 = col[edge_of_slot[lab[1]]];
                const int c2 = col[edge_of_slot[lab[2]]];
                switch (ex.vclass[v]) {
                    case VertexClass::Loop:
                        if (c1 != c0) return 1e100;
                        break;
                    case VertexClass::BiTerminal:
                        if (!(c0 == c1 && c1 == c2)) return 1e100;
                        break;
                    case VertexClass::Terminal: {
                        const int cl = ex.dead[v][0] ? c1 : c2;
                        if (cl != c0) return 1e100;
                        break;
                    }
                    case VertexClass::Inner:
                        break;
                }
                cost += f_table(phase, b, c0, c1, c2);
            }
            return cost;
        };
        auto dfs = [&](auto&& self, size_t idx) -> void {
            if (idx == interior.size()) {
                best = std::min(best, feasible_cost());
                return;
            }
            for (int c = 0; c < 2; ++c) {
                col[interior[idx]] = c;
                self(self, idx + 1);
            }
            col[interior[idx]] = -1;
        };
        dfs(dfs, 0);
    }
    return best;
}

}  // namespace loopmaps
