#ifndef LOOPMAPS_TOPREC_HPP
#define LOOPMAPS_TOPREC_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "loopmaps/model.hpp"

namespace loopmaps {

enum class Flavor { LoopModel, UsualMaps };

// colored leg index (l, eps) with eps in {0, 1/2} stored as 0/1
struct ColoredLeg {
    int l;
    int eps;  // 0 -> eps=0, 1 -> eps=1/2

    auto operator<=>(const ColoredLeg&) const = default;
};

using LegTuple = std::vector<ColoredLeg>;

// coefficients C^(g,k)[l1 eps1 ... lk epsk]; symmetric under permutations
class CoefficientTable {
  public:
    CoefficientTable(Flavor flavor, int g, int k)
        : flavor_(flavor), g_(g), k_(k) {}

    Flavor flavor() const { return flavor_; }
    int genus() const { return g_; }
    int legs() const { return k_; }

    cplx at(const LegTuple& key) const;      // 0 when absent
    void add(const LegTuple& key, cplx val);  // accumulates, sorted key
    const std::map<LegTuple, cplx>& entries() const { return entries_; }

    static LegTuple sorted(LegTuple key);

  private:
    Flavor flavor_;
    int g_, k_;
    std::map<LegTuple, cplx> entries_;
};

// Laurent series sum_{j >= lo} c_j w^j with complex coefficients
struct LaurentSeries {
    int lo = 0;
    std::vector<cplx> c;  // c[i] is the coefficient of w^{lo + i}

    cplx coeff(int j) const {
        const int i = j - lo;
        return (i >= 0 && i < int(c.size())) ? c[i] : cplx(0.0);
    }
    cplx residue() const { return coeff(-1); }
    void trim();

    static LaurentSeries mul(const LaurentSeries& a, const LaurentSeries& b,
                             int keep_hi);
    // 1/a for a with nonzero leading coefficient
    static LaurentSeries inverse(const LaurentSeries& a, int keep_hi);
};

// All frame-bound evaluation state of the recursion: the frame, the context,
// Upsilon expansions, Delta_eps G Taylor data. Memoizes coefficient tables.
class RecursionSession {
  public:
    RecursionSession(const ModelContext& ctx, const EllipticFrame& frame,
                     int laurent_depth = 0);  // 0 -> default depth

    const ModelContext& ctx() const { return ctx_; }
    const EllipticFrame& frame() const { return frame_; }
    int depth() const { return depth_; }

    // elementary block B_{eps,l}(v) (loop flavor) or curly-B (usual flavor)
    cplx block_B(Flavor flavor, int eps, int l, cplx v) const;

    // Laurent expansion of B_{sigma,m}(tau + eps + w) around w = 0
    LaurentSeries block_laurent(Flavor flavor, int sigma, int m,
                                int eps) const;

    // even Taylor coefficients a_j of Delta_eps G(w) = sum_j a_j w^{2j+2}
    const std::vector<cplx>& deltaG_even_coeffs(int eps) const;
    cplx y1(int eps) const;  // coefficient of w^2
    cplx y2(int eps) const;  // 6 * coefficient of w^4

    // recursion coefficients
    cplx K_coeff(Flavor flavor, ColoredLeg l, ColoredLeg m, ColoredLeg mp) const;
    cplx Ktilde_coeff(Flavor flavor, ColoredLeg l, ColoredLeg lp,
                      ColoredLeg m) const;

    // initial data tables C^(0,3), C^(1,1)
    CoefficientTable initial_data(Flavor flavor, int g, int k) const;

    // full tables via the residue recursion (memoized)
    const CoefficientTable& recursion_C(Flavor flavor, int g, int k) const;

    // full tables via the trivalent-graph sum
    CoefficientTable graph_sum_C(Flavor flavor, int g, int k,
                                 int initial_leg = 1) const;

    // assembled G^(g,k)(v_1..v_k) from a table and elementary blocks
    cplx assemble_G(Flavor flavor, const CoefficientTable& table,
                    const std::vector<cplx>& v) const;

  private:
    ModelContext ctx_;
    EllipticFrame frame_;
    mutable int depth_;
    // Upsilon Laurent data at 0 and Taylor data at 1/2, per flavor b
    mutable std::vector<cplx> ups_laurent0_[2];
    mutable std::vector<cplx> ups_taylor_half_[2];
    cplx upsilon_const_[2];
    mutable std::vector<cplx> deltaG_[2];  // per eps
    mutable std::map<std::tuple<int, int, int>, CoefficientTable> memo_;
    mutable std::map<std::array<int, 7>, cplx> kcache_;
    mutable std::map<std::array<int, 7>, cplx> ktcache_;

    void ensure_depth(int d) const;
    double bval(Flavor f) const;
};

// ---- trivalent graphs ----

// Trivalent graph with labeled legs 1..k and cyclic order at each vertex.
// Half-edges are 0..2H-1; twin(h) pairs them into edges; at a trivalent
// vertex the three half-edge slots are cyclically ordered.
struct TrivalentGraph {
    int k;                           // number of legs
    int n_vertices;                  // trivalent vertices
    std::vector<std::array<int, 3>> vertex_slots;  // half-edges per vertex
    std::vector<int> leg_slot;       // half-edge at leg i (0-based)
    std::vector<int> twin;           // involution on half-edges

    int num_edges() const { return int(twin.size()) / 2; }
    int betti() const;  // first Betti number

    // canonical exploration word (used for isomorphism rejection)
    std::vector<int> canonical_word() const;
    // reversed cyclic orders at every vertex
    TrivalentGraph mirrored() const;
};

std::vector<TrivalentGraph> enumerate_trivalent_graphs(int g, int k);
// same set, quotient computed relative to a chosen initial leg
std::vector<TrivalentGraph> enumerate_trivalent_graphs_for_leg(int g, int k,
                                                               int initial_leg);

// Exploration of Section "explodocus": visitation orders and the vertex
// classification V', V_t, V_tt, V_o.
enum class VertexClass { Inner, Terminal, BiTerminal, Loop };

struct Exploration {
    std::vector<int> edge_order;    // phi: rank -> edge id
    std::vector<int> visit_order;   // eta: rank -> vertex id or -(leg+1)
    std::vector<std::array<int, 3>> e_labels;  // e0,e1,e2 slots per vertex
    std::vector<VertexClass> vclass;
    // for e1,e2 per vertex: edge is "dead" (leads to a leg or to a vertex
    // visited earlier, so it does not continue the exploration)
    std::vector<std::array<char, 2>> dead;
};

Exploration explore_graph(const TrivalentGraph& G, int initial_leg);

// ---- critical exponents ----

double f_table(Phase phase, double b, int eps, int sigma, int sigmap);
// beta(g, k0, i_half) per the closed form with its exceptional values
double beta_exponent(Phase phase, double b, int g, int k0, int i_half);
// exponent of F^(g,k) with k_half small boundaries (Theorem-of-record form)
double F_critical_exponent(Flavor flavor, Phase phase, double b, int g, int k0,
                           int k_half);

// minimum of sum_v f(sigma[v]) over graphs and admissible colorings with
// i_half legs colored 1/2 (brute force; used to verify beta_exponent)
double beta_by_coloring_minimization(Phase phase, double b, int g, int k0,
                                     int i_half);

}  // namespace loopmaps

#endif
