#include <algorithm>
#include <numeric>

#include "loopmaps/series.hpp"

namespace loopmaps {
namespace series {

namespace {

// rooted planar triangulated disk under construction: slots are directed
// face sides (boundary face first, then 3 per triangle); twin pairs them.
struct Builder {
    int perimeter;
    int max_triangles;
    std::vector<int> face_next;  // cyclic successor within the face
    std::vector<int> twin;       // -1 while unmatched
    std::vector<int> nxt, prv;   // frontier cycle(s) of unmatched slots
    int unmatched = 0;
    int triangles = 0;

    explicit Builder(int ell, int tmax) : perimeter(ell), max_triangles(tmax) {
        const int total = ell + 3 * tmax;
        face_next.assign(total, -1);
        twin.assign(total, -1);
        nxt.assign(total, -1);
        prv.assign(total, -1);
        for (int i = 0; i < ell; ++i) face_next[i] = (i + 1) % ell;
        // region lies on the other side of the boundary: frontier reversed
        for (int i = 0; i < ell; ++i) {
            nxt[i] = (i - 1 + ell) % ell;
            prv[i] = (i + 1) % ell;
        }
        unmatched = ell;
    }

    int slot_count() const { return perimeter + 3 * triangles; }

    int least_unmatched() const {
        for (int s = 0; s < slot_count(); ++s)
            if (twin[s] < 0) return s;
        return -1;
    }
};

struct MapRecord {
    std::vector<int> face_next;
    std::vector<int> twin;
    int perimeter;
    int triangles;
};

void generate(Builder& b, std::vector<MapRecord>& out) {
    const int s0 = b.least_unmatched();
    if (s0 < 0) {
        out.push_back({b.face_next, b.twin, b.perimeter, b.triangles});
        // trim to used slots
        out.back().face_next.resize(b.slot_count());
        out.back().twin.resize(b.slot_count());
        return;
    }
    // (a) glue a fresh triangle: its side t0 is matched to s0, the other two
    // sides enter the frontier in place of s0
    if (b.triangles < b.max_triangles) {
        const int t0 = b.perimeter + 3 * b.triangles;
        const int t1 = t0 + 1, t2 = t0 + 2;
        b.face_next[t0] = t1;
        b.face_next[t1] = t2;
        b.face_next[t2] = t0;
        b.triangles++;
        b.twin[s0] = t0;
        b.twin[t0] = s0;
        const int p = b.prv[s0], q = b.nxt[s0];
        if (q == s0) {
            // s0 was alone in its cycle: the two new sides form a 2-cycle
            b.nxt[t2] = t1;
            b.prv[t1] = t2;
            b.nxt[t1] = t2;
            b.prv[t2] = t1;
        } else {
            b.nxt[p] = t2;
            b.prv[t2] = p;
            b.nxt[t2] = t1;
            b.prv[t1] = t2;
            b.nxt[t1] = q;
            b.prv[q] = t1;
        }
        b.unmatched += 1;  // -1 +2
        generate(b, out);
        b.unmatched -= 1;
        b.twin[s0] = -1;
        b.twin[t0] = -1;
        b.triangles--;
        if (q != s0) {
            b.nxt[p] = s0;
            b.prv[q] = s0;
        }
    }
    // (b) match s0 with another slot of its own frontier cycle
    for (int s1 = b.nxt[s0]; s1 != s0; s1 = b.nxt[s1]) {
        const int p0 = b.prv[s0], q0 = b.nxt[s0];
        const int p1 = b.prv[s1], q1 = b.nxt[s1];
        b.twin[s0] = s1;
        b.twin[s1] = s0;
        // split the cycle: q0..p1 and q1..p0
        if (q0 != s1) {
            b.nxt[p1] = q0;
            b.prv[q0] = p1;
        }
        if (q1 != s0) {
            b.nxt[p0] = q1;
            b.prv[q1] = p0;
        }
        b.unmatched -= 2;
        generate(b, out);
        b.unmatched += 2;
        b.twin[s0] = -1;
        b.twin[s1] = -1;
        b.nxt[s0] = q0;
        b.prv[s0] = p0;
        b.nxt[s1] = q1;
        b.prv[s1] = p1;
        if (q0 != s1) {
            b.nxt[p1] = s1;
            b.prv[q0] = s0;
        }
        if (q1 != s0) {
            b.nxt[p0] = s0;
            b.prv[q1] = s1;
        }
    }
}

struct MapView {
    const MapRecord& rec;
    std::vector<int> vertex_of;  // slot -> vertex id (head of the slot)
    int n_vertices;
    std::vector<std::array<int, 2>> edges;  // slot pairs (s, twin[s]), s < twin
    std::vector<int> edge_of_slot;
    std::vector<int> face_of;  // slot -> face id, 0 = boundary face

    explicit MapView(const MapRecord& r) : rec(r) {
        const int S = int(r.twin.size());
        // vertices: orbits of s -> face_next[twin[s]]
        vertex_of.assign(S, -1);
        n_vertices = 0;
        for (int s = 0; s < S; ++s) {
            if (vertex_of[s] >= 0) continue;
            int cur = s;
            while (vertex_of[cur] < 0) {
                vertex_of[cur] = n_vertices;
                cur = r.face_next[r.twin[cur]];
            }
            ++n_vertices;
        }
        edge_of_slot.assign(S, -1);
        for (int s = 0; s < S; ++s) {
            if (edge_of_slot[s] >= 0) continue;
            edge_of_slot[s] = int(edges.size());
            edge_of_slot[r.twin[s]] = int(edges.size());
            edges.push_back({s, r.twin[s]});
        }
        face_of.assign(S, 0);
        for (int s = r.perimeter; s < S; ++s)
            face_of[s] = 1 + (s - r.perimeter) / 3;
    }

    bool planar() const {
        const int E = int(edges.size());
        const int F = 1 + rec.triangles;
        return n_vertices - E + F == 2;
    }
};

// loop structure of a crossed-edge subset
struct LoopConfig {
    int n_loops = 0;
    int visited = 0;   // visited triangles
    int bends = 0;     // same-direction successive turn pairs
    std::vector<std::vector<int>> loop_edges;  // edge ids per loop
};

bool decompose_loops(const MapView& mv, const std::vector<char>& crossed,
                     LoopConfig& out) {
    const MapRecord& r = mv.rec;
    const int S = int(r.twin.size());
    // per-face crossed side count: boundary face must have 0, triangles 0 or 2
    std::vector<int> cnt(1 + r.triangles, 0);
    for (int s = 0; s < S; ++s)
        if (crossed[mv.edge_of_slot[s]]) cnt[mv.face_of[s]]++;
    if (cnt[0] != 0) return false;
    for (int f = 1; f <= r.triangles; ++f)
        if (cnt[f] != 0 && cnt[f] != 2) return false;
    out = LoopConfig{};
    for (int f = 1; f <= r.triangles; ++f)
        if (cnt[f] == 2) out.visited++;
    std::vector<char> used(S, 0);
    for (int s = 0; s < S; ++s) {
        if (used[s] || !crossed[mv.edge_of_slot[s]]) continue;
        // walk the loop: enter faces via crossed sides
        std::vector<int> turns;
        std::vector<int> ledges;
        int cur = s;
        do {
            used[cur] = 1;
            // the other crossed side of cur's face
            const int f1 = r.face_next[cur], f2 = r.face_next[f1];
            int other = -1;
            if (crossed[mv.edge_of_slot[f1]])
                other = f1;
            else if (crossed[mv.edge_of_slot[f2]])
                other = f2;
            else
                return false;  // should not happen
            turns.push_back(other == f1 ? 1 : -1);
            ledges.push_back(mv.edge_of_slot[cur]);
            used[other] = 1;
            cur = r.twin[other];
        } while (cur != s);
        const int m = int(turns.size());
        for (int i = 0; i < m; ++i)
            if (turns[i] == turns[(i + 1) % m]) out.bends++;
        std::sort(ledges.begin(), ledges.end());
        ledges.erase(std::unique(ledges.begin(), ledges.end()), ledges.end());
        out.loop_edges.push_back(std::move(ledges));
        out.n_loops++;
    }
    return true;
}

// side of the boundary face vs side of each vertex, for one loop
int separating_count(const MapView& mv, const LoopConfig& cfg, int vertex) {
    const MapRecord& r = mv.rec;
    const int S = int(r.twin.size());
    int count = 0;
    for (const auto& lam : cfg.loop_edges) {
        std::vector<char> in_lam(mv.edges.size(), 0);
        for (int e : lam) in_lam[e] = 1;
        // pieces: 2 per lambda-visited face, 1 otherwise
        std::vector<int> piece(S, -1);
        int npieces = 0;
        std::vector<int> face_first(1 + r.triangles, -1);
        for (int f = 0; f <= r.triangles; ++f) {
            // slots of face f
            std::vector<int> sl;
            for (int s = 0; s < S; ++s)
                if (mv.face_of[s] == f) sl.push_back(s);
            // walk cyclically
            std::vector<int> cyc;
            int cur = sl[0];
            for (size_t i = 0; i < sl.size(); ++i) {
                cyc.push_back(cur);
                cur = r.face_next[cur];
            }
            std::vector<int> cross_pos;
            for (size_t i = 0; i < cyc.size(); ++i)
                if (in_lam[mv.edge_of_slot[cyc[i]]]) cross_pos.push_back(int(i));
            if (cross_pos.size() == 0) {
                const int id = npieces++;
                for (int s : cyc) piece[s] = id;
            } else {
                // exactly 2 for lambda-visited faces
                const int idA = npieces++, idB = npieces++;
                const int c1 = cross_pos[0], c2 = cross_pos[1];
                for (size_t i = 0; i < cyc.size(); ++i) {
                    const int pos = int(i);
                    const bool inA = (pos >= c1 && pos < c2);
                    piece[cyc[pos]] = inA ? idA : idB;
                }
            }
            face_first[f] = piece[sl[0]];
        }
        // union across uncrossed edges
        std::vector<int> par(npieces);
        std::iota(par.begin(), par.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (par[x] != x) x = par[x] = par[par[x]];
            return x;
        };
        for (size_t e = 0; e < mv.edges.size(); ++e) {
            if (in_lam[e]) continue;
            const int a = find(piece[mv.edges[e][0]]);
            const int bb = find(piece[mv.edges[e][1]]);
            if (a != bb) par[a] = bb;
        }
        // side of the boundary face: piece of slot 0; side of the vertex:
        // piece of any corner at it. corner(s) sits between s and
        // face_next(s) at the head of s: it belongs to piece of s when the
        // walk-rule assigned corners [c1, prev(c2)] to piece A -- by the
        // construction above, corner(s) and side s share the piece exactly
        // when s is not the second crossed side; use the corner at slot s
        // directly through vertex_of[s] (head of s) with piece[s].
        int vside = -1;
        for (int s = 0; s < S && vside < 0; ++s)
            if (mv.vertex_of[s] == vertex) vside = find(piece[s]);
        const int bside = find(piece[0]);
        if (vside != bside) ++count;
    }
    return count;
}

}  // namespace

MultiSeries brute_force_enumerate(std::shared_ptr<const VarSet> base,
                                  const EnumOptions& opt) {
    if (opt.max_triangles > 6)
        throw std::invalid_argument("brute_force_enumerate: cap is 6 triangles");
    Builder b(opt.perimeter, opt.max_triangles);
    std::vector<MapRecord> maps;
    generate(b, maps);

    const int iu = base->index("u"), ig = base->index("g"),
              ih = base->index("h"), in = base->index("n"),
              ia = base->index("alpha"), is = base->index("s");
    MultiSeries out(base);

    for (const MapRecord& rec : maps) {
        const MapView mv(rec);
        if (!mv.planar()) continue;  // frontier rule should guarantee this

        std::vector<std::vector<char>> configs;
        const int E = int(mv.edges.size());
        // inner edges: both sides on triangles
        std::vector<int> inner;
        for (int e = 0; e < E; ++e)
            if (mv.face_of[mv.edges[e][0]] != 0 && mv.face_of[mv.edges[e][1]] != 0)
                inner.push_back(e);
        const int ni = int(inner.size());
        const int nsubsets = opt.loops ? (1 << ni) : 1;
        for (int mask = 0; mask < nsubsets; ++mask) {
            std::vector<char> crossed(E, 0);
            for (int i = 0; i < ni; ++i)
                if ((mask >> i) & 1) crossed[inner[i]] = 1;
            LoopConfig cfg;
            if (!decompose_loops(mv, crossed, cfg)) continue;

            Expo e(base->names.size(), 0);
            e[iu] = mv.n_vertices;
            e[ig] = rec.triangles - cfg.visited;
            e[ih] = cfg.visited;
            e[in] = cfg.n_loops;
            e[ia] = cfg.bends;
            if (!opt.pointed) {
                out.add_term(e, 1);
            } else {
                for (int v = 0; v < mv.n_vertices; ++v) {
                    Expo ev = e;
                    ev[is] = separating_count(mv, cfg, v);
                    out.add_term(ev, 1);
                }
            }
        }
    }
    return out;
}

}  // namespace series
}  // namespace loopmaps
