#include "loopmaps/nesting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace loopmaps {

int NestingGraph::total_genus() const {
    int sum = 0;
    for (const auto& v : vertices) sum += v.genus;
    return int(edges.size()) - int(vertices.size()) + 1 + sum;
}

int NestingGraph::degree(int v) const {
    int d = 0;
    for (const auto& e : edges) {
        if (e.a == v) ++d;
        if (e.b == v) ++d;
    }
    return d;
}

int NestingGraph::boundary_count() const {
    int k = 0;
    for (const auto& v : vertices) k += int(v.boundaries.size());
    return k;
}

int NestingGraph::marked_count() const {
    int k = 0;
    for (const auto& v : vertices) k += int(v.marked_points.size());
    return k;
}

NestingClasses validate(const NestingGraph& g) {
    std::vector<std::string> bad;
    const int N = int(g.vertices.size());
    if (N == 0) bad.push_back("no vertices");
    // connectivity
    if (N > 0) {
        std::vector<char> seen(N, 0);
        std::vector<int> stack = {0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (const auto& e : g.edges) {
                for (int w : {e.a == v ? e.b : -1, e.b == v ? e.a : -1})
                    if (w >= 0 && !seen[w]) {
                        seen[w] = 1;
                        stack.push_back(w);
                    }
            }
        }
        for (int v = 0; v < N; ++v)
            if (!seen[v]) {
                bad.push_back("graph not connected");
                break;
            }
    }
    for (const auto& e : g.edges) {
        if (e.a < 0 || e.a >= N || e.b < 0 || e.b >= N)
            bad.push_back("edge endpoint out of range");
        if (e.P < 1) bad.push_back("arm length P(e) < 1");
    }
    for (int v = 0; v < N; ++v) {
        const auto& vert = g.vertices[v];
        if (vert.genus < 0) bad.push_back("negative genus");
        if (vert.boundaries.empty() && vert.marked_points.empty() &&
            2 * vert.genus - 2 + g.degree(v) <= 0)
            bad.push_back("unstable unmarked vertex (2h-2+d <= 0)");
    }
    if (!bad.empty()) throw NestingValidationError(std::move(bad));

    NestingClasses cls;
    auto marks_of = [&](int v) {
        return int(g.vertices[v].boundaries.size()) +
               int(g.vertices[v].marked_points.size());
    };
    std::vector<char> is_v02(N, 0);
    for (int v = 0; v < N; ++v) {
        if (g.vertices[v].genus == 0 && marks_of(v) == 1 && g.degree(v) == 1)
            is_v02[v] = 1;
        (is_v02[v] ? cls.V02 : cls.V_tilde).push_back(v);
    }
    for (int e = 0; e < int(g.edges.size()); ++e) {
        const auto& ed = g.edges[e];
        ((is_v02[ed.a] || is_v02[ed.b]) ? cls.E_un : cls.E_tilde).push_back(e);
    }
    return cls;
}

// ---- enumeration ----

namespace {

std::vector<int> canonical_encoding(const NestingGraph& g) {
    const int N = int(g.vertices.size());
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best;
    do {
        std::vector<int> enc;
        for (int v = 0; v < N; ++v) {
            const auto& vert = g.vertices[perm[v]];
            enc.push_back(vert.genus);
            enc.push_back(int(vert.boundaries.size()));
            for (int b : vert.boundaries) enc.push_back(b);
            enc.push_back(int(vert.marked_points.size()));
            for (int m : vert.marked_points) enc.push_back(m);
        }
        std::vector<int> inv(N);
        for (int i = 0; i < N; ++i) inv[perm[i]] = i;
        std::vector<std::pair<int, int>> es;
        for (const auto& e : g.edges)
            es.push_back({std::min(inv[e.a], inv[e.b]),
                          std::max(inv[e.a], inv[e.b])});
        std::sort(es.begin(), es.end());
        for (auto& [a, b] : es) {
            enc.push_back(a);
            enc.push_back(b);
        }
        if (best.empty() || enc < best) best = enc;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool graph_ok(const NestingGraph& g) {
    try {
        validate(g);
        return true;
    } catch (const NestingValidationError&) {
        return false;
    }
}

}  // namespace

std::vector<NestingGraph> enumerate_nesting_graphs(int g, int k, int kprime) {
    if (g > 2 || k + kprime > 5)
        throw std::invalid_argument(
            "enumerate_nesting_graphs: supported up to g <= 2, k+k' <= 5");
    std::vector<NestingGraph> out;
    std::map<std::vector<int>, int> seen;
    const int Nmax = std::max(1, 2 * (k + kprime) + 4 * g - 2);

    for (int N = 1; N <= Nmax; ++N) {
        // genus vectors with sum <= g
        std::vector<int> hv(N, 0);
        auto genus_rec = [&](auto&& self, int idx, int left) -> void {
            if (idx == N) {
                const int b1 = left;  // remaining genus realized by cycles
                const int edges = b1 + N - 1;
                // assign boundary and marked labels
                std::vector<int> bassign(k, 0), massign(kprime, 0);
                auto labels_rec = [&](auto&& self2, int li) -> void {
                    if (li == k + kprime) {
                        // feasibility: minimal degree sum
                        long mindeg = 0;
                        for (int v = 0; v < N; ++v) {
                            bool marked = false;
                            for (int i = 0; i < k; ++i)
                                if (bassign[i] == v) marked = true;
                            for (int i = 0; i < kprime; ++i)
                                if (massign[i] == v) marked = true;
                            if (marked)
                                mindeg += (N > 1) ? 1 : 0;
                            else if (hv[v] == 0)
                                mindeg += 3;
                            else if (hv[v] == 1)
                                mindeg += 1;
                            else
                                mindeg += (N > 1) ? 1 : 0;
                        }
                        if (mindeg > 2 * edges) return;
                        // enumerate edge multisets
                        std::vector<std::pair<int, int>> pairs;
                        for (int a = 0; a < N; ++a)
                            for (int b = a; b < N; ++b) pairs.push_back({a, b});
                        std::vector<int> pick;
                        auto edge_rec = [&](auto&& self3, size_t start,
                                            int left_e) -> void {
                            if (left_e == 0) {
                                NestingGraph cand;
                                cand.vertices.resize(N);
                                for (int v = 0; v < N; ++v)
                                    cand.vertices[v].genus = hv[v];
                                for (int i = 0; i < k; ++i)
                                    cand.vertices[bassign[i]]
                                        .boundaries.push_back(i + 1);
                                for (int i = 0; i < kprime; ++i)
                                    cand.vertices[massign[i]]
                                        .marked_points.push_back(i + 1);
                                for (int pi : pick)
                                    cand.edges.push_back(
                                        {pairs[pi].first, pairs[pi].second, 1});
                                if (cand.total_genus() != g) return;
                                if (!graph_ok(cand)) return;
                                auto key = canonical_encoding(cand);
                                if (seen.emplace(key, 1).second)
                                    out.push_back(std::move(cand));
                                return;
                            }
                            for (size_t i = start; i < pairs.size(); ++i) {
                                pick.push_back(int(i));
                                self3(self3, i, left_e - 1);
                                pick.pop_back();
                            }
                        };
                        edge_rec(edge_rec, 0, edges);
                        return;
                    }
                    for (int v = 0; v < N; ++v) {
                        if (li < k)
                            bassign[li] = v;
                        else
                            massign[li - k] = v;
                        self2(self2, li + 1);
                    }
                };
                labels_rec(labels_rec, 0);
                return;
            }
            for (int h = 0; h <= left; ++h) {
                hv[idx] = h;
                self(self, idx + 1, left - h);
            }
        };
        genus_rec(genus_rec, 0, g);
    }
    return out;
}

// ---- boundary specs and counts ----

int BoundarySpec::k_half() const {
    int n = 0;
    for (int s : small) n += s;
    return n;
}

BoundarySpec BoundarySpec::parse(const std::string& s) {
    BoundarySpec out;
    for (char c : s) {
        if (c == 'S' || c == 's')
            out.small.push_back(1);
        else if (c == 'L' || c == 'l')
            out.small.push_back(0);
        else
            throw std::invalid_argument("BoundarySpec: use only 'L' and 'S'");
    }
    return out;
}

NestingCounts nesting_counts(const NestingGraph& graph,
                             const BoundarySpec& spec) {
    const int k = graph.boundary_count();
    const int kprime = graph.marked_count();
    if (int(spec.small.size()) != k)
        throw std::invalid_argument("nesting_counts: spec length != k");
    NestingCounts out;
    out.g = graph.total_genus();
    // marked points behave as small boundaries throughout
    out.k = k + kprime;
    out.k_half = spec.k_half() + kprime;
    out.k02_half = 0;
    for (size_t v = 0; v < graph.vertices.size(); ++v) {
        const auto& vert = graph.vertices[v];
        const int marks =
            int(vert.boundaries.size()) + int(vert.marked_points.size());
        if (vert.genus != 0 || marks != 1 || graph.degree(int(v)) != 1)
            continue;
        const bool small = vert.boundaries.empty()
                               ? true  // a marked point counts as small
                               : spec.small[vert.boundaries[0] - 1] == 1;
        if (small) ++out.k02_half;
    }
    return out;
}

static int d_of(Phase phase) {
    if (phase == Phase::Dense) return 1;
    if (phase == Phase::Dilute) return -1;
    throw std::invalid_argument("phase must be dense or dilute");
}

static double c_of(Phase phase, double b) {
    return phase == Phase::Dense ? 1.0 / (1.0 - b) : 1.0;
}

double kappa_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                      Phase phase, double b) {
    validate(graph);
    const NestingCounts c = nesting_counts(graph, spec);
    if (2 * c.g - 2 + c.k <= 0)
        throw std::invalid_argument("kappa_exponent: need 2g-2+k > 0");
    const int d = d_of(phase);
    return (2 * c.g - 2 + c.k) * (d * b / 2.0 - 1.0) - c.k / 2.0 +
           0.75 * c.k_half + (b / 2.0 - 0.25) * c.k02_half;
}

double kappa_s_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                        Phase phase, double n,
                        const std::vector<double>& s_per_edge) {
    const NestingClasses cls = validate(graph);
    if (s_per_edge.size() != graph.edges.size())
        throw std::invalid_argument("kappa_s_exponent: one s per edge");
    const double b = std::acos(n / 2.0) / kPi;
    const NestingCounts c = nesting_counts(graph, spec);
    const int d = d_of(phase);
    // base with B = 0
    double out = (2 * c.g - 2 + c.k) * (d * b / 2.0 - 1.0) - c.k / 2.0 +
                 0.75 * c.k_half - 0.25 * c.k02_half;
    auto bs = [&](int e) { return BParam::from_ns(n, s_per_edge[e]).b; };
    for (int e : cls.E_tilde) out += bs(e);
    for (int v : cls.V02) {
        int incident = -1;
        for (int e = 0; e < int(graph.edges.size()); ++e)
            if (graph.edges[e].a == v || graph.edges[e].b == v) incident = e;
        const auto& vert = graph.vertices[v];
        const bool small = vert.boundaries.empty()
                               ? true
                               : spec.small[vert.boundaries[0] - 1] == 1;
        out += small ? bs(incident) / 2.0 : bs(incident);
    }
    return out;
}

double volume_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                       Phase phase, double b) {
    validate(graph);
    const NestingCounts c = nesting_counts(graph, spec);
    if (2 * c.g - 2 + c.k <= 0)
        throw std::invalid_argument("volume_exponent: need 2g-2+k > 0");
    const int d = d_of(phase);
    const double cc = c_of(phase, b);
    return -1.0 + cc * ((2 * c.g - 2 + c.k) * (1.0 - d * b / 2.0) +
                        c.k_half / 4.0 + (0.25 - b / 2.0) * c.k02_half);
}

CylinderExponents cylinder_volume_exponents(double eps1, double eps2,
                                            Phase phase, double b) {
    const double cc = c_of(phase, b);
    const double x = (eps1 == eps2) ? 0.0 : 0.5;
    return {-1.0 - cc / 2.0 * x, -1.0 - cc * b * x};
}

// ---- large deviations ----

double J_rate(double p, double n) {
    if (!(p > 0.0)) throw std::domain_error("J: p must be positive");
    return p * std::log(2.0 / n * p / std::sqrt(1.0 + p * p)) +
           std::atan(1.0 / p) - std::acos(n / 2.0);
}

double J_sup_form(double p, double n) {
    if (!(p > 0.0)) throw std::domain_error("J_sup_form: p must be positive");
    auto phi = [&](double s) {
        return p * std::log(s) + std::acos(n * s / 2.0) - std::acos(n / 2.0);
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    // phi is concave on (0, 2/n); keep the bracket away from the log endpoint
    double a = 1e-14, bnd = 2.0 / n;
    double x1 = bnd - gr * (bnd - a), x2 = a + gr * (bnd - a);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 200 && (bnd - a) > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (bnd - a);
            f2 = phi(x2);
        } else {
            bnd = x2;
            x2 = x1;
            f2 = f1;
            x1 = bnd - gr * (bnd - a);
            f1 = phi(x1);
        }
    }
    return phi(0.5 * (a + bnd));
}

double saddle_s(double p, double n) {
    if (!(p > 0.0)) throw std::domain_error("saddle_s: p must be positive");
    return 2.0 / n * p / std::sqrt(1.0 + p * p);
}

double saddle_action(double p, double n, double c) {
    const double b = std::acos(n / 2.0) / kPi;
    return c * (kPi * b - J_rate(p, n)) / kPi;
}

double p_optimal(double n) { return n / std::sqrt(4.0 - n * n); }

std::vector<ArmRate> arm_probability_exponents(const NestingGraph& graph,
                                               const BoundarySpec& spec,
                                               Phase phase, double b,
                                               const std::vector<double>& p) {
    const NestingClasses cls = validate(graph);
    const NestingCounts c = nesting_counts(graph, spec);
    if (2 * c.g - 2 + c.k <= 0)
        throw std::invalid_argument("arm_probability_exponents: 2g-2+k <= 0");
    if (p.size() != graph.edges.size())
        throw std::invalid_argument("arm_probability_exponents: one p per edge");
    const double n = 2.0 * std::cos(kPi * b);
    const double cc = c_of(phase, b);
    std::vector<char> small_leaf(graph.vertices.size(), 0);
    for (int v : cls.V02) {
        const auto& vert = graph.vertices[v];
        const bool small = vert.boundaries.empty()
                               ? true
                               : spec.small[vert.boundaries[0] - 1] == 1;
        if (small) small_leaf[v] = 1;
    }
    std::vector<ArmRate> out;
    for (size_t e = 0; e < graph.edges.size(); ++e) {
        if (!(p[e] > 0.0))
            throw std::domain_error("arm_probability_exponents: p(e) <= 0");
        ArmRate r;
        r.jmath = (small_leaf[graph.edges[e].a] || small_leaf[graph.edges[e].b])
                      ? 2
                      : 1;
        r.rate = cc * J_rate(p[e], n) / (r.jmath * kPi);
        out.push_back(r);
    }
    return out;
}

double gaussian_variance(int jmath, double n, double c) {
    if (jmath != 1 && jmath != 2)
        throw std::invalid_argument("gaussian_variance: jmath in {1,2}");
    return std::pow(2.0, 3 - jmath) * n * c /
           (kPi * std::pow(4.0 - n * n, 1.5));
}

CappedCylinderExponents capped_cylinder_exponents(double n, double s,
                                                  double eps2) {
    if (std::abs(std::abs(n * s) - 2.0) < 1e-12)
        throw std::domain_error("capped_cylinder_exponents: ns = +-2 excluded");
    const double bs = BParam::from_ns(n, s).b;
    CappedCylinderExponents out;
    if (eps2 == 0.0) {
        out.hat_k = -0.5;
        out.underline_hat_k = bs - 0.5;
    } else if (eps2 == 0.5) {
        out.hat_k = bs / 2.0;
        out.underline_hat_k = bs / 2.0;
    } else {
        throw std::invalid_argument("capped_cylinder_exponents: eps2 in {0,1/2}");
    }
    out.tilde_k = 0.0;
    out.underline_tilde_k = bs;
    return out;
}

}  // namespace loopmaps
