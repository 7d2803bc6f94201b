#ifndef LOOPMAPS_NESTING_HPP
#define LOOPMAPS_NESTING_HPP

#include <set>
#include <string>
#include <vector>

#include "loopmaps/model.hpp"

namespace loopmaps {

// Decorated nesting graph: vertices carry genus, boundary labels and marked
// points; edges carry arm lengths P(e) >= 1.
struct NestingVertex {
    int genus = 0;
    std::vector<int> boundaries;     // labels 1..k
    std::vector<int> marked_points;  // labels 1..k'
};

struct NestingEdge {
    int a = 0, b = 0;  // vertex ids, a == b allowed (self-loop)
    long P = 1;        // arm length
};

struct NestingGraph {
    std::vector<NestingVertex> vertices;
    std::vector<NestingEdge> edges;

    int total_genus() const;  // b1(Gamma) + sum of vertex genera
    int degree(int v) const;
    int boundary_count() const;
    int marked_count() const;
};

// Derived vertex/edge classes of the gluing formula.
struct NestingClasses {
    std::vector<int> V_tilde;    // vertices kept in the product over maps
    std::vector<int> V02;        // genus-0, one boundary, one incident edge
    std::vector<int> E_un;       // edges adjacent to V02 vertices
    std::vector<int> E_tilde;    // remaining edges
    // E_glue size: 2 |E_tilde| + |V02|
    int glue_count() const { return 2 * int(E_tilde.size()) + int(V02.size()); }
};

struct NestingValidationError : std::runtime_error {
    std::vector<std::string> violations;
    NestingValidationError(std::vector<std::string> v)
        : std::runtime_error("nesting graph invalid: " +
                             (v.empty() ? std::string() : v.front())),
          violations(std::move(v)) {}
};

// Checks connectivity, stability of unmarked vertices, genus bookkeeping;
// returns the derived classes.
NestingClasses validate(const NestingGraph& g);

// All inequivalent nesting graphs with total genus g, k labeled boundaries,
// k' labeled marked points (arm lengths abstracted away).
std::vector<NestingGraph> enumerate_nesting_graphs(int g, int k, int kprime);

// Per-boundary small/large assignment; marked points count as small.
struct BoundarySpec {
    std::vector<int> small;  // small[i] = 1 if boundary i+1 is small

    int k_half() const;
    static BoundarySpec parse(const std::string& s);  // e.g. "LLS"
};

// counts entering the exponent formulas
struct NestingCounts {
    int g, k, k_half;
    int k02_half;  // small boundaries alone on a genus-0 leaf
};
NestingCounts nesting_counts(const NestingGraph& graph, const BoundarySpec& spec);

// kappa(g,k,k_half,k02_half | B=b): q-exponent of the fixed-nesting-graph
// generating series at s = 1.
double kappa_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                      Phase phase, double b);
// underline-kappa with per-edge s weights (B = 0 base plus b(s) sums)
double kappa_s_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                        Phase phase, double n,
                        const std::vector<double>& s_per_edge);

// volume exponent of Theorem-of-record A
double volume_exponent(const NestingGraph& graph, const BoundarySpec& spec,
                       Phase phase, double b);

// cylinder (g,k) = (0,2) volume exponents for the two nesting graphs
struct CylinderExponents {
    double gamma1;  // single vertex carrying both marks
    double gamma2;  // two marked vertices joined by an arm
};
CylinderExponents cylinder_volume_exponents(double eps1, double eps2,
                                            Phase phase, double b);

// ---- arm-length large deviations ----

double J_rate(double p, double n);          // closed form
double J_sup_form(double p, double n);      // golden-section maximization
double saddle_s(double p, double n);        // s(p) = (2/n) p / sqrt(1+p^2)
double saddle_action(double p, double n, double c);  // c (pi b - J(p))/pi
double p_optimal(double n);                 // n / sqrt(4 - n^2)

struct ArmRate {
    int jmath;    // 2 iff edge incident to a small-boundary-only genus-0 leaf
    double rate;  // c J(p) / (jmath pi)
};
std::vector<ArmRate> arm_probability_exponents(const NestingGraph& graph,
                                               const BoundarySpec& spec,
                                               Phase phase, double b,
                                               const std::vector<double>& p);

double gaussian_variance(int jmath, double n, double c);

// capped-cylinder exponents of the effective parts
struct CappedCylinderExponents {
    double hat_k;            // -1/2 or b(s)/2
    double underline_hat_k;  // b(s)-1/2 or b(s)/2
    double tilde_k;          // 0
    double underline_tilde_k;  // b(s)
};
CappedCylinderExponents capped_cylinder_exponents(double n, double s,
                                                  double eps2);

}  // namespace loopmaps

#endif
