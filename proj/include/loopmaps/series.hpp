#ifndef LOOPMAPS_SERIES_HPP
#define LOOPMAPS_SERIES_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace loopmaps {
namespace series {

using Rational = boost::multiprecision::cpp_rational;

// Truncation: per-variable caps plus one graded group with a total cap
// (used for the total (g,h) degree window).
struct VarSet {
    std::vector<std::string> names;
    std::vector<int> caps;          // per-variable exponent cap
    std::vector<int> graded;        // indices of the graded group
    int graded_cap = -1;            // total cap on the group, -1 = none

    int index(const std::string& name) const;
};

using Expo = std::vector<int>;

// Exact multivariate series truncated against a shared VarSet.
class MultiSeries {
  public:
    MultiSeries() = default;
    explicit MultiSeries(std::shared_ptr<const VarSet> vars)
        : vars_(std::move(vars)) {}

    static MultiSeries constant(std::shared_ptr<const VarSet> vars,
                                const Rational& c);
    static MultiSeries monomial(std::shared_ptr<const VarSet> vars,
                                const Expo& e, const Rational& c = 1);
    static MultiSeries variable(std::shared_ptr<const VarSet> vars,
                                const std::string& name);

    const std::shared_ptr<const VarSet>& vars() const { return vars_; }
    const std::map<Expo, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Expo& e, const Rational& c);
    Rational coeff(const Expo& e) const;

    MultiSeries& operator+=(const MultiSeries& o);
    MultiSeries& operator-=(const MultiSeries& o);
    MultiSeries operator+(const MultiSeries& o) const;
    MultiSeries operator-(const MultiSeries& o) const;
    MultiSeries operator*(const MultiSeries& o) const;
    MultiSeries operator*(const Rational& c) const;
    bool operator==(const MultiSeries& o) const { return terms_ == o.terms_; }

    // partial derivative, and the Euler operator x d/dx
    MultiSeries derivative(int var) const;
    MultiSeries euler(int var) const;
    // substitute series (over a target VarSet) for each variable
    MultiSeries substitute(const std::vector<MultiSeries>& images,
                           std::shared_ptr<const VarSet> target) const;
    // set one variable to an exact rational
    MultiSeries evaluate(int var, const Rational& value) const;

    // terms in graded-lex order as JSON: {vars:[...], terms:[{exps, num, den}]}
    std::string to_json() const;

  private:
    std::shared_ptr<const VarSet> vars_;
    std::map<Expo, Rational> terms_;

    bool admissible(const Expo& e) const;
};

// ---- gasket machinery ----

// Usual-map disks by the root-edge decomposition:
//   F_l = sum_k g_k F_{l+k-2} + sum_{l1+l2=l-2} F_{l1} F_{l2},  F_0 = u.
// Variables: u, g1..gL (L = max_face_degree); truncated at face_count faces.
struct TutteDisks {
    std::shared_ptr<const VarSet> vars;  // u, g1..gL
    std::vector<MultiSeries> F;          // F[l], l = 0..lmax
};
TutteDisks tutte_disk(int max_face_degree, int lmax, int max_faces);

// annuli of the bending-energy model: R[l][l'] exact in (n, alpha, h),
// proportional to n h^{l+l'}; A[l][l'] = l R[l][l']
struct AnnulusTable {
    std::shared_ptr<const VarSet> vars;
    std::vector<std::vector<MultiSeries>> R, A;
};
AnnulusTable annulus_coeffs(std::shared_ptr<const VarSet> base, int lcap);

// Caps of the O(n) window: variables u, g, h, n, alpha, s with the total
// (g,h) degree bounded by degree_cap.
struct Window {
    int lmax;        // boundary perimeters covered, l <= lmax
    int degree_cap;  // total deg(g) + deg(h)
};

std::shared_ptr<const VarSet> base_varset(const Window& w);

// Renormalized face weights and the nested-loop disk series.
struct RenormalizedModel {
    std::shared_ptr<const VarSet> vars;   // u, g, h, n, alpha, s
    Window window;
    std::vector<MultiSeries> G;           // G[l], l = 1..L (G[0] unused)
    std::vector<MultiSeries> F;           // O(n) disks F[l] = calF_l(G)
    std::vector<MultiSeries> F_gasket;    // calF_l(G) with symbolic data kept
    TutteDisks gasket;                    // symbolic gasket series
    AnnulusTable annuli;

    // calF^{(2)}_{l,m} = m dF_l/dg_m evaluated at renormalized weights
    MultiSeries gasket_cylinder(int l, int m) const;
    // calF^bullet_l = u d/du applied before renormalization
    MultiSeries gasket_pointed(int l) const;
};
RenormalizedModel renormalized_weights(const Window& w);

// s-refined pointed disks F^bullet_l[s] and cylinders F^(2)_{l1,l2}[s]
MultiSeries refined_pointed_disk(const RenormalizedModel& m, int l);
MultiSeries refined_cylinder(const RenormalizedModel& m, int l1, int l2);

// ---- brute-force enumeration ----

struct EnumOptions {
    int perimeter = 1;       // boundary length
    int max_triangles = 4;   // inner faces (all triangles)
    bool loops = true;       // enumerate loop configurations on the dual
    bool pointed = false;    // mark a vertex; s marks separating loops
};

// Exhaustive generation of rooted planar triangulated disks (loops and
// multiple edges allowed) with admissible loop configurations; returns the
// exact polynomial in (u, g, h, n, alpha[, s]) over the given VarSet.
MultiSeries brute_force_enumerate(std::shared_ptr<const VarSet> base,
                                  const EnumOptions& opt);

}  // namespace series
}  // namespace loopmaps

#endif
