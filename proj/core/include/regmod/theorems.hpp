// regmod — quantitative theorem verifiers.
//
// Each verifier instantiates one quantitative statement of the regularity
// calculus on concrete maps.  It re-certifies every hypothesis through the
// moduli checkers (caller-supplied constants are never trusted), re-checks
// the numeric side conditions exactly, evaluates the statement's predicted
// constants, and then verifies the conclusion independently on the composite
// map the statement is about (difference map, pointwise sum, solution map).
// The outcome is a report pairing named hypothesis certificates with the
// conclusion certificate and tightness notes comparing each predicted
// constant against an independently estimated bracket.
//
// Precondition violations (failed side conditions, references off the graph)
// are recorded in the report and leave the conclusion unasserted.  A report
// that would pair all-holding hypotheses with a failing conclusion signals a
// defect in this library itself and throws instead of returning.

#ifndef REGMOD_THEOREMS_HPP
#define REGMOD_THEOREMS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regmod/map.hpp"
#include "regmod/moduli.hpp"
#include "regmod/scalar.hpp"

namespace regmod {

// One named hypothesis: the certificate that backs it and, when the
// hypothesis is a modulus bound, the estimator bracket it came from.
struct Hypothesis {
  std::string name;
  Certificate certificate;
  std::optional<ModulusBracket> bracket;
};

// The named assumptions of one statement.  Every numeric constant in a
// bundle is backed by a certificate or bracket; side conditions are checked
// exactly by the owning verifier.
struct HypothesisBundle {
  std::vector<Hypothesis> items;

  const Hypothesis* find(std::string_view name) const;
  bool all_hold() const;
};

struct PredictedConstant {
  std::string name;
  Scalar value;
};

// Predicted constant vs the independently estimated bracket.  For guaranteed
// rates (lower bounds on openness) tight means the bracket's upper end equals
// the prediction; for guaranteed bounds (upper bounds on Lipschitz or
// regularity constants) tight means the bracket's lower end reaches it.
struct Tightness {
  std::string constant;
  Scalar predicted;
  Scalar independent_lo;
  ExtScalar independent_hi;
  bool tight = false;
  std::string note;
};

struct TheoremReport {
  std::string theorem;
  HypothesisBundle hypotheses;
  std::vector<PredictedConstant> predicted;
  Certificate conclusion;
  std::vector<Tightness> tightness;
  // Nonempty when a precondition failed; the conclusion is then unasserted.
  std::string precondition_failure;

  std::optional<Scalar> predicted_value(std::string_view name) const;
  bool hypotheses_hold() const;
  // False only for the defect pairing (all hypotheses hold, conclusion
  // Fails); verifiers throw before returning such a report.
  bool sound() const;
};

// Localization radii for the difference-of-multifunctions statements: the
// closed windows on which the two graphs are certified closed, and the open
// regions over whose graph points the openness hypotheses are quantified.
struct DifferenceRadii {
  Scalar alpha1 = Scalar(1);  // F graph-closedness: input radius around xbar
  Scalar beta1 = Scalar(1);   // F graph-closedness: value radius around ybar
  Scalar alpha2 = Scalar(1);  // G graph-closedness: value radius around xbar
  Scalar beta2 = Scalar(1);   // G graph-closedness: input radius around zbar
  Scalar r1 = Scalar(1);      // F openness region: input radius around xbar
  Scalar s1 = Scalar(1);      // F openness region: value radius around ybar
  Scalar r2 = Scalar(1);      // G openness region: value radius around xbar
  Scalar s2 = Scalar(1);      // G openness region: input radius around zbar

  // Throws DomainError unless every radius is positive.
  void validate() const;
};

// Diagonal linear operator on R^m under the max norm.  Its exact openness
// rate is the smallest diagonal magnitude; the regularity rate is the
// reciprocal.  Both throw DomainError when some entry vanishes (the operator
// is then not surjective).
struct DiagOperator {
  std::vector<Scalar> entries;

  bool surjective() const;
  Scalar openness_rate() const;
  Scalar regularity_rate() const;
};

// Which variable of a parametric inclusion the openness hypothesis
// constrains in the implicit-map estimates.
enum class ImplicitMode { openness_in_x, openness_in_p };

// --- Difference-of-multifunctions openness ---------------------------------
//
// Hypotheses: ybar in F(xbar), xbar in G(zbar), L*M > 1 (exact), both graphs
// closed on the supplied windows, F open at rate L and G open at rate M on
// their regions.  Predicted: the localization radius
// eps = min{alpha1, alpha2, beta1/L, M*beta2, r1, r2, s1/L, M*s2} and the
// difference rate L - 1/M.  Conclusion: every ball B(ybar-zbar, rho*(L-1/M))
// with rho < eps is covered by the difference map's image of B(xbar, rho)
// (exact for eager piecewise-affine differences, dyadic rho-grid otherwise),
// plus the same openness over all graph points of the half window.
TheoremReport verify_difference_openness(const MapHandle& F, const MapHandle& G,
                                         const Scalar& xbar, const Scalar& ybar,
                                         const Scalar& zbar, const Scalar& L,
                                         const Scalar& M,
                                         const DifferenceRadii& radii = {},
                                         int rho_grid = 4);

// n-fold variant: F minus the inverses of every G_i, open at the reference
// at rate L - sum(1/M_i); requires L > sum(1/M_i) exactly.
TheoremReport verify_multi_difference_openness(
    const MapHandle& F, const std::vector<MapHandle>& Gs, const Scalar& xbar,
    const Scalar& ybar, const std::vector<Scalar>& zbars, const Scalar& L,
    const std::vector<Scalar>& Ms, const Window& w = {}, int rho_grid = 4);

// Single-valued variant: f must be single-valued and fully Lipschitz with
// constant l on its window; the conclusion upgrades to openness around the
// reference on the gamma-window, gamma = min{eps/4, eps/(4l)}.
TheoremReport verify_graves_corollary(const MapHandle& f, const MapHandle& G,
                                      const Scalar& xbar, const Scalar& ybar,
                                      const Scalar& zbar, const Scalar& L,
                                      const Scalar& M, const Scalar& l,
                                      const DifferenceRadii& radii = {},
                                      int rho_grid = 4);

// --- Perturbed-operator partial openness -----------------------------------
//
// f single-valued parametric, A a surjective diagonal operator (the scalar
// lane requires one entry; the operator identities hold for any m), alpha
// the perturbation bound: |f(x,p) - f(x,p') - A(p-p')| <= alpha*|p-p'| near
// the reference with alpha < openness_rate(A) exactly.  Predicted: partial
// openness in p at rate openness_rate(A) - alpha and the partial regularity
// bound regularity_rate(A)/(1 - alpha*regularity_rate(A)).
TheoremReport verify_partial_openness_bound(const ParamMap& f,
                                            const DiagOperator& A,
                                            const Scalar& alpha,
                                            const Scalar& xbar,
                                            const Scalar& pbar,
                                            const Window& w = {},
                                            int budget = 40,
                                            const Sampling& s = {});

// --- Implicit solution-map estimates ----------------------------------------
//
// H a parametric inclusion with 0 in H(xbar, pbar), open at rate c in the
// stated variable, inner semicontinuous at the reference.  Conclusion, on the
// half-radii emitted in the report: the distance estimate
// d(x, S(p)) <= d(0, H(x,p))/c (openness in x) respectively
// d(p, S^{-1}(x)) <= d(0, H(x,p))/c (openness in p), verified exactly per
// frozen sample over a dyadic grid of the other variable; plus the induced
// modulus bound lip S <= lip_p H / c respectively reg S <= lip_x H / c,
// cross-checked against an independent estimate on S = implicit_map(H).
TheoremReport verify_implicit_inequalities(const ParamMap& H,
                                           const Scalar& xbar,
                                           const Scalar& pbar,
                                           ImplicitMode mode, const Scalar& c,
                                           const Window& w = {}, int grid = 8,
                                           int budget = 40,
                                           const Sampling& s = {});

// --- Aubin bound for perturbed solution maps ---------------------------------
//
// F parametric in (x, y) (the second slot rides in the parameter seat), g
// single-valued, reference -g(wbar) in F(xbar, ybar).  Hypotheses: partial
// value-Lipschitz bound eta in the second slot, partial regularity bound k in
// x, inner semicontinuity of the x-sections on a second-slot grid, Lipschitz
// bound lambda for g.  Conclusion: for grid pairs (y,w), (y',w') and
// slack eps in {1, 1/2, 1/4}, the solution set Gamma(y',w') clipped to the
// closed alpha-ball is contained in Gamma(y,w) inflated by
// (k+eps)*(eta*|y-y'| + lambda*|w-w'|); plus lip Gamma <= k*max{eta, lambda}
// cross-checked against per-variable estimates.
TheoremReport verify_gamma_aubin(const ParamMap& F, const PAMap& g,
                                 const Scalar& xbar, const Scalar& ybar,
                                 const Scalar& wbar, const Scalar& eta,
                                 const Scalar& k, const Scalar& lambda,
                                 const Window& w = {}, int grid = 2,
                                 int budget = 40, const Sampling& s = {});

// --- Sum stability ------------------------------------------------------------
//
// Decomposability of sums near a reference triple: every value of (F+G)(x)
// within delta of ybar+zbar splits as y+z with y in F(x) within eps of ybar
// and z in G(x) within eps of zbar, for every x within delta of xbar.
// The checker searches delta by halving, deciding each candidate exactly for
// finitely structured pairs via the violation-gap field
// phi(x) = d(ybar+zbar, (F+G)(x) \ [clipped F(x) + clipped G(x)]);
// Holds carries the certified delta, Fails carries a violating pair (x, w)
// together with the zero-limit of phi that rules out every delta.  Pairs with
// infinite structure are decided by registered exact obstruction arguments,
// machine-checked at probe radii.
Certificate check_sum_stability(const MapHandle& F, const MapHandle& G,
                                const Scalar& xbar, const Scalar& ybar,
                                const Scalar& zbar, const Scalar& eps,
                                int budget = 24);

// Parametric variant: the quantifier runs over (x, p) jointly; exact via a
// two-variable boolean scan over the combined affine structure.
Certificate check_sum_stability(const ParamMap& F, const MapHandle& G,
                                const Scalar& xbar, const Scalar& pbar,
                                const Scalar& ybar, const Scalar& zbar,
                                const Scalar& eps, int budget = 24);

// --- Lipschitz bound for pointwise sums ----------------------------------------
//
// Hypotheses: Lipschitz-like brackets for F at (xbar, ybar) and G at
// (xbar, zbar), sum stability of the pair at the triple.  Predicted:
// lip(F+G) <= lip F + lip G at the summed reference, decided at bracket
// level against an independent estimate of the sum.  When sum stability
// fails, the report demonstrates how the conclusion itself fares on the
// instance instead of asserting it.
TheoremReport verify_lip_sum(const MapHandle& F, const MapHandle& G,
                             const Scalar& xbar, const Scalar& ybar,
                             const Scalar& zbar, const Window& w = {},
                             int budget = 40);

// --- Regularity of parametric solution maps -------------------------------------
//
// S(p) = {x : 0 in F(x,p) + G(x)} with ybar in F(xbar,pbar), -ybar in
// G(xbar).  Hypotheses: parametric sum stability, inner semicontinuity of
// the p-sections on an x-grid, partial Lipschitz bound of F in x, partial
// regularity bound of F in p (finite upper end required), Lipschitz bound of
// G.  Predicted: reg S <= reg_p F * (lip_x F + lip G), verified on the
// solution map built from the eager parametric sum.
TheoremReport verify_reg_solution_bound(const ParamMap& F, const MapHandle& G,
                                        const Scalar& xbar, const Scalar& pbar,
                                        const Scalar& ybar,
                                        const Window& w = {}, int budget = 40,
                                        const Sampling& s = {});

// --- Lipschitz dependence of parametric solution maps -----------------------------
//
// Same solution map; hypotheses: parametric sum stability (the per-variable
// uniform phrasing is read as the parametric definition and flagged in the
// certificate note; a single-valued affine F auto-certifies it through its
// calmness), closed graphs of the p-sections and of G, joint Lipschitz bound
// of F from the partial estimates, regularity bracket of G, inner
// semicontinuity of G, and the exact product condition
// lip_x F * reg G < 1.  Predicted: lip S <= reg G * lip_p F / (1 - lip_x F *
// reg G).
TheoremReport verify_lip_solution_bound(const ParamMap& F, const MapHandle& G,
                                        const Scalar& xbar, const Scalar& pbar,
                                        const Scalar& ybar,
                                        const Window& w = {}, int budget = 40,
                                        const Sampling& s = {});

}  // namespace regmod

#endif  // REGMOD_THEOREMS_HPP
