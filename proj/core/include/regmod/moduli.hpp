// regmod — certified regularity checkers and modulus estimators.
//
// The quantitative core of the library: three-valued certificates for the
// regularity properties of a multifunction near a graph point (openness at a
// linear rate, the Lipschitz-like estimate, metric regularity, their at-point
// weakenings, and partial/parametric variants), plus estimators producing
// two-sided brackets of the exact per-window bounds.
//
// Every verdict on a finitely structured map is exact: each quantified
// condition reduces to extrema of piecewise linear-fractional sections along
// exact scan grids (sweep.hpp).  A Holds certificate with exact evidence is a
// proof for the stated window; a Fails certificate always carries a concrete
// violating instance that replays through the set algebra alone; sampled
// evidence (maps with infinite structure outside their registered exact
// arguments, parametric maps without a uniform translation structure) is
// labeled as such and never masquerades as proof.

#ifndef REGMOD_MODULI_HPP
#define REGMOD_MODULI_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "regmod/map.hpp"
#include "regmod/rset.hpp"
#include "regmod/scalar.hpp"

namespace regmod {

// Properties quantified over all graph points (and pairs) near the reference.
enum class AroundProperty { open, lipschitz_like, metric_regular };
// Properties quantified at the reference point only.
enum class AtProperty { open_at, pseudocalm, hemiregular };
// Which argument of a parametric map a partial property constrains; the other
// is frozen and quantified uniformly over its own neighborhood.
enum class Variable { x, p };

enum class Verdict { Holds, Fails, Inconclusive };

// The exact bounds the estimators bracket.  Openness bounds are suprema of
// admissible rates (the property holds at rates below them); Lipschitz-like
// and regularity bounds are infima (the property holds at rates above them).
// The _x/_p kinds are the partial bounds of a parametric map with respect to
// that variable, uniform over the frozen one.
enum class ModulusKind {
  lop,
  lip,
  reg,
  plop,
  psdclm,
  hemreg,
  lop_x,
  lip_x,
  reg_x,
  lop_p,
  lip_p,
  reg_p,
};

// True for the supremum-type kinds (lop, plop and partial lop).
bool is_sup_type(ModulusKind k);

std::string_view to_string(AroundProperty p);
std::string_view to_string(AtProperty p);
std::string_view to_string(Variable v);
std::string_view to_string(Verdict v);
std::string_view to_string(ModulusKind k);
std::optional<AroundProperty> around_property_from(std::string_view name);
std::optional<AtProperty> at_property_from(std::string_view name);
std::optional<ModulusKind> modulus_kind_from(std::string_view name);

// Quantifier localization: x near the reference within u_radius, values near
// the reference within v_radius, ball radii below eps, and the frozen
// parametric variable within p_radius.  All neighborhoods are open balls.
struct Window {
  Scalar u_radius = Scalar(1);
  Scalar v_radius = Scalar(1);
  Scalar eps = Scalar(1);
  std::optional<Scalar> p_radius;

  Scalar p_or_default() const { return p_radius.value_or(Scalar(1)); }
  // Throws DomainError unless every radius is positive.
  void validate() const;
};

// Replayable violating instance: named exact coordinates, in quantifier
// order (for example x, u, y for a failed Lipschitz estimate, or x, y, rho,
// v for a ball that escapes an image).
struct Witness {
  std::vector<std::pair<std::string, Scalar>> values;

  std::optional<Scalar> get(std::string_view name) const;
};

struct Evidence {
  bool exact = true;       // exact-symbolic proof vs sampled falsification
  int grid = 0;            // frozen-variable samples per radius (sampled only)
  std::uint64_t seed = 0;  // sampling seed (sampled only)
  std::string note;        // reduction or bespoke-argument description
};

struct Certificate {
  Verdict verdict = Verdict::Inconclusive;
  Window window;
  Scalar rate;
  std::optional<Witness> witness;
  Evidence evidence;
};

// Sampling policy for the paths without an exact reduction.
struct Sampling {
  int grid = 8;
  std::uint64_t seed = 0;
};

// Two-sided bracket of an exact per-window bound.  For supremum-type kinds
// the property is certified to hold at lo and to fail beyond hi; for
// infimum-type kinds the roles of the endpoints swap.  A collapsed bracket
// (lo == hi) pins the bound exactly; the defining conditions hold weakly at
// the exact bound, so the Fails side is then witnessed by the probe
// certificate strictly beyond it.
struct ModulusBracket {
  ModulusKind kind = ModulusKind::lop;
  Scalar lo;
  ExtScalar hi;
  bool collapsed = false;
  bool inconclusive = false;
  Certificate holds_cert;  // at the Holds-side endpoint
  Certificate fails_cert;  // at the Fails-side endpoint or probe

  Window window;
};

// --- Checkers -------------------------------------------------------------
//
// All reference points must lie on the graph where the property demands it
// (openness and the Lipschitz-like estimate; metric regularity and the
// distance estimates quantify over the whole window).  Rates must be
// positive.  Violations raise DomainError.

Certificate check_around(const MapHandle& F, const Scalar& xbar,
                         const Scalar& ybar, AroundProperty prop,
                         const Scalar& L, const Window& w);

Certificate check_at(const MapHandle& F, const Scalar& xbar,
                     const Scalar& ybar, AtProperty prop, const Scalar& L,
                     const Window& w);

// Property of the map in `var` around the reference, uniform over the frozen
// variable's neighborhood (u_radius localizes x, p_radius localizes p,
// v_radius localizes values).  Exact when the map depends on the frozen
// variable through one shared translation coefficient; sampled otherwise.
Certificate check_partial(const ParamMap& H, const Scalar& xbar,
                          const Scalar& pbar, const Scalar& ybar, Variable var,
                          AroundProperty prop, const Scalar& L,
                          const Window& w, const Sampling& s = {});

// Unclipped Lipschitz estimate on the window: every fiber is contained in
// every other fiber dilated by L times the abscissa gap.
Certificate check_full_lipschitz(const MapHandle& F, const Scalar& xbar,
                                 const Scalar& ybar, const Scalar& L,
                                 const Window& w);

// Calmness of a single-valued map at xbar with constant l on the window.
// DomainError when the map is not single-valued there.
Certificate check_calm(const MapHandle& f, const Scalar& xbar, const Scalar& l,
                       const Window& w);

// Inner semicontinuity witness pair: every fiber over the delta-ball around
// xbar meets the open eps-ball around ybar.
Certificate check_isc(const MapHandle& F, const Scalar& xbar,
                      const Scalar& ybar, const Scalar& eps,
                      const Scalar& delta);
Certificate check_isc(const ParamMap& H, const Scalar& xbar, const Scalar& pbar,
                      const Scalar& ybar, const Scalar& eps,
                      const Scalar& delta);

// --- Estimators -----------------------------------------------------------

// Bracket of the exact per-window bound.  The engine first computes the
// extremal critical rate of the defining condition symbolically and collapses
// the bracket onto it when the checker confirms both sides; otherwise it
// bisects the rate axis over [2^-20, 2^20] for `budget` halvings.  A
// non-positive budget yields the full-span bracket flagged Inconclusive.
ModulusBracket estimate_modulus(const MapHandle& F, const Scalar& xbar,
                                const Scalar& ybar, ModulusKind kind,
                                const Window& w, int budget = 40);

// Parametric variant for the _x/_p kinds.
ModulusBracket estimate_modulus(const ParamMap& H, const Scalar& xbar,
                                const Scalar& pbar, const Scalar& ybar,
                                ModulusKind kind, const Window& w,
                                int budget = 40, const Sampling& s = {});

// --- Linkage reports --------------------------------------------------------

// The three equivalent views of regularity around (at) a graph point: the
// openness bound of F, the Lipschitz-like bound of the inverse at the
// transposed point, and the regularity bound of F — computed by independent
// engines (ball geometry, excess, distance ratios) and cross-checked:
// the product of the openness and regularity brackets must straddle 1, and
// the regularity bracket must intersect the inverse's Lipschitz-like bracket.
struct LinkReport {
  ModulusBracket primal;    // lop (around) or plop (at)
  ModulusBracket inverse;   // lip of the inverse (psdclm of the inverse)
  ModulusBracket distance;  // reg (hemreg)
  bool consistent = false;
  std::string detail;
};

LinkReport verify_link_around(const MapHandle& F, const Scalar& xbar,
                              const Scalar& ybar, const Window& w,
                              int budget = 40);
LinkReport verify_link_at(const MapHandle& F, const Scalar& xbar,
                          const Scalar& ybar, const Window& w, int budget = 40);

// --- Witness replay ---------------------------------------------------------
//
// Re-evaluate a Fails witness through the set algebra alone; true when it
// still violates the defining condition at the certificate's rate.

bool replay_around(const MapHandle& F, const Scalar& xbar, const Scalar& ybar,
                   AroundProperty prop, const Certificate& c);
bool replay_at(const MapHandle& F, const Scalar& xbar, const Scalar& ybar,
               AtProperty prop, const Certificate& c);

}  // namespace regmod

#endif  // REGMOD_MODULI_HPP
