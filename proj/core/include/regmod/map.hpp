// regmod — exact one-dimensional set-valued analysis laboratory.
//
// Multifunctions on the scalar field.  The workhorse representation is the
// piecewise-affine map: finitely many pieces, each pairing an input cell with
// affine lower/upper value bounds (either may be absent), endpoint-closedness
// flags and a value density, plus finitely many exceptional fibers that add
// to or replace the generic value at a single abscissa.  Pieces may overlap;
// the fiber at x is the union of all piece contributions.  Fibers, images of
// cells, preimages, inverses, pointwise sums and differences, local graph
// closedness, and solution maps of parametric inclusions are all computed
// exactly.  Maps whose structure is not finite (one extra value along a
// convergent sequence of abscissae) implement the same interface with
// bespoke exact evaluators and advertise themselves as such.

#ifndef REGMOD_MAP_HPP
#define REGMOD_MAP_HPP

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "regmod/rset.hpp"

namespace regmod {

// A lazily represented map cannot answer this query exactly.
struct UnsupportedOperation : std::runtime_error {
  explicit UnsupportedOperation(const std::string& what)
      : std::runtime_error(what) {}
};

// The exact result exists but falls outside the representable set algebra
// (finite unions of solid and dense cells and isolated points).
struct Unrepresentable : std::runtime_error {
  explicit Unrepresentable(const std::string& what)
      : std::runtime_error(what) {}
};

// y = a*x + b.
struct AffineForm {
  Scalar a, b;
  Scalar eval(const Scalar& x) const { return a * x + b; }
};

// One piece of a piecewise-affine multifunction: over the input cell `dom`
// the fiber is the interval between two affine bounds (an absent bound means
// unbounded on that side), taken solid or intersected with the rational
// class `value_offset + Q`.
struct Piece {
  Cell dom;
  std::optional<AffineForm> lower, upper;
  bool lo_closed = true;
  bool hi_closed = true;
  Density value_density = Density::solid;
  Scalar value_offset;  // meaningful only when value_density == dense
};

enum class FiberMode { add, replace };

// At one abscissa the generic fiber is augmented (`add`) or replaced
// entirely (`replace`) by an explicit set.
struct ExceptionalFiber {
  Scalar x;
  RSet set;
  FiberMode mode = FiberMode::add;
};

// Piecewise-affine multifunction with exceptional fibers.
class PAMap {
 public:
  PAMap() = default;
  PAMap(std::vector<Piece> pieces, std::vector<ExceptionalFiber> exceptional);

  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<ExceptionalFiber>& exceptional() const {
    return exceptional_;
  }

  // F(x), exactly.
  RSet fiber(const Scalar& x) const;
  // Union of fibers over an input cell (solid or dense), exactly.
  RSet image(const Cell& input) const;
  // F^{-1}(y) = { x : y in F(x) }, exactly.
  RSet preimage_point(const Scalar& y) const;
  // { x : F(x) meets the solid cell `values` }, exactly.
  RSet preimage(const Cell& values) const;
  // { x : F(x) nonempty }, exactly.
  RSet domain() const;

  // Pointwise negation x -> -F(x).
  PAMap negated() const;
  // The inverse multifunction as a piecewise-affine map (always exact).
  PAMap inverted() const;

  // The unique fiber element when F(x) is a singleton.
  std::optional<Scalar> single_value(const Scalar& x) const;
  // The affine form when the whole map is single-valued affine on the line.
  std::optional<AffineForm> as_affine() const;

  // Input abscissae where the piece pattern can change: domain endpoints,
  // exceptional abscissae, pairwise crossings of the bound forms.
  std::vector<Scalar> structure_abscissae() const;
  // Value-side counterparts: bound values at domain endpoints and crossings,
  // constant bound levels, exceptional set endpoints.
  std::vector<Scalar> output_breakpoints() const;
  // Every affine bound form, plus constant forms at exceptional endpoints.
  std::vector<AffineForm> value_forms() const;

  // Exact local graph closedness over a closed bounded solid window
  // xwin x ywin: either a point of cl(Gr) inside the window that is missing
  // from the graph, or nullopt when Gr restricted to the window is closed.
  // Dense-domain pieces meeting the window are not supported.
  std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell& xwin, const Cell& ywin) const;
  bool graph_closed_on(const Cell& xwin, const Cell& ywin) const;

 private:
  std::vector<Piece> pieces_;
  std::vector<ExceptionalFiber> exceptional_;
};

// Pointwise Minkowski sum as a piecewise-affine map, when representable:
// fails (nullopt) only when a dense-valued piece meets a sloped single-valued
// one, which would need an input-dependent class offset.
std::optional<PAMap> sum_pamaps(const PAMap& f, const PAMap& g);

// ---------------------------------------------------------------------------
// Uniform handle interface over exact multifunctions.

class MapBase {
 public:
  virtual ~MapBase() = default;

  virtual std::string name() const = 0;
  virtual RSet fiber(const Scalar& x) const = 0;
  virtual RSet image(const Cell& input) const = 0;
  virtual RSet preimage_point(const Scalar& y) const = 0;
  virtual RSet preimage(const Cell& values) const = 0;

  virtual std::vector<Scalar> structure_abscissae() const = 0;
  virtual std::vector<Scalar> output_breakpoints() const = 0;
  virtual std::vector<AffineForm> value_forms() const = 0;

  // False for maps with infinitely many structural abscissae; their
  // structure lists are then non-exhaustive hints and exhaustive sweeps must
  // not rely on them.
  virtual bool finitely_structured() const { return true; }

  // The underlying piecewise-affine map, when this handle is backed by one.
  virtual const PAMap* as_pamap() const { return nullptr; }

  virtual std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell& xwin, const Cell& ywin) const = 0;

  // d(y, F(x)) and d(x, F^{-1}(y)); +inf against the empty set.
  virtual ExtScalar dist_to_fiber(const Scalar& x, const Scalar& y) const;
  virtual ExtScalar dist_to_preimage(const Scalar& x, const Scalar& y) const;
};

using MapHandle = std::shared_ptr<const MapBase>;

// Handle over a piecewise-affine map.
MapHandle make_map(PAMap pa, std::string name);

// Exact inverse handle.  Piecewise-affine maps invert eagerly; bespoke maps
// get a view with the two coordinate roles swapped.  Inverting an inverse
// view unwraps it.
MapHandle invert(const MapHandle& f);

// Pointwise x -> F(x) + G(x).  Eager when both operands are piecewise-affine
// and the sum is representable; otherwise a lazy fiber-level view that
// rejects image/preimage queries.
MapHandle sum_maps(const MapHandle& f, const MapHandle& g);

// Pointwise x -> F(x) - G^{-1}(x), the difference map of openness calculus.
MapHandle diff_map(const MapHandle& f, const MapHandle& g);

// Pointwise x -> -F(x).
MapHandle negate_map(const MapHandle& f);

// Named reference maps.
MapHandle builtin(const std::string& name);
std::vector<std::string> builtin_names();

// Piecewise-affine building blocks.
PAMap make_identity_pamap();
PAMap make_linear_pamap(const Scalar& slope);
PAMap make_affine_pamap(const Scalar& slope, const Scalar& offset);
// Constant band x -> [lo, hi].
PAMap make_band_pamap(const Scalar& lo, const Scalar& hi);

// ---------------------------------------------------------------------------
// Parametric maps H : X x P => Y with affine structure in (x, p).

// z = ax*x + ap*p + b.
struct AffineForm2 {
  Scalar ax, ap, b;
  Scalar eval(const Scalar& x, const Scalar& p) const {
    return ax * x + ap * p + b;
  }
};

// Piece over a product of solid cells; values are solid intervals between
// affine-in-(x,p) bounds.
struct ParamPiece {
  Cell xdom, pdom;
  std::optional<AffineForm2> lower, upper;
  bool lo_closed = true;
  bool hi_closed = true;
};

class ParamMap {
 public:
  ParamMap() = default;
  explicit ParamMap(std::vector<ParamPiece> pieces);

  const std::vector<ParamPiece>& pieces() const { return pieces_; }

  RSet fiber(const Scalar& x, const Scalar& p) const;

  // Sections as piecewise-affine maps in the remaining variable.
  PAMap freeze_p(const Scalar& p) const;
  PAMap freeze_x(const Scalar& x) const;

  std::vector<Scalar> x_structure() const;
  std::vector<Scalar> p_structure() const;

  // When every bound depends on p (resp. x) through one shared coefficient
  // and no piece window clips that variable, H(x,p) = H(x,p0) translated by
  // slope*(p-p0); the exact parametric engines key on this.
  std::optional<Scalar> uniform_p_slope() const;
  std::optional<Scalar> uniform_x_slope() const;

 private:
  std::vector<ParamPiece> pieces_;
};

// Pointwise (x,p) -> H(x,p) + G(x) for piecewise-affine G; nullopt when G
// has exceptional fibers or dense values (no eager representation).
std::optional<ParamMap> sum_param_pamap(const ParamMap& h, const PAMap& g);

// The solution map p -> { x : 0 in H(x,p) } as a piecewise-affine map.
PAMap implicit_map(const ParamMap& h);

// (y,w) -> { x : 0 in F(x,y) + g(w) } for single-valued g; fibers are exact.
class Gamma2 {
 public:
  Gamma2(ParamMap f, PAMap g);

  RSet fiber(const Scalar& y, const Scalar& w) const;

  const ParamMap& f() const { return f_; }
  const PAMap& g() const { return g_; }

 private:
  ParamMap f_;
  PAMap g_;
};

}  // namespace regmod

#endif  // REGMOD_MAP_HPP
