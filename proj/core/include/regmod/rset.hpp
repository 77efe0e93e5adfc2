// regmod — exact one-dimensional set-valued analysis laboratory.
//
// RSet: the representable subsets of the line used as multifunction values.
// A set is a finite union of interval cells and isolated points.  A cell is
// either solid (all field points of an interval) or dense (the rationals
// shifted by a fixed offset, intersected with an interval).  Every metric
// query (distance, excess, depth) is answered exactly in Q(sqrt(2)).

#ifndef REGMOD_RSET_HPP
#define REGMOD_RSET_HPP

#include <optional>
#include <string>
#include <vector>

#include "regmod/scalar.hpp"

namespace regmod {

enum class Density { solid, dense };

// One interval-shaped component.  For dense cells the point set is
// { q + dense_offset : q rational } restricted to the interval; the offset is
// kept canonical (rational part zero), since shifting the rationals by a
// rational leaves them unchanged.  Infinite endpoints are always open.
struct Cell {
  ExtScalar lo, hi;
  bool lo_closed = false;
  bool hi_closed = false;
  Density density = Density::solid;
  Scalar dense_offset;  // meaningful only when density == dense

  static Cell solid(ExtScalar lo, bool lo_closed, ExtScalar hi, bool hi_closed);
  static Cell dense(ExtScalar lo, bool lo_closed, ExtScalar hi, bool hi_closed,
                    Scalar offset);
  // Closed/open solid intervals with finite or infinite endpoints.
  static Cell closed(ExtScalar lo, ExtScalar hi);
  static Cell open(ExtScalar lo, ExtScalar hi);

  bool contains(const Scalar& x) const;
  bool is_empty() const;
  std::string to_string() const;
};

// Finite union of cells and points, kept in a normal form: solid cells are
// pairwise separated, dense cells carry canonical offsets and never overlap a
// solid cell, points belong to no cell, everything is sorted.
class RSet {
 public:
  RSet() = default;  // empty set

  static RSet point(const Scalar& x);
  static RSet of_cell(const Cell& c);
  static RSet from(std::vector<Cell> cells, std::vector<Scalar> points);
  // Open ball B(c, r) (empty when r <= 0) and its closed counterpart (a point
  // when r == 0); the dilation convention uses closed enlargements.
  static RSet open_ball(const Scalar& center, const Scalar& radius);
  static RSet closed_ball(const Scalar& center, const Scalar& radius);
  static RSet line();

  bool is_empty() const { return cells_.empty() && points_.empty(); }
  bool contains(const Scalar& x) const;

  // Exact distance d(x, A); +inf for the empty set.
  ExtScalar distance(const Scalar& x) const;

  RSet closure() const;
  bool is_closed() const;

  // Closed enlargement cl(A) + r*[-1, 1]; radius 0 gives the closure.
  RSet dilate(const Scalar& radius) const;

  RSet negate() const;
  RSet translate(const Scalar& t) const;
  RSet unite(const RSet& other) const;

  // The set with one point removed (cells split at x when it is a member).
  RSet without_point(const Scalar& x) const;

  // Infimum/supremum over the set with attainment flags; inf() of the empty
  // set is +inf and sup() is -inf.
  ExtScalar inf() const;
  ExtScalar sup() const;
  bool inf_attained() const;
  bool sup_attained() const;

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Scalar>& points() const { return points_; }

  std::string to_string() const;

  // Semantic equality (double inclusion), not representation equality.
  friend bool operator==(const RSet& a, const RSet& b);
  friend bool operator!=(const RSet& a, const RSet& b) { return !(a == b); }

 private:
  std::vector<Cell> cells_;
  std::vector<Scalar> points_;

  void normalize();
};

// Excess e(A, B) = sup_{a in A} d(a, cl B), the one-sided Hausdorff gap.
// Conventions: e(empty, B) = 0, e(A, empty) = +inf for nonempty A.
ExtScalar excess(const RSet& a, const RSet& b);

// Minkowski sum A + B (exact; density and endpoint attainment follow the
// component arithmetic).
RSet minkowski(const RSet& a, const RSet& b);

// A restricted to one cell-shaped window.
RSet intersect(const RSet& a, const Cell& window);

// Exact intersection of two representable sets.
RSet intersect(const RSet& a, const RSet& b);

// nullopt when A is a subset of B; otherwise an explicit witness in A \ B.
std::optional<Scalar> subset_witness(const RSet& a, const RSet& b);

// inf_{a in A} sup{ r >= 0 : B(a, r) included in S }; +inf for empty A.  Only
// solid cells of S have interior, so everything else contributes depth zero.
ExtScalar min_depth(const RSet& a, const RSet& s);

// Exact d(y, A \ B) (+inf when the difference is empty); the difference
// itself need not be representable, its distance always is.
ExtScalar distance_to_difference(const Scalar& y, const RSet& a, const RSet& b);

}  // namespace regmod

#endif  // REGMOD_RSET_HPP
