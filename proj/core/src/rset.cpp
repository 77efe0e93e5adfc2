// regmod — exact one-dimensional set-valued analysis laboratory.
//
// RSet normal form and the exact metric queries (distance, excess, depth,
// Minkowski sums, inclusion witnesses, distances to set differences).

#include "regmod/rset.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <utility>

namespace regmod {

namespace {

// ---------------------------------------------------------------------------
// Interval plumbing on the (lo, hi, lo_closed, hi_closed) part of a cell.
// Density is carried through unchanged by these helpers.

bool interval_contains(const Cell& c, const Scalar& x) {
  const ExtScalar ex(x);
  if (ex < c.lo || (ex == c.lo && !c.lo_closed)) return false;
  if (c.hi < ex || (ex == c.hi && !c.hi_closed)) return false;
  return true;
}

bool interval_empty(const Cell& c) {
  if (c.hi < c.lo) return true;
  if (c.lo == c.hi) return !c.lo.is_finite() || !(c.lo_closed && c.hi_closed);
  return false;
}

bool interval_degenerate(const Cell& c) {
  return c.lo == c.hi && c.lo.is_finite() && c.lo_closed && c.hi_closed;
}

// Intersection of the interval parts; density/offset taken from `a`.
Cell meet(const Cell& a, const Cell& b) {
  Cell out = a;
  if (a.lo < b.lo) {
    out.lo = b.lo;
    out.lo_closed = b.lo_closed;
  } else if (a.lo == b.lo) {
    out.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (b.hi < a.hi) {
    out.hi = b.hi;
    out.hi_closed = b.hi_closed;
  } else if (a.hi == b.hi) {
    out.hi_closed = a.hi_closed && b.hi_closed;
  }
  return out;
}

// a minus the interval of b, as point sets of the interval part.
std::vector<Cell> interval_subtract(const Cell& a, const Cell& b) {
  std::vector<Cell> out;
  Cell left = a;  // { x in a : x < b.lo, or x == b.lo when b is open there }
  left.hi = b.lo;
  left.hi_closed = b.lo.is_finite() && !b.lo_closed;
  if (!interval_empty(left)) out.push_back(meet(a, left));
  Cell right = a;
  right.lo = b.hi;
  right.lo_closed = b.hi.is_finite() && !b.hi_closed;
  if (!interval_empty(right)) out.push_back(meet(a, right));
  // Re-meeting with `a` restores a's bounds when b does not actually cut.
  std::vector<Cell> nonempty;
  for (const Cell& c : out)
    if (!interval_empty(c)) nonempty.push_back(c);
  return nonempty;
}

std::vector<Cell> subtract_all(const Cell& a, const std::vector<Cell>& removals) {
  std::vector<Cell> frags{a};
  for (const Cell& r : removals) {
    std::vector<Cell> next;
    for (const Cell& f : frags) {
      auto parts = interval_subtract(f, r);
      next.insert(next.end(), parts.begin(), parts.end());
    }
    frags = std::move(next);
  }
  return frags;
}

// Drops the rational part of a dense offset and opens endpoints that are not
// in the represented class (they never belong to the point set anyway).
void canonicalize(Cell& c) {
  if (!c.lo.is_finite()) c.lo_closed = false;
  if (!c.hi.is_finite()) c.hi_closed = false;
  if (c.density == Density::dense) {
    c.dense_offset = Scalar(Rational(0), c.dense_offset.rad());
    if (c.lo_closed && !(c.lo.finite() - c.dense_offset).is_rational())
      c.lo_closed = false;
    if (c.hi_closed && !(c.hi.finite() - c.dense_offset).is_rational())
      c.hi_closed = false;
  }
}

bool same_class(const Cell& a, const Cell& b) {
  // Canonical offsets: equal class iff equal offset.
  return a.dense_offset == b.dense_offset;
}

// After sorting by lo: can `b` be merged into `a` without changing the union?
bool can_merge(const Cell& a, const Cell& b) {
  if (b.lo < a.hi) return true;
  return b.lo == a.hi && b.lo.is_finite() && (a.hi_closed || b.lo_closed);
}

void merge_into(Cell& a, const Cell& b) {
  if (a.lo == b.lo) a.lo_closed = a.lo_closed || b.lo_closed;
  if (a.hi < b.hi) {
    a.hi = b.hi;
    a.hi_closed = b.hi_closed;
  } else if (a.hi == b.hi) {
    a.hi_closed = a.hi_closed || b.hi_closed;
  }
}

bool cell_before(const Cell& a, const Cell& b) {
  if (a.lo != b.lo) return a.lo < b.lo;
  if (a.lo_closed != b.lo_closed) return a.lo_closed;
  if (a.density != b.density) return a.density == Density::solid;
  if (a.density == Density::dense && a.dense_offset != b.dense_offset)
    return a.dense_offset < b.dense_offset;
  return a.hi < b.hi;
}

// Distance from x to the closed hull of one cell (density-insensitive).
ExtScalar hull_distance(const Cell& c, const Scalar& x) {
  const ExtScalar ex(x);
  if (ex < c.lo) return c.lo - ex;
  if (c.hi < ex) return ex - c.hi;
  return ExtScalar(Scalar(0));
}

Scalar abs_diff(const Scalar& a, const Scalar& b) { return (a - b).abs(); }

// A point of a nondegenerate interval fragment avoiding finitely many dense
// classes (identified by the sqrt(2)-coordinate of their offsets) and
// finitely many exact points.
Scalar pick_avoiding(const Cell& frag, const std::vector<Rational>& bad_rads,
                     const std::vector<Scalar>& bad_points) {
  const Scalar x0 = Scalar(rational_between(frag.lo, frag.hi));
  auto ok = [&](const Scalar& x) {
    for (const Rational& r : bad_rads)
      if (x.rad() == r) return false;
    for (const Scalar& p : bad_points)
      if (x == p) return false;
    return true;
  };
  if (ok(x0)) return x0;
  // Nudge off the rationals: distinct radical coordinates per attempt, so at
  // most |bad_rads| + |bad_points| attempts can collide.
  ExtScalar room = min(ExtScalar(x0) - frag.lo, frag.hi - ExtScalar(x0));
  Scalar q = Scalar(rational_between(0, room / Scalar::sqrt2()));
  for (std::size_t i = 0; i <= bad_rads.size() + bad_points.size() + 1; ++i) {
    const Scalar x = x0 + Scalar(Rational(0), q.rat());
    if (ok(x)) return x;
    q = q / Scalar(2);
  }
  throw DomainError("pick_avoiding: exhausted candidates");  // unreachable
}

}  // namespace

// ---------------------------------------------------------------------------
// Cell

Cell Cell::solid(ExtScalar lo, bool lo_closed, ExtScalar hi, bool hi_closed) {
  Cell c;
  c.lo = lo;
  c.hi = hi;
  c.lo_closed = lo_closed && lo.is_finite();
  c.hi_closed = hi_closed && hi.is_finite();
  return c;
}

Cell Cell::dense(ExtScalar lo, bool lo_closed, ExtScalar hi, bool hi_closed,
                 Scalar offset) {
  Cell c = Cell::solid(lo, lo_closed, hi, hi_closed);
  c.density = Density::dense;
  c.dense_offset = std::move(offset);
  canonicalize(c);
  return c;
}

Cell Cell::closed(ExtScalar lo, ExtScalar hi) { return solid(lo, true, hi, true); }

Cell Cell::open(ExtScalar lo, ExtScalar hi) { return solid(lo, false, hi, false); }

bool Cell::contains(const Scalar& x) const {
  if (!interval_contains(*this, x)) return false;
  return density == Density::solid || (x - dense_offset).is_rational();
}

bool Cell::is_empty() const {
  if (interval_empty(*this)) return true;
  if (density == Density::dense && interval_degenerate(*this))
    return !(lo.finite() - dense_offset).is_rational();
  return false;
}

std::string Cell::to_string() const {
  std::ostringstream os;
  if (density == Density::dense) {
    os << 'Q';
    if (!dense_offset.is_zero()) os << '(' << dense_offset.format() << ')';
  }
  os << (lo_closed ? '[' : '(') << lo.format() << ", " << hi.format()
     << (hi_closed ? ']' : ')');
  return os.str();
}

// ---------------------------------------------------------------------------
// RSet construction and normal form

RSet RSet::point(const Scalar& x) {
  RSet s;
  s.points_.push_back(x);
  return s;
}

RSet RSet::of_cell(const Cell& c) {
  RSet s;
  s.cells_.push_back(c);
  s.normalize();
  return s;
}

RSet RSet::from(std::vector<Cell> cells, std::vector<Scalar> points) {
  RSet s;
  s.cells_ = std::move(cells);
  s.points_ = std::move(points);
  s.normalize();
  return s;
}

RSet RSet::open_ball(const Scalar& center, const Scalar& radius) {
  if (radius.sign() <= 0) return RSet();
  return of_cell(Cell::open(center - radius, center + radius));
}

RSet RSet::closed_ball(const Scalar& center, const Scalar& radius) {
  if (radius.sign() < 0) return RSet();
  return of_cell(Cell::closed(center - radius, center + radius));
}

RSet RSet::line() {
  return of_cell(Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf()));
}

void RSet::normalize() {
  for (Cell& c : cells_) canonicalize(c);

  for (int round = 0; round < 32; ++round) {
    bool changed = false;

    // Empty cells out, degenerate cells become points.
    std::vector<Cell> kept;
    for (const Cell& c : cells_) {
      if (c.is_empty()) {
        changed = true;
      } else if (interval_degenerate(c)) {
        points_.push_back(c.lo.finite());
        changed = true;
      } else {
        kept.push_back(c);
      }
    }
    cells_ = std::move(kept);

    // Merge overlapping / touching solid cells.
    std::vector<Cell> solids, denses;
    for (const Cell& c : cells_)
      (c.density == Density::solid ? solids : denses).push_back(c);
    std::sort(solids.begin(), solids.end(), cell_before);
    std::vector<Cell> merged;
    for (const Cell& c : solids) {
      if (!merged.empty() && can_merge(merged.back(), c)) {
        merge_into(merged.back(), c);
        changed = true;
      } else {
        merged.push_back(c);
      }
    }
    solids = std::move(merged);

    // Dense cells lose the stretches already covered by solid cells, then
    // merge within each class.
    std::vector<Cell> clipped;
    for (const Cell& d : denses) {
      auto frags = subtract_all(d, solids);
      if (frags.size() != 1 || !(frags[0].lo == d.lo && frags[0].hi == d.hi &&
                                 frags[0].lo_closed == d.lo_closed &&
                                 frags[0].hi_closed == d.hi_closed))
        changed = true;
      for (Cell& f : frags) {
        canonicalize(f);
        clipped.push_back(f);
      }
    }
    std::sort(clipped.begin(), clipped.end(), cell_before);
    std::vector<Cell> dmerged;
    for (const Cell& c : clipped) {
      if (!dmerged.empty() && same_class(dmerged.back(), c) &&
          can_merge(dmerged.back(), c)) {
        merge_into(dmerged.back(), c);
        changed = true;
      } else {
        dmerged.push_back(c);
      }
    }

    cells_ = std::move(solids);
    cells_.insert(cells_.end(), dmerged.begin(), dmerged.end());

    // Points: dedupe, drop the covered ones, close adjacent open endpoints.
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
    std::vector<Scalar> still;
    for (const Scalar& p : points_) {
      bool used = false;
      for (Cell& c : cells_) {
        if (c.contains(p)) {
          used = true;
          break;
        }
        const bool in_class = c.density == Density::solid ||
                              (p - c.dense_offset).is_rational();
        if (in_class && !c.lo_closed && c.lo == ExtScalar(p)) {
          c.lo_closed = true;
          used = true;
        }
        if (in_class && !c.hi_closed && c.hi == ExtScalar(p)) {
          c.hi_closed = true;
          used = true;
        }
        if (used) break;
      }
      if (used)
        changed = true;
      else
        still.push_back(p);
    }
    points_ = std::move(still);

    if (!changed) break;
  }

  std::sort(cells_.begin(), cells_.end(), cell_before);
  std::sort(points_.begin(), points_.end());
}

// ---------------------------------------------------------------------------
// Queries

bool RSet::contains(const Scalar& x) const {
  for (const Cell& c : cells_)
    if (c.contains(x)) return true;
  for (const Scalar& p : points_)
    if (p == x) return true;
  return false;
}

ExtScalar RSet::distance(const Scalar& x) const {
  ExtScalar best = ExtScalar::pos_inf();
  for (const Cell& c : cells_) best = min(best, hull_distance(c, x));
  for (const Scalar& p : points_) best = min(best, ExtScalar(abs_diff(p, x)));
  return best;
}

RSet RSet::closure() const {
  std::vector<Cell> cells;
  for (const Cell& c : cells_)
    cells.push_back(Cell::closed(c.lo, c.hi));  // dense closes to solid
  return from(std::move(cells), points_);
}

bool RSet::is_closed() const {
  for (const Cell& c : cells_) {
    if (c.density == Density::dense) return false;
    if (c.lo.is_finite() && !c.lo_closed) return false;
    if (c.hi.is_finite() && !c.hi_closed) return false;
  }
  return true;
}

RSet RSet::dilate(const Scalar& radius) const {
  if (radius.sign() < 0) throw DomainError("negative dilation radius");
  std::vector<Cell> cells;
  for (const Cell& c : cells_)
    cells.push_back(Cell::closed(c.lo - radius, c.hi + radius));
  std::vector<Scalar> pts;
  for (const Scalar& p : points_) {
    if (radius.is_zero())
      pts.push_back(p);
    else
      cells.push_back(Cell::closed(p - radius, p + radius));
  }
  return from(std::move(cells), std::move(pts));
}

RSet RSet::negate() const {
  std::vector<Cell> cells;
  for (const Cell& c : cells_) {
    Cell n = c;
    n.lo = -c.hi;
    n.hi = -c.lo;
    n.lo_closed = c.hi_closed;
    n.hi_closed = c.lo_closed;
    if (n.density == Density::dense) n.dense_offset = -c.dense_offset;
    cells.push_back(n);
  }
  std::vector<Scalar> pts;
  for (const Scalar& p : points_) pts.push_back(-p);
  return from(std::move(cells), std::move(pts));
}

RSet RSet::translate(const Scalar& t) const {
  std::vector<Cell> cells;
  for (const Cell& c : cells_) {
    Cell n = c;
    n.lo = c.lo + t;
    n.hi = c.hi + t;
    if (n.density == Density::dense) n.dense_offset = c.dense_offset + t;
    cells.push_back(n);
  }
  std::vector<Scalar> pts;
  for (const Scalar& p : points_) pts.push_back(p + t);
  return from(std::move(cells), std::move(pts));
}

RSet RSet::without_point(const Scalar& x) const {
  std::vector<Cell> cells;
  std::vector<Scalar> pts;
  for (const Cell& c : cells_) {
    if (!c.contains(x)) {
      cells.push_back(c);
      continue;
    }
    Cell left = c, right = c;
    left.hi = ExtScalar(x);
    left.hi_closed = false;
    right.lo = ExtScalar(x);
    right.lo_closed = false;
    cells.push_back(left);
    cells.push_back(right);
  }
  for (const Scalar& p : points_)
    if (p != x) pts.push_back(p);
  return RSet::from(std::move(cells), std::move(pts));
}

RSet RSet::unite(const RSet& other) const {
  std::vector<Cell> cells = cells_;
  cells.insert(cells.end(), other.cells_.begin(), other.cells_.end());
  std::vector<Scalar> pts = points_;
  pts.insert(pts.end(), other.points_.begin(), other.points_.end());
  return from(std::move(cells), std::move(pts));
}

ExtScalar RSet::inf() const {
  ExtScalar best = ExtScalar::pos_inf();
  for (const Cell& c : cells_) best = min(best, c.lo);
  for (const Scalar& p : points_) best = min(best, ExtScalar(p));
  return best;
}

ExtScalar RSet::sup() const {
  ExtScalar best = ExtScalar::neg_inf();
  for (const Cell& c : cells_) best = max(best, c.hi);
  for (const Scalar& p : points_) best = max(best, ExtScalar(p));
  return best;
}

bool RSet::inf_attained() const {
  const ExtScalar m = inf();
  if (!m.is_finite()) return false;
  for (const Cell& c : cells_)
    if (c.lo == m && c.lo_closed) return true;
  for (const Scalar& p : points_)
    if (ExtScalar(p) == m) return true;
  return false;
}

bool RSet::sup_attained() const {
  const ExtScalar m = sup();
  if (!m.is_finite()) return false;
  for (const Cell& c : cells_)
    if (c.hi == m && c.hi_closed) return true;
  for (const Scalar& p : points_)
    if (ExtScalar(p) == m) return true;
  return false;
}

std::string RSet::to_string() const {
  if (is_empty()) return "{}";
  std::ostringstream os;
  bool first = true;
  for (const Cell& c : cells_) {
    if (!first) os << " u ";
    os << c.to_string();
    first = false;
  }
  if (!points_.empty()) {
    if (!first) os << " u ";
    os << '{';
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (i) os << ", ";
      os << points_[i].format();
    }
    os << '}';
  }
  return os.str();
}

bool operator==(const RSet& a, const RSet& b) {
  return !subset_witness(a, b) && !subset_witness(b, a);
}

// ---------------------------------------------------------------------------
// Binary queries

ExtScalar excess(const RSet& a, const RSet& b) {
  if (a.is_empty()) return ExtScalar(Scalar(0));
  const RSet cb = b.closure();
  if (cb.is_empty()) return ExtScalar::pos_inf();
  const RSet ca = a.closure();

  if (ca.inf().is_neg_inf() && !cb.inf().is_neg_inf())
    return ExtScalar::pos_inf();
  if (ca.sup().is_pos_inf() && !cb.sup().is_pos_inf())
    return ExtScalar::pos_inf();

  // d(., cl b) is piecewise linear with knots at the component endpoints of
  // cl b and the midpoints of its gaps; the sup over the closed set cl a is
  // attained at such a knot or at a component endpoint of cl a.
  std::vector<Scalar> cands;
  for (const Cell& c : ca.cells()) {
    if (c.lo.is_finite()) cands.push_back(c.lo.finite());
    if (c.hi.is_finite()) cands.push_back(c.hi.finite());
  }
  for (const Scalar& p : ca.points()) cands.push_back(p);

  // Components of cl b in order: cells then points are already sorted, merge
  // them into one ordered list of closed parts.
  std::vector<std::pair<ExtScalar, ExtScalar>> parts;
  for (const Cell& c : cb.cells()) parts.emplace_back(c.lo, c.hi);
  for (const Scalar& p : cb.points()) parts.emplace_back(ExtScalar(p), ExtScalar(p));
  std::sort(parts.begin(), parts.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& part : parts) {
    for (const ExtScalar& e : {part.first, part.second})
      if (e.is_finite() && ca.contains(e.finite())) cands.push_back(e.finite());
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const Scalar mid =
        (parts[i].second.finite() + parts[i + 1].first.finite()) / Scalar(2);
    if (ca.contains(mid)) cands.push_back(mid);
  }

  ExtScalar best(Scalar(0));
  for (const Scalar& x : cands) best = max(best, cb.distance(x));
  return best;
}

ExtScalar min_depth(const RSet& a, const RSet& s) {
  if (a.is_empty()) return ExtScalar::pos_inf();
  const RSet ca = a.closure();

  // Closed hulls of the solid cells of s, merged: the only sets with depth.
  std::vector<Cell> hulls;
  for (const Cell& c : s.cells())
    if (c.density == Density::solid) hulls.push_back(Cell::closed(c.lo, c.hi));
  RSet support = RSet::from(hulls, {});

  // Any part of cl a outside the support has depth zero.
  auto covered_interval = [&](const ExtScalar& lo, const ExtScalar& hi) {
    for (const Cell& h : support.cells())
      if (!(lo < h.lo) && !(h.hi < hi)) return true;
    return false;
  };
  for (const Cell& c : ca.cells())
    if (!covered_interval(c.lo, c.hi)) return ExtScalar(Scalar(0));
  for (const Scalar& p : ca.points())
    if (!covered_interval(ExtScalar(p), ExtScalar(p))) return ExtScalar(Scalar(0));

  // depth(x) = min(x - lo, hi - x) on the solid cell containing x; its minima
  // over cl a sit at component endpoints of cl a or at solid-cell endpoints.
  std::vector<Scalar> cands;
  for (const Cell& c : ca.cells()) {
    if (c.lo.is_finite()) cands.push_back(c.lo.finite());
    if (c.hi.is_finite()) cands.push_back(c.hi.finite());
  }
  for (const Scalar& p : ca.points()) cands.push_back(p);
  for (const Cell& c : s.cells()) {
    if (c.density != Density::solid) continue;
    for (const ExtScalar& e : {c.lo, c.hi})
      if (e.is_finite() && ca.contains(e.finite())) cands.push_back(e.finite());
  }
  if (cands.empty()) return ExtScalar::pos_inf();  // doubly infinite everywhere

  auto depth_at = [&](const Scalar& x) {
    ExtScalar best(Scalar(0));
    const ExtScalar ex(x);
    for (const Cell& c : s.cells()) {
      if (c.density != Density::solid) continue;
      if (ex < c.lo || c.hi < ex) continue;
      best = max(best, min(ex - c.lo, c.hi - ex));
    }
    return best;
  };
  ExtScalar best = ExtScalar::pos_inf();
  for (const Scalar& x : cands) best = min(best, depth_at(x));
  return best;
}

RSet minkowski(const RSet& a, const RSet& b) {
  std::vector<Cell> cells;
  std::vector<Scalar> pts;

  auto shift_cell = [](const Cell& c, const Scalar& t) {
    Cell n = c;
    n.lo = c.lo + t;
    n.hi = c.hi + t;
    if (n.density == Density::dense) n.dense_offset = c.dense_offset + t;
    return n;
  };

  for (const Cell& ca : a.cells()) {
    for (const Cell& cb : b.cells()) {
      Cell sum;
      sum.lo = ca.lo + cb.lo;
      sum.hi = ca.hi + cb.hi;
      sum.lo_closed = ca.lo_closed && cb.lo_closed;
      sum.hi_closed = ca.hi_closed && cb.hi_closed;
      if (ca.density == Density::dense && cb.density == Density::dense) {
        sum.density = Density::dense;
        sum.dense_offset = ca.dense_offset + cb.dense_offset;
      }
      // solid + dense over a nondegenerate solid cell fills the interval.
      cells.push_back(sum);
    }
    for (const Scalar& p : b.points()) cells.push_back(shift_cell(ca, p));
  }
  for (const Scalar& p : a.points()) {
    for (const Cell& cb : b.cells()) cells.push_back(shift_cell(cb, p));
    for (const Scalar& q : b.points()) pts.push_back(p + q);
  }
  return RSet::from(std::move(cells), std::move(pts));
}

RSet intersect(const RSet& a, const Cell& window) {
  std::vector<Cell> cells;
  std::vector<Scalar> pts;
  for (const Cell& c : a.cells()) {
    Cell m = meet(c, window);
    if (interval_empty(m)) continue;
    if (window.density == Density::dense) {
      if (c.density == Density::dense) {
        Cell w = window;
        canonicalize(w);
        if (!same_class(m, w)) continue;  // disjoint classes
      } else {
        m.density = Density::dense;
        m.dense_offset = window.dense_offset;
      }
    }
    cells.push_back(m);
  }
  for (const Scalar& p : a.points())
    if (window.contains(p)) pts.push_back(p);
  return RSet::from(std::move(cells), std::move(pts));
}

RSet intersect(const RSet& a, const RSet& b) {
  RSet out;
  for (const Cell& w : b.cells()) out = out.unite(intersect(a, w));
  std::vector<Scalar> pts;
  for (const Scalar& p : b.points())
    if (a.contains(p)) pts.push_back(p);
  return out.unite(RSet::from({}, std::move(pts)));
}

std::optional<Scalar> subset_witness(const RSet& a, const RSet& b) {
  for (const Scalar& p : a.points())
    if (!b.contains(p)) return p;

  std::vector<Cell> b_solid;
  std::vector<Rational> b_dense_rads;
  for (const Cell& c : b.cells()) {
    if (c.density == Density::solid)
      b_solid.push_back(c);
    else
      b_dense_rads.push_back(c.dense_offset.rad());
  }

  for (const Cell& c : a.cells()) {
    if (c.density == Density::solid) {
      for (const Cell& frag : subtract_all(c, b_solid)) {
        if (interval_degenerate(frag)) {
          const Scalar p = frag.lo.finite();
          if (!b.contains(p)) return p;
          continue;
        }
        // A nondegenerate stretch of a solid cell can never be covered by
        // countable material; pick a concrete uncovered point.
        return pick_avoiding(frag, b_dense_rads, b.points());
      }
    } else {
      // Only solid cells and same-class dense cells of b can cover this
      // class; different classes are disjoint from it.
      std::vector<Cell> removals = b_solid;
      for (const Cell& d : b.cells())
        if (d.density == Density::dense && same_class(d, c))
          removals.push_back(d);
      for (const Cell& frag : subtract_all(c, removals)) {
        if (interval_degenerate(frag)) {
          const Scalar p = frag.lo.finite();
          if ((p - c.dense_offset).is_rational() && !b.contains(p)) return p;
          continue;
        }
        // Class points are dense in the fragment; dodge b's isolated points.
        std::vector<Scalar> blockers;
        for (const Scalar& p : b.points())
          if ((p - c.dense_offset).is_rational() && interval_contains(frag, p))
            blockers.push_back(p);
        std::sort(blockers.begin(), blockers.end());
        ExtScalar lo = frag.lo;
        for (std::size_t i = 0; i <= blockers.size(); ++i) {
          const ExtScalar hi =
              i < blockers.size() ? ExtScalar(blockers[i]) : frag.hi;
          if (lo < hi) {
            const Scalar off = c.dense_offset;
            const Rational q = rational_between(lo - ExtScalar(off), hi - ExtScalar(off));
            return off + Scalar(q);
          }
          if (i < blockers.size()) lo = ExtScalar(blockers[i]);
        }
      }
    }
  }
  return std::nullopt;
}

ExtScalar distance_to_difference(const Scalar& y, const RSet& a, const RSet& b) {
  ExtScalar best = ExtScalar::pos_inf();
  for (const Scalar& p : a.points())
    if (!b.contains(p)) best = min(best, ExtScalar(abs_diff(y, p)));

  std::vector<Cell> b_solid;
  for (const Cell& c : b.cells())
    if (c.density == Density::solid) b_solid.push_back(c);

  for (const Cell& c : a.cells()) {
    std::vector<Cell> removals = b_solid;
    if (c.density == Density::dense)
      for (const Cell& d : b.cells())
        if (d.density == Density::dense && same_class(d, c))
          removals.push_back(d);
    for (const Cell& frag : subtract_all(c, removals)) {
      if (interval_degenerate(frag)) {
        const Scalar p = frag.lo.finite();
        const bool in_a = c.density == Density::solid ||
                          (p - c.dense_offset).is_rational();
        if (in_a && !b.contains(p)) best = min(best, ExtScalar(abs_diff(y, p)));
        continue;
      }
      // Nondegenerate remainder: removing countably many points (dense
      // classes or isolated points of b) cannot raise the infimum.
      best = min(best, hull_distance(frag, y));
    }
  }
  return best;
}

}  // namespace regmod
