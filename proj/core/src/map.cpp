// regmod — exact one-dimensional set-valued analysis laboratory.
//
// Multifunction layer: piecewise-affine maps with exceptional fibers, exact
// fiber/image/preimage/inverse/sum algebra, bespoke sequence-tail map,
// parametric maps and their solution maps.

#include "regmod/map.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

#include "regmod/sweep.hpp"

namespace regmod {
namespace {

ExtScalar form_at(const AffineForm& f, const ExtScalar& x) {
  if (x.is_finite()) return ExtScalar(f.eval(x.finite()));
  const int s = f.a.sign();
  if (s == 0) return ExtScalar(f.b);
  const bool up = (s > 0) == x.is_pos_inf();
  return up ? ExtScalar::pos_inf() : ExtScalar::neg_inf();
}

// { x : a*x + b <= rhs } (strict when closed is false); nullopt when empty;
// the whole line when the condition does not involve x.
std::optional<Cell> halfline_le(const Scalar& a, const Scalar& b,
                                const Scalar& rhs, bool closed) {
  if (a.is_zero()) {
    if (b < rhs || (b == rhs && closed))
      return Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf());
    return std::nullopt;
  }
  const Scalar bound = (rhs - b) / a;
  if (a.sign() > 0)
    return Cell::solid(ExtScalar::neg_inf(), false, ExtScalar(bound), closed);
  return Cell::solid(ExtScalar(bound), closed, ExtScalar::pos_inf(), false);
}

std::optional<Cell> halfline_ge(const Scalar& a, const Scalar& b,
                                const Scalar& rhs, bool closed) {
  return halfline_le(-a, -b, -rhs, closed);
}

void push_crossing(std::vector<Scalar>& out, const AffineForm& f,
                   const AffineForm& g) {
  if (f.a == g.a) return;
  out.push_back((g.b - f.b) / (f.a - g.a));
}

std::vector<Scalar> dedup(std::vector<Scalar> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Intersection of two solid interval cells (flags exact).
Cell meet_solid(const Cell& a, const Cell& b) {
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

// The cell cut open at finitely many interior abscissae, membership-exact
// degenerate parts included.  Cuts at non-members still split the cell, so a
// different bound regime on each side always lands in different parts.
std::vector<Cell> split_cell_at(const Cell& dom, const std::vector<Scalar>& cuts) {
  std::vector<Cell> parts{dom};
  for (const Scalar& c : cuts) {
    const ExtScalar ec(c);
    std::vector<Cell> next;
    for (const Cell& cell : parts) {
      if (!(cell.lo < ec && ec < cell.hi)) {
        next.push_back(cell);
        continue;
      }
      Cell left = cell, right = cell;
      left.hi = ec;
      left.hi_closed = false;
      right.lo = ec;
      right.lo_closed = false;
      next.push_back(left);
      if (cell.contains(c)) next.push_back(Cell::solid(ec, true, ec, true));
      next.push_back(right);
    }
    parts = std::move(next);
  }
  std::vector<Cell> live;
  for (const Cell& cell : parts)
    if (!cell.is_empty()) live.push_back(cell);
  return live;
}

// Generic fiber of one piece at one abscissa; nullopt when it is empty or
// the abscissa is outside the piece.
std::optional<Cell> piece_value_at(const Piece& piece, const Scalar& x) {
  if (!piece.dom.contains(x)) return std::nullopt;
  const ExtScalar lo =
      piece.lower ? ExtScalar(piece.lower->eval(x)) : ExtScalar::neg_inf();
  const ExtScalar hi =
      piece.upper ? ExtScalar(piece.upper->eval(x)) : ExtScalar::pos_inf();
  const bool locl = piece.lower && piece.lo_closed;
  const bool hicl = piece.upper && piece.hi_closed;
  const Cell c = piece.value_density == Density::dense
                     ? Cell::dense(lo, locl, hi, hicl, piece.value_offset)
                     : Cell::solid(lo, locl, hi, hicl);
  if (c.is_empty()) return std::nullopt;
  return c;
}

// The sub-part of K on which the generic fiber of `piece` is nonempty.
RSet nonempty_part(const Piece& piece, const Cell& K) {
  RSet r = RSet::of_cell(K);
  if (!piece.lower || !piece.upper) return r;
  const Scalar ga = piece.upper->a - piece.lower->a;
  const Scalar gb = piece.upper->b - piece.lower->b;
  const bool both = piece.lo_closed && piece.hi_closed;
  if (ga.is_zero()) {
    if (gb.sign() > 0) return r;
    if (gb.sign() < 0 || !both) return RSet();
    // l == u identically: single-valued affine; dense values additionally
    // need the class membership of l(x).
    if (piece.value_density == Density::dense) {
      const Scalar a = piece.lower->a;
      const Scalar shift = piece.value_offset - piece.lower->b;
      if (a.is_zero())
        return (-shift).is_rational() ? r : RSet();
      if (!a.is_rational())
        throw Unrepresentable(
            "dense-valued single-valued piece with irrational slope");
      // l(x) in offset + Q  <=>  x in (offset - b)/a + Q
      const Cell cls = Cell::dense(ExtScalar::neg_inf(), false,
                                   ExtScalar::pos_inf(), false, shift / a);
      return intersect(r, cls);
    }
    return r;
  }
  const auto half = halfline_ge(ga, gb, Scalar(0), both);
  if (!half) return RSet();
  r = intersect(r, *half);
  if (piece.value_density == Density::dense && both) {
    // At the pinch the single value must lie in the class.
    const Scalar root = -gb / ga;
    if (r.contains(root)) {
      const Scalar v = piece.lower->eval(root);
      if (!(v - piece.value_offset).is_rational()) r = r.without_point(root);
    }
  }
  return r;
}

// Extremal image value contributed by one bound of a piece over a part K,
// with exact attainment.
std::pair<ExtScalar, bool> side_bound(const Piece& piece, const Cell& K,
                                      bool lower_side) {
  const AffineForm& f = lower_side ? *piece.lower : *piece.upper;
  const bool flag = lower_side ? piece.lo_closed : piece.hi_closed;
  if (!f.a.is_zero()) {
    const bool at_lo_end = lower_side == (f.a.sign() > 0);
    const ExtScalar xe = at_lo_end ? K.lo : K.hi;
    const bool end_closed = at_lo_end ? K.lo_closed : K.hi_closed;
    const ExtScalar v = form_at(f, xe);
    bool att = false;
    if (flag && end_closed && xe.is_finite()) {
      if (const auto c = piece_value_at(piece, xe.finite()))
        att = c->contains(v.finite());
    }
    return {v, att};
  }
  // Constant bound: attained iff some abscissa of K carries it.
  const ExtScalar v(f.b);
  if (!flag) return {v, false};
  if (piece.value_density == Density::dense &&
      !(f.b - piece.value_offset).is_rational())
    return {v, false};
  RSet region = RSet::of_cell(K);
  const std::optional<AffineForm>& other = lower_side ? piece.upper : piece.lower;
  const bool oflag = lower_side ? piece.hi_closed : piece.lo_closed;
  if (other) {
    const auto half = lower_side ? halfline_ge(other->a, other->b, f.b, oflag)
                                 : halfline_le(other->a, other->b, f.b, oflag);
    if (!half) return {v, false};
    region = intersect(region, *half);
  }
  return {v, !region.is_empty()};
}

// Exact image of one piece over a nondegenerate part K with nonempty fibers.
RSet image_hull(const Piece& piece, const Cell& K) {
  const bool degenerate_affine = piece.lower && piece.upper &&
                                 piece.lower->a == piece.upper->a &&
                                 piece.lower->b == piece.upper->b;
  ExtScalar lo_v = ExtScalar::neg_inf(), hi_v = ExtScalar::pos_inf();
  bool lo_att = false, hi_att = false;
  if (piece.lower) std::tie(lo_v, lo_att) = side_bound(piece, K, true);
  if (piece.upper) std::tie(hi_v, hi_att) = side_bound(piece, K, false);

  if (degenerate_affine && K.density == Density::dense &&
      piece.value_density == Density::solid) {
    // Affine image of a rational class.
    const AffineForm& f = *piece.lower;
    if (f.a.is_zero()) return RSet::point(f.b);
    if (!f.a.is_rational())
      throw Unrepresentable("image of a dense class under an irrational slope");
    return RSet::of_cell(Cell::dense(lo_v, lo_att, hi_v, hi_att,
                                     f.a * K.dense_offset + f.b));
  }
  if (piece.value_density == Density::dense)
    return RSet::of_cell(
        Cell::dense(lo_v, lo_att, hi_v, hi_att, piece.value_offset));
  return RSet::of_cell(Cell::solid(lo_v, lo_att, hi_v, hi_att));
}

struct BoundCand {
  AffineForm form;
  bool closed;
};

// Pieces over `window` split wherever the binding lower (max) or upper (min)
// candidate changes; ties carry the conjunction of the closedness flags.
void emit_extremal_pieces(const Cell& window,
                          const std::vector<BoundCand>& lowers,
                          const std::vector<BoundCand>& uppers, Density vd,
                          const Scalar& voff, std::vector<Piece>& out) {
  if (window.is_empty()) return;
  std::vector<Scalar> cuts;
  for (std::size_t i = 0; i < lowers.size(); ++i)
    for (std::size_t j = i + 1; j < lowers.size(); ++j)
      push_crossing(cuts, lowers[i].form, lowers[j].form);
  for (std::size_t i = 0; i < uppers.size(); ++i)
    for (std::size_t j = i + 1; j < uppers.size(); ++j)
      push_crossing(cuts, uppers[i].form, uppers[j].form);
  for (const Cell& sub : split_cell_at(window, dedup(std::move(cuts)))) {
    const Scalar sample = sub.lo == sub.hi
                              ? sub.lo.finite()
                              : Scalar(rational_between(sub.lo, sub.hi));
    Piece np;
    np.dom = sub;
    np.value_density = vd;
    np.value_offset = voff;
    if (!lowers.empty()) {
      std::size_t bi = 0;
      Scalar bv = lowers[0].form.eval(sample);
      bool bc = lowers[0].closed;
      for (std::size_t k = 1; k < lowers.size(); ++k) {
        const Scalar v = lowers[k].form.eval(sample);
        if (v > bv) {
          bv = v;
          bi = k;
          bc = lowers[k].closed;
        } else if (v == bv) {
          bc = bc && lowers[k].closed;
        }
      }
      np.lower = lowers[bi].form;
      np.lo_closed = bc;
    }
    if (!uppers.empty()) {
      std::size_t bi = 0;
      Scalar bv = uppers[0].form.eval(sample);
      bool bc = uppers[0].closed;
      for (std::size_t k = 1; k < uppers.size(); ++k) {
        const Scalar v = uppers[k].form.eval(sample);
        if (v < bv) {
          bv = v;
          bi = k;
          bc = uppers[k].closed;
        } else if (v == bv) {
          bc = bc && uppers[k].closed;
        }
      }
      np.upper = uppers[bi].form;
      np.hi_closed = bc;
    }
    out.push_back(np);
  }
}

// Where a piece's bound value is actually attained, as a set of abscissae:
// everywhere, nowhere, or exactly on one rational class (a dense-valued piece
// whose sloped bound enters its class on a class of inputs).
enum class AttainKind { all, none, cls, unrep };
struct Attain {
  AttainKind kind;
  Scalar offset;  // class offset when kind == cls
};

Attain bound_attain(const Piece& p, bool lower_side) {
  const AffineForm& f = lower_side ? *p.lower : *p.upper;
  const bool flag = lower_side ? p.lo_closed : p.hi_closed;
  if (!flag) return {AttainKind::none, Scalar()};
  if (p.value_density == Density::solid) return {AttainKind::all, Scalar()};
  if (f.a.is_zero())
    return {(f.b - p.value_offset).is_rational() ? AttainKind::all
                                                 : AttainKind::none,
            Scalar()};
  if (!f.a.is_rational()) return {AttainKind::unrep, Scalar()};
  return {AttainKind::cls, (p.value_offset - f.b) / f.a};
}

// Conjunction of two attainment sets; nullopt when it has no eager
// representation.
std::optional<Attain> meet_attain(const Attain& a, const Attain& b) {
  if (a.kind == AttainKind::none || b.kind == AttainKind::none)
    return Attain{AttainKind::none, Scalar()};
  if (a.kind == AttainKind::unrep || b.kind == AttainKind::unrep)
    return std::nullopt;
  if (a.kind == AttainKind::all) return b;
  if (b.kind == AttainKind::all) return a;
  if ((a.offset - b.offset).is_rational()) return a;
  return Attain{AttainKind::none, Scalar()};
}

// Pieces with the single value x0 removed from every fiber.
std::vector<Piece> puncture_pieces(std::vector<Piece> pieces, const Scalar& x0) {
  const ExtScalar X0(x0);
  std::vector<Piece> out;
  for (const Piece& p : pieces) {
    std::vector<Scalar> cuts;
    if (p.lower && !p.lower->a.is_zero())
      cuts.push_back((x0 - p.lower->b) / p.lower->a);
    if (p.upper && !p.upper->a.is_zero())
      cuts.push_back((x0 - p.upper->b) / p.upper->a);
    for (const Cell& sub : split_cell_at(p.dom, dedup(cuts))) {
      const Scalar sample = sub.lo == sub.hi
                                ? sub.lo.finite()
                                : Scalar(rational_between(sub.lo, sub.hi));
      const ExtScalar lv =
          p.lower ? ExtScalar(p.lower->eval(sample)) : ExtScalar::neg_inf();
      const ExtScalar uv =
          p.upper ? ExtScalar(p.upper->eval(sample)) : ExtScalar::pos_inf();
      Piece n = p;
      n.dom = sub;
      if (uv < X0 || X0 < lv) {
        out.push_back(n);
      } else if (lv == X0 && uv == X0) {
        // fiber was exactly {x0}
      } else if (uv == X0) {
        n.hi_closed = false;
        out.push_back(n);
      } else if (lv == X0) {
        n.lo_closed = false;
        out.push_back(n);
      } else {
        Piece a = n, b = n;
        a.upper = AffineForm{Scalar(0), x0};
        a.hi_closed = false;
        b.lower = AffineForm{Scalar(0), x0};
        b.lo_closed = false;
        out.push_back(a);
        out.push_back(b);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PAMap

PAMap::PAMap(std::vector<Piece> pieces, std::vector<ExceptionalFiber> exceptional)
    : pieces_(std::move(pieces)), exceptional_(std::move(exceptional)) {}

RSet PAMap::fiber(const Scalar& x) const {
  RSet out;
  bool replaced = false;
  for (const ExceptionalFiber& ex : exceptional_) {
    if (ex.x != x || ex.mode != FiberMode::replace) continue;
    out = out.unite(ex.set);
    replaced = true;
  }
  if (!replaced) {
    for (const Piece& p : pieces_)
      if (const auto c = piece_value_at(p, x)) out = out.unite(RSet::of_cell(*c));
  }
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.x == x && ex.mode == FiberMode::add) out = out.unite(ex.set);
  return out;
}

RSet PAMap::image(const Cell& input) const {
  if (input.is_empty()) return RSet();
  RSet xs = RSet::of_cell(input);
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.mode == FiberMode::replace && input.contains(ex.x))
      xs = xs.without_point(ex.x);
  RSet out;
  for (const Piece& piece : pieces_) {
    const RSet parts = intersect(xs, piece.dom);
    for (const Cell& K : parts.cells()) {
      const RSet live = nonempty_part(piece, K);
      for (const Cell& K2 : live.cells()) out = out.unite(image_hull(piece, K2));
      for (const Scalar& q : live.points())
        if (const auto c = piece_value_at(piece, q))
          out = out.unite(RSet::of_cell(*c));
    }
    for (const Scalar& q : parts.points())
      if (const auto c = piece_value_at(piece, q))
        out = out.unite(RSet::of_cell(*c));
  }
  for (const ExceptionalFiber& ex : exceptional_)
    if (input.contains(ex.x)) out = out.unite(ex.set);
  return out;
}

RSet PAMap::preimage_point(const Scalar& y) const {
  RSet out;
  for (const Piece& piece : pieces_) {
    if (piece.value_density == Density::dense &&
        !(y - piece.value_offset).is_rational())
      continue;
    RSet r = RSet::of_cell(piece.dom);
    bool dead = false;
    if (piece.lower) {
      const auto half =
          halfline_le(piece.lower->a, piece.lower->b, y, piece.lo_closed);
      if (!half)
        dead = true;
      else
        r = intersect(r, *half);
    }
    if (!dead && piece.upper) {
      const auto half =
          halfline_ge(piece.upper->a, piece.upper->b, y, piece.hi_closed);
      if (!half)
        dead = true;
      else
        r = intersect(r, *half);
    }
    if (!dead) out = out.unite(r);
  }
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.mode == FiberMode::replace) out = out.without_point(ex.x);
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.set.contains(y)) out = out.unite(RSet::point(ex.x));
  return out;
}

RSet PAMap::preimage(const Cell& values) const {
  if (values.is_empty()) return RSet();
  if (values.density == Density::dense)
    throw UnsupportedOperation("preimage of a dense cell");
  if (values.lo == values.hi) return preimage_point(values.lo.finite());

  RSet out;
  std::vector<Scalar> candidates;
  for (const Piece& piece : pieces_) {
    const bool dense_val = piece.value_density == Density::dense;
    const bool degenerate_const = piece.lower && piece.upper &&
                                  piece.lower->a.is_zero() &&
                                  piece.upper->a.is_zero() &&
                                  piece.lower->b == piece.upper->b;
    if (degenerate_const) {
      // Constant single-valued piece: the whole domain or nothing.
      const Scalar v = piece.lower->b;
      if (piece.lo_closed && piece.hi_closed && values.contains(v) &&
          (!dense_val || (v - piece.value_offset).is_rational()))
        out = out.unite(RSet::of_cell(piece.dom));
      continue;
    }
    RSet r = RSet::of_cell(piece.dom);
    bool dead = false;
    auto apply = [&](const std::optional<Cell>& half) {
      if (!half)
        dead = true;
      else
        r = intersect(r, *half);
    };
    if (piece.lower && values.hi.is_finite())
      apply(halfline_le(piece.lower->a, piece.lower->b, values.hi.finite(),
                        !dense_val && piece.lo_closed && values.hi_closed));
    if (!dead && piece.upper && values.lo.is_finite())
      apply(halfline_ge(piece.upper->a, piece.upper->b, values.lo.finite(),
                        !dense_val && piece.hi_closed && values.lo_closed));
    if (!dead && piece.lower && piece.upper)
      apply(halfline_ge(piece.upper->a - piece.lower->a,
                        piece.upper->b - piece.lower->b, Scalar(0),
                        !dense_val && piece.lo_closed && piece.hi_closed));
    if (!dead) out = out.unite(r);

    if (dense_val) {
      // Touching configurations collapse the overlap to one value; check the
      // finitely many roots pointwise against the true fiber.
      auto root_of = [&](const AffineForm& f, const ExtScalar& level) {
        if (f.a.is_zero() || !level.is_finite()) return;
        candidates.push_back((level.finite() - f.b) / f.a);
      };
      if (piece.lower) root_of(*piece.lower, values.hi);
      if (piece.upper) root_of(*piece.upper, values.lo);
      if (piece.lower && piece.upper)
        root_of(AffineForm{piece.upper->a - piece.lower->a,
                           piece.upper->b - piece.lower->b},
                ExtScalar(Scalar(0)));
    }
  }
  if (values.lo.is_finite() && values.lo_closed)
    out = out.unite(preimage_point(values.lo.finite()));
  if (values.hi.is_finite() && values.hi_closed)
    out = out.unite(preimage_point(values.hi.finite()));
  for (const Scalar& x : dedup(std::move(candidates)))
    if (!intersect(fiber(x), values).is_empty())
      out = out.unite(RSet::point(x));

  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.mode == FiberMode::replace) out = out.without_point(ex.x);
  for (const ExceptionalFiber& ex : exceptional_)
    if (!intersect(ex.set, values).is_empty())
      out = out.unite(RSet::point(ex.x));
  return out;
}

RSet PAMap::domain() const {
  RSet out;
  for (const Piece& piece : pieces_) {
    const RSet parts = RSet::of_cell(piece.dom);
    for (const Cell& K : parts.cells()) out = out.unite(nonempty_part(piece, K));
    for (const Scalar& q : parts.points())
      if (piece_value_at(piece, q)) out = out.unite(RSet::point(q));
  }
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.mode == FiberMode::replace) out = out.without_point(ex.x);
  for (const ExceptionalFiber& ex : exceptional_)
    if (!fiber(ex.x).is_empty()) out = out.unite(RSet::point(ex.x));
  return out;
}

PAMap PAMap::negated() const {
  std::vector<Piece> ps;
  for (const Piece& p : pieces_) {
    Piece n = p;
    n.lower = p.upper ? std::optional<AffineForm>(AffineForm{-p.upper->a,
                                                             -p.upper->b})
                      : std::nullopt;
    n.upper = p.lower ? std::optional<AffineForm>(AffineForm{-p.lower->a,
                                                             -p.lower->b})
                      : std::nullopt;
    n.lo_closed = p.hi_closed;
    n.hi_closed = p.lo_closed;
    n.value_offset = -p.value_offset;
    ps.push_back(n);
  }
  std::vector<ExceptionalFiber> exs;
  for (const ExceptionalFiber& ex : exceptional_)
    exs.push_back({ex.x, ex.set.negate(), ex.mode});
  return PAMap(std::move(ps), std::move(exs));
}

PAMap PAMap::inverted() const {
  std::vector<Piece> out;
  for (const Piece& piece : pieces_) {
    std::vector<BoundCand> lowers, uppers;
    ExtScalar ylo = ExtScalar::neg_inf(), yhi = ExtScalar::pos_inf();
    bool ylo_cl = false, yhi_cl = false;
    auto tighten_lo = [&](const Scalar& v, bool cl) {
      if (ExtScalar(v) > ylo) {
        ylo = ExtScalar(v);
        ylo_cl = cl;
      } else if (ExtScalar(v) == ylo) {
        ylo_cl = ylo_cl && cl;
      }
    };
    auto tighten_hi = [&](const Scalar& v, bool cl) {
      if (ExtScalar(v) < yhi) {
        yhi = ExtScalar(v);
        yhi_cl = cl;
      } else if (ExtScalar(v) == yhi) {
        yhi_cl = yhi_cl && cl;
      }
    };
    if (piece.lower) {
      if (piece.lower->a.is_zero()) {
        tighten_lo(piece.lower->b, piece.lo_closed);
      } else {
        const AffineForm inv{Scalar(1) / piece.lower->a,
                             -piece.lower->b / piece.lower->a};
        if (piece.lower->a.sign() > 0)
          uppers.push_back({inv, piece.lo_closed});
        else
          lowers.push_back({inv, piece.lo_closed});
      }
    }
    if (piece.upper) {
      if (piece.upper->a.is_zero()) {
        tighten_hi(piece.upper->b, piece.hi_closed);
      } else {
        const AffineForm inv{Scalar(1) / piece.upper->a,
                             -piece.upper->b / piece.upper->a};
        if (piece.upper->a.sign() > 0)
          lowers.push_back({inv, piece.hi_closed});
        else
          uppers.push_back({inv, piece.hi_closed});
      }
    }
    if (piece.dom.lo.is_finite())
      lowers.push_back(
          {AffineForm{Scalar(0), piece.dom.lo.finite()}, piece.dom.lo_closed});
    if (piece.dom.hi.is_finite())
      uppers.push_back(
          {AffineForm{Scalar(0), piece.dom.hi.finite()}, piece.dom.hi_closed});

    const Cell ywin =
        piece.value_density == Density::dense
            ? Cell::dense(ylo, ylo_cl, yhi, yhi_cl, piece.value_offset)
            : Cell::solid(ylo, ylo_cl, yhi, yhi_cl);
    emit_extremal_pieces(ywin, lowers, uppers, piece.dom.density,
                         piece.dom.dense_offset, out);
  }
  for (const ExceptionalFiber& ex : exceptional_)
    if (ex.mode == FiberMode::replace) out = puncture_pieces(std::move(out), ex.x);
  for (const ExceptionalFiber& ex : exceptional_) {
    const AffineForm cv{Scalar(0), ex.x};
    for (const Cell& d : ex.set.cells()) {
      Piece np;
      np.dom = d;
      np.lower = np.upper = cv;
      out.push_back(np);
    }
    for (const Scalar& pt : ex.set.points()) {
      Piece np;
      np.dom = Cell::solid(ExtScalar(pt), true, ExtScalar(pt), true);
      np.lower = np.upper = cv;
      out.push_back(np);
    }
  }
  return PAMap(std::move(out), {});
}

std::optional<Scalar> PAMap::single_value(const Scalar& x) const {
  const RSet f = fiber(x);
  if (f.cells().empty() && f.points().size() == 1) return f.points()[0];
  return std::nullopt;
}

std::optional<AffineForm> PAMap::as_affine() const {
  if (!exceptional_.empty() || pieces_.size() != 1) return std::nullopt;
  const Piece& p = pieces_[0];
  if (p.dom.lo.is_finite() || p.dom.hi.is_finite() ||
      p.dom.density == Density::dense)
    return std::nullopt;
  if (!p.lower || !p.upper || p.value_density == Density::dense)
    return std::nullopt;
  if (!(p.lower->a == p.upper->a && p.lower->b == p.upper->b) ||
      !p.lo_closed || !p.hi_closed)
    return std::nullopt;
  return *p.lower;
}

std::vector<AffineForm> PAMap::value_forms() const {
  std::vector<AffineForm> out;
  for (const Piece& p : pieces_) {
    if (p.lower) out.push_back(*p.lower);
    if (p.upper) out.push_back(*p.upper);
  }
  for (const ExceptionalFiber& ex : exceptional_) {
    for (const Cell& c : ex.set.cells()) {
      if (c.lo.is_finite()) out.push_back({Scalar(0), c.lo.finite()});
      if (c.hi.is_finite()) out.push_back({Scalar(0), c.hi.finite()});
    }
    for (const Scalar& p : ex.set.points()) out.push_back({Scalar(0), p});
  }
  return out;
}

std::vector<Scalar> PAMap::structure_abscissae() const {
  std::vector<Scalar> out;
  for (const Piece& p : pieces_) {
    if (p.dom.lo.is_finite()) out.push_back(p.dom.lo.finite());
    if (p.dom.hi.is_finite()) out.push_back(p.dom.hi.finite());
  }
  for (const ExceptionalFiber& ex : exceptional_) out.push_back(ex.x);
  std::vector<AffineForm> forms;
  for (const Piece& p : pieces_) {
    if (p.lower) forms.push_back(*p.lower);
    if (p.upper) forms.push_back(*p.upper);
  }
  for (std::size_t i = 0; i < forms.size(); ++i)
    for (std::size_t j = i + 1; j < forms.size(); ++j)
      push_crossing(out, forms[i], forms[j]);
  return dedup(std::move(out));
}

std::vector<Scalar> PAMap::output_breakpoints() const {
  std::vector<Scalar> out;
  std::vector<AffineForm> forms;
  for (const Piece& p : pieces_) {
    for (const std::optional<AffineForm>& f : {p.lower, p.upper}) {
      if (!f) continue;
      forms.push_back(*f);
      if (p.dom.lo.is_finite()) out.push_back(f->eval(p.dom.lo.finite()));
      if (p.dom.hi.is_finite()) out.push_back(f->eval(p.dom.hi.finite()));
      if (f->a.is_zero()) out.push_back(f->b);
    }
  }
  for (std::size_t i = 0; i < forms.size(); ++i)
    for (std::size_t j = i + 1; j < forms.size(); ++j) {
      if (forms[i].a == forms[j].a) continue;
      const Scalar x = (forms[j].b - forms[i].b) / (forms[i].a - forms[j].a);
      out.push_back(forms[i].eval(x));
    }
  for (const ExceptionalFiber& ex : exceptional_) {
    for (const Cell& c : ex.set.cells()) {
      if (c.lo.is_finite()) out.push_back(c.lo.finite());
      if (c.hi.is_finite()) out.push_back(c.hi.finite());
    }
    for (const Scalar& p : ex.set.points()) out.push_back(p);
  }
  return dedup(std::move(out));
}

std::optional<std::pair<Scalar, Scalar>> PAMap::graph_closure_witness(
    const Cell& xwin, const Cell& ywin) const {
  if (xwin.density != Density::solid || ywin.density != Density::solid)
    throw DomainError("graph closedness requires solid windows");
  if (!xwin.lo.is_finite() || !xwin.hi.is_finite() || !xwin.lo_closed ||
      !xwin.hi_closed || !ywin.lo.is_finite() || !ywin.hi.is_finite() ||
      !ywin.lo_closed || !ywin.hi_closed)
    throw DomainError("graph closedness requires closed bounded windows");
  for (const Piece& p : pieces_)
    if (p.dom.density == Density::dense &&
        !intersect(RSet::of_cell(p.dom), xwin).is_empty())
      throw UnsupportedOperation(
          "graph closedness over a dense-domain piece");

  auto vertical = [&](const Scalar& x)
      -> std::optional<std::pair<Scalar, Scalar>> {
    const RSet f = fiber(x);
    const RSet cl = intersect(f.closure(), ywin);
    if (const auto w = subset_witness(cl, f)) return std::make_pair(x, *w);
    return std::nullopt;
  };

  const auto grid = scan_grid(xwin, structure_abscissae());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ScanPoint& pt = grid[i];
    if (!pt.in_window) continue;
    if (const auto w = vertical(pt.x)) return w;
    if (pt.is_sample) continue;
    // Horizontal closure into the anchor from each adjacent gap.
    const RSet f = fiber(pt.x);
    for (int side = 0; side < 2; ++side) {
      const std::size_t j = side == 0 ? i - 1 : i + 1;
      if (j >= grid.size() || !grid[j].is_sample) continue;
      const Scalar& probe = grid[j].x;
      for (const Piece& piece : pieces_) {
        // The hull at the anchor lies in the closure only when the piece
        // carries graph material on the probed gap; the sign of (upper -
        // lower) and the flags are constant there, so one sample decides.
        if (!piece_value_at(piece, probe)) continue;
        const ExtScalar lo = piece.lower
                                 ? ExtScalar(piece.lower->eval(pt.x))
                                 : ExtScalar::neg_inf();
        const ExtScalar hi = piece.upper
                                 ? ExtScalar(piece.upper->eval(pt.x))
                                 : ExtScalar::pos_inf();
        const Cell hull =
            Cell::solid(max(lo, ywin.lo), true, min(hi, ywin.hi), true);
        if (hull.is_empty()) continue;
        if (const auto w = subset_witness(RSet::of_cell(hull), f))
          return std::make_pair(pt.x, *w);
      }
    }
  }
  return std::nullopt;
}

bool PAMap::graph_closed_on(const Cell& xwin, const Cell& ywin) const {
  return !graph_closure_witness(xwin, ywin).has_value();
}

std::optional<PAMap> sum_pamaps(const PAMap& f, const PAMap& g) {
  std::vector<Piece> pieces;
  for (const Piece& a : f.pieces()) {
    for (const Piece& b : g.pieces()) {
      const bool fa_dense = a.value_density == Density::dense;
      const bool gb_dense = b.value_density == Density::dense;
      Density vd = Density::solid;
      Scalar voff;
      if (fa_dense && gb_dense) {
        vd = Density::dense;
        voff = a.value_offset + b.value_offset;
      } else if (fa_dense || gb_dense) {
        const Piece& flat = fa_dense ? b : a;
        const Piece& classed = fa_dense ? a : b;
        const bool flat_degenerate = flat.lower && flat.upper &&
                                     flat.lower->a == flat.upper->a &&
                                     flat.lower->b == flat.upper->b;
        if (flat_degenerate) {
          if (!flat.lower->a.is_zero()) return std::nullopt;
          vd = Density::dense;
          voff = classed.value_offset + flat.lower->b;
        }
        // Otherwise a nondegenerate solid interval absorbs the class: solid.
      }
      Piece np;
      np.value_density = vd;
      np.value_offset = voff;
      // A bound of the sum is attained where both summands attain theirs;
      // for dense pieces that holds on a rational class of abscissae, which
      // a constant flag cannot express, so the main piece stays open there
      // and singleton endpoint pieces over the class supply the bound value.
      std::optional<Attain> at_lo, at_hi;
      if (a.lower && b.lower) {
        np.lower = AffineForm{a.lower->a + b.lower->a, a.lower->b + b.lower->b};
        at_lo = meet_attain(bound_attain(a, true), bound_attain(b, true));
        if (!at_lo) return std::nullopt;
        np.lo_closed = at_lo->kind == AttainKind::all;
      } else {
        np.lower = std::nullopt;
      }
      if (a.upper && b.upper) {
        np.upper = AffineForm{a.upper->a + b.upper->a, a.upper->b + b.upper->b};
        at_hi = meet_attain(bound_attain(a, false), bound_attain(b, false));
        if (!at_hi) return std::nullopt;
        np.hi_closed = at_hi->kind == AttainKind::all;
      } else {
        np.upper = std::nullopt;
      }
      // Restrict to abscissae where both fibers are nonempty.
      const RSet live_a = nonempty_part(a, a.dom);
      const RSet live = intersect(live_a, nonempty_part(b, b.dom));
      for (const Cell& d : live.cells()) {
        np.dom = d;
        pieces.push_back(np);
      }
      for (const Scalar& q : live.points()) {
        np.dom = Cell::solid(ExtScalar(q), true, ExtScalar(q), true);
        pieces.push_back(np);
      }
      auto push_endpoint = [&](const AffineForm& form, const Attain& at) {
        if (at.kind != AttainKind::cls) return;
        const Cell cls = Cell::dense(ExtScalar::neg_inf(), false,
                                     ExtScalar::pos_inf(), false, at.offset);
        Piece ep;
        ep.lower = ep.upper = form;
        const RSet where = intersect(live, cls);
        for (const Cell& d : where.cells()) {
          ep.dom = d;
          pieces.push_back(ep);
        }
        for (const Scalar& q : where.points()) {
          ep.dom = Cell::solid(ExtScalar(q), true, ExtScalar(q), true);
          pieces.push_back(ep);
        }
      };
      if (np.lower && at_lo) push_endpoint(*np.lower, *at_lo);
      if (np.upper && at_hi) push_endpoint(*np.upper, *at_hi);
    }
  }
  // Exceptional abscissae of either side, plus isolated pinches (where a
  // piece's fiber collapses to a point the density algebra can flip): take
  // the exact Minkowski fiber there.
  std::vector<Scalar> specials;
  for (const ExceptionalFiber& ex : f.exceptional()) specials.push_back(ex.x);
  for (const ExceptionalFiber& ex : g.exceptional()) specials.push_back(ex.x);
  auto pinch_roots = [&specials](const PAMap& m) {
    for (const Piece& p : m.pieces()) {
      if (!(p.lower && p.upper)) continue;
      const Scalar ga = p.upper->a - p.lower->a;
      if (ga.is_zero()) continue;
      const Scalar root = (p.lower->b - p.upper->b) / ga;
      if (p.dom.contains(root)) specials.push_back(root);
    }
  };
  pinch_roots(f);
  pinch_roots(g);
  std::vector<ExceptionalFiber> exs;
  for (const Scalar& x : dedup(std::move(specials)))
    exs.push_back({x, minkowski(f.fiber(x), g.fiber(x)), FiberMode::replace});
  return PAMap(std::move(pieces), std::move(exs));
}

// ---------------------------------------------------------------------------
// Handles

ExtScalar MapBase::dist_to_fiber(const Scalar& x, const Scalar& y) const {
  return fiber(x).distance(y);
}

ExtScalar MapBase::dist_to_preimage(const Scalar& x, const Scalar& y) const {
  return preimage_point(y).distance(x);
}

namespace {

class PamHandle final : public MapBase {
 public:
  PamHandle(PAMap pa, std::string name)
      : pa_(std::move(pa)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  RSet fiber(const Scalar& x) const override { return pa_.fiber(x); }
  RSet image(const Cell& input) const override { return pa_.image(input); }
  RSet preimage_point(const Scalar& y) const override {
    return pa_.preimage_point(y);
  }
  RSet preimage(const Cell& values) const override {
    return pa_.preimage(values);
  }
  std::vector<Scalar> structure_abscissae() const override {
    return pa_.structure_abscissae();
  }
  std::vector<Scalar> output_breakpoints() const override {
    return pa_.output_breakpoints();
  }
  std::vector<AffineForm> value_forms() const override {
    return pa_.value_forms();
  }
  const PAMap* as_pamap() const override { return &pa_; }
  std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell& xwin, const Cell& ywin) const override {
    return pa_.graph_closure_witness(xwin, ywin);
  }

 private:
  PAMap pa_;
  std::string name_;
};

class InverseView final : public MapBase {
 public:
  explicit InverseView(MapHandle base) : base_(std::move(base)) {}

  const MapHandle& base() const { return base_; }

  std::string name() const override { return "inv(" + base_->name() + ")"; }
  RSet fiber(const Scalar& x) const override {
    return base_->preimage_point(x);
  }
  RSet image(const Cell& input) const override {
    return base_->preimage(input);
  }
  RSet preimage_point(const Scalar& y) const override {
    return base_->fiber(y);
  }
  RSet preimage(const Cell& values) const override {
    return base_->image(values);
  }
  std::vector<Scalar> structure_abscissae() const override {
    return base_->output_breakpoints();
  }
  std::vector<Scalar> output_breakpoints() const override {
    return base_->structure_abscissae();
  }
  std::vector<AffineForm> value_forms() const override {
    std::vector<AffineForm> out;
    for (const AffineForm& f : base_->value_forms())
      if (!f.a.is_zero())
        out.push_back({Scalar(1) / f.a, -f.b / f.a});
    for (const Scalar& s : base_->structure_abscissae())
      out.push_back({Scalar(0), s});
    return out;
  }
  bool finitely_structured() const override {
    return base_->finitely_structured();
  }
  std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell& xwin, const Cell& ywin) const override {
    if (const auto w = base_->graph_closure_witness(ywin, xwin))
      return std::make_pair(w->second, w->first);
    return std::nullopt;
  }
  ExtScalar dist_to_fiber(const Scalar& x, const Scalar& y) const override {
    return base_->dist_to_preimage(y, x);
  }
  ExtScalar dist_to_preimage(const Scalar& x, const Scalar& y) const override {
    return base_->dist_to_fiber(y, x);
  }

 private:
  MapHandle base_;
};

class SumView final : public MapBase {
 public:
  SumView(MapHandle f, MapHandle g) : f_(std::move(f)), g_(std::move(g)) {}

  std::string name() const override {
    return "sum(" + f_->name() + "," + g_->name() + ")";
  }
  RSet fiber(const Scalar& x) const override {
    return minkowski(f_->fiber(x), g_->fiber(x));
  }
  RSet image(const Cell&) const override {
    throw UnsupportedOperation("image of a lazy sum");
  }
  RSet preimage_point(const Scalar&) const override {
    throw UnsupportedOperation("preimage of a lazy sum");
  }
  RSet preimage(const Cell&) const override {
    throw UnsupportedOperation("preimage of a lazy sum");
  }
  std::vector<Scalar> structure_abscissae() const override {
    std::vector<Scalar> out = f_->structure_abscissae();
    for (const Scalar& s : g_->structure_abscissae()) out.push_back(s);
    return dedup(std::move(out));
  }
  std::vector<Scalar> output_breakpoints() const override {
    const auto a = f_->output_breakpoints();
    const auto b = g_->output_breakpoints();
    std::vector<Scalar> out = a;
    out.insert(out.end(), b.begin(), b.end());
    for (const Scalar& x : a)
      for (const Scalar& y : b) out.push_back(x + y);
    return dedup(std::move(out));
  }
  std::vector<AffineForm> value_forms() const override {
    const auto a = f_->value_forms();
    const auto b = g_->value_forms();
    std::vector<AffineForm> out = a;
    out.insert(out.end(), b.begin(), b.end());
    for (const AffineForm& x : a)
      for (const AffineForm& y : b)
        out.push_back({x.a + y.a, x.b + y.b});
    return out;
  }
  bool finitely_structured() const override {
    return f_->finitely_structured() && g_->finitely_structured();
  }
  std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell&, const Cell&) const override {
    throw UnsupportedOperation("graph closedness of a lazy sum");
  }

 private:
  MapHandle f_, g_;
};

// The tail map: every fiber contains the rationals of (-inf, -1]; at the
// abscissae 1 - 1/n (n a positive integer) one extra irrational value
// -2 + sqrt(2)/n appears.  Its structure is not finite, so it implements the
// interface with bespoke exact evaluators.
class SeqTailMap final : public MapBase {
 public:
  static RSet generic() {
    return RSet::of_cell(Cell::dense(ExtScalar::neg_inf(), false,
                                     ExtScalar(Scalar(-1)), true, Scalar(0)));
  }
  static std::optional<BigInt> seq_index(const Scalar& x) {
    const Scalar t = Scalar(1) - x;
    if (!t.is_rational()) return std::nullopt;
    const Rational r = t.rat();
    if (r <= 0 || numerator(r) != 1) return std::nullopt;
    return BigInt(denominator(r));
  }
  static Scalar extra(const BigInt& n) {
    return Scalar(-2) + Scalar::sqrt2(Rational(BigInt(1), n));
  }
  static Scalar abscissa(const BigInt& n) {
    return Scalar(Rational(1)) - Scalar(Rational(BigInt(1), n));
  }

  std::string name() const override { return "rat_tail_seq"; }

  RSet fiber(const Scalar& x) const override {
    RSet out = generic();
    if (const auto n = seq_index(x)) out = out.unite(RSet::point(extra(*n)));
    return out;
  }

  RSet image(const Cell& input) const override {
    if (input.is_empty()) return RSet();
    RSet out = generic();
    const bool class_has_rationals =
        input.density == Density::solid || input.dense_offset.is_rational();
    const ExtScalar one(Scalar(1));
    // The extra abscissae 1 - 1/n are rationals below 1 accumulating at 1.
    if (!class_has_rationals || input.lo >= one) return out;
    if (input.hi >= one)
      throw Unrepresentable(
          "image over a window reaching the accumulation abscissa 1");
    BigInt nmin = 1;
    if (input.lo.is_finite()) {
      // smallest n with 1 - 1/n >= lo, up to one of floor/ceil slack
      nmin = floor_int(Scalar(1) / (Scalar(1) - input.lo.finite()));
      if (nmin < 1) nmin = 1;
    }
    const BigInt nmax =
        floor_int(Scalar(1) / (Scalar(1) - input.hi.finite())) + 1;
    if (nmax - nmin > 4096)
      throw UnsupportedOperation("image over too many sequence abscissae");
    std::vector<Scalar> pts;
    for (BigInt n = nmin > 1 ? nmin - 1 : BigInt(1); n <= nmax; ++n)
      if (input.contains(abscissa(n))) pts.push_back(extra(n));
    return out.unite(RSet::from({}, std::move(pts)));
  }

  RSet preimage_point(const Scalar& y) const override {
    if (y.is_rational() && y <= Scalar(-1)) return RSet::line();
    const Scalar shifted = y + Scalar(2);
    if (shifted.rat() == 0 && shifted.rad() > 0 &&
        numerator(shifted.rad()) == 1)
      return RSet::point(abscissa(BigInt(denominator(shifted.rad()))));
    return RSet();
  }

  RSet preimage(const Cell& values) const override {
    if (values.is_empty()) return RSet();
    if (values.density == Density::dense)
      throw UnsupportedOperation("preimage of a dense cell");
    if (values.lo == values.hi) return preimage_point(values.lo.finite());
    if (!intersect(generic(), values).is_empty()) return RSet::line();
    // Only the isolated extras can meet `values` now.  A nondegenerate solid
    // cell missing every rational of (-inf, -1] lies right of -1, so the
    // candidate range of n is tiny.
    const Scalar two(2);
    if (!values.lo.is_finite() || !(values.lo.finite() + two).sign())
      throw Unrepresentable("preimage over the accumulation value -2");
    const Scalar c2 = values.lo.finite() + two;
    if (c2.sign() < 0) return RSet();  // entirely below the extras' range
    const BigInt nmax = floor_int(Scalar::sqrt2() / c2) + 1;
    std::vector<Scalar> pts;
    for (BigInt n = 1; n <= nmax; ++n)
      if (values.contains(extra(n))) pts.push_back(abscissa(n));
    return RSet::from({}, std::move(pts));
  }

  std::vector<Scalar> structure_abscissae() const override {
    std::vector<Scalar> out{Scalar(1)};
    for (BigInt n = 1; n <= 8; ++n) out.push_back(abscissa(n));
    return dedup(std::move(out));
  }
  std::vector<Scalar> output_breakpoints() const override {
    std::vector<Scalar> out{Scalar(-1), Scalar(-2)};
    for (BigInt n = 1; n <= 8; ++n) out.push_back(extra(n));
    return dedup(std::move(out));
  }
  std::vector<AffineForm> value_forms() const override {
    return {{Scalar(0), Scalar(-1)}, {Scalar(0), Scalar(-2)}};
  }
  bool finitely_structured() const override { return false; }

  std::optional<std::pair<Scalar, Scalar>> graph_closure_witness(
      const Cell& xwin, const Cell& ywin) const override {
    if (xwin.density != Density::solid || ywin.density != Density::solid)
      throw DomainError("graph closedness requires solid windows");
    if (!xwin.lo.is_finite() || !xwin.hi.is_finite() || !xwin.lo_closed ||
        !xwin.hi_closed || !ywin.lo.is_finite() || !ywin.hi.is_finite() ||
        !ywin.lo_closed || !ywin.hi_closed)
      throw DomainError("graph closedness requires closed bounded windows");
    const ExtScalar top = min(ywin.hi, ExtScalar(Scalar(-1)));
    if (!(ywin.lo < top)) return std::nullopt;
    // The rational material is dense in the window strip below -1; any
    // irrational there that is not one of the extras escapes the graph.
    const Scalar m1 = Scalar(rational_between(ywin.lo, top));
    const Scalar m2 = Scalar(rational_between(ExtScalar(m1), top));
    const Scalar step = m2 - m1;
    for (int j = 2; j <= 6; ++j) {
      const Scalar y =
          m1 + step * Scalar::sqrt2(Rational(1, j));  // in (m1, m2)
      const bool is_extra = y.rat() == Rational(-2) && y.rad() > 0 &&
                            numerator(y.rad()) == 1;
      if (!y.is_rational() && !is_extra) {
        const Scalar x = xwin.lo == xwin.hi
                             ? xwin.lo.finite()
                             : Scalar(rational_between(xwin.lo, xwin.hi));
        return std::make_pair(x, y);
      }
    }
    throw DomainError("tail map closure witness: exhausted candidates");
  }

 private:
};

}  // namespace

MapHandle make_map(PAMap pa, std::string name) {
  return std::make_shared<PamHandle>(std::move(pa), std::move(name));
}

MapHandle invert(const MapHandle& f) {
  if (const auto iv = std::dynamic_pointer_cast<const InverseView>(f))
    return iv->base();
  if (const PAMap* pa = f->as_pamap())
    return make_map(pa->inverted(), "inv(" + f->name() + ")");
  return std::make_shared<InverseView>(f);
}

MapHandle negate_map(const MapHandle& f) {
  if (const PAMap* pa = f->as_pamap())
    return make_map(pa->negated(), "neg(" + f->name() + ")");
  throw UnsupportedOperation("negation of a non-piecewise map");
}

MapHandle sum_maps(const MapHandle& f, const MapHandle& g) {
  const PAMap* pf = f->as_pamap();
  const PAMap* pg = g->as_pamap();
  if (pf && pg)
    if (auto s = sum_pamaps(*pf, *pg))
      return make_map(std::move(*s), "sum(" + f->name() + "," + g->name() + ")");
  return std::make_shared<SumView>(f, g);
}

MapHandle diff_map(const MapHandle& f, const MapHandle& g) {
  return sum_maps(f, negate_map(invert(g)));
}

// ---------------------------------------------------------------------------
// Built-ins

PAMap make_identity_pamap() { return make_linear_pamap(Scalar(1)); }

PAMap make_linear_pamap(const Scalar& slope) {
  return make_affine_pamap(slope, Scalar(0));
}

PAMap make_affine_pamap(const Scalar& slope, const Scalar& offset) {
  Piece p;
  p.dom = Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf());
  p.lower = p.upper = AffineForm{slope, offset};
  return PAMap({p}, {});
}

PAMap make_band_pamap(const Scalar& lo, const Scalar& hi) {
  Piece p;
  p.dom = Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf());
  p.lower = AffineForm{Scalar(0), lo};
  p.upper = AffineForm{Scalar(0), hi};
  return PAMap({p}, {});
}

namespace {

PAMap make_abs_interval() {
  Piece neg;
  neg.dom = Cell::solid(ExtScalar::neg_inf(), false, ExtScalar(Scalar(0)), true);
  neg.lower = AffineForm{Scalar(0), Scalar(0)};
  neg.upper = AffineForm{Scalar(-1), Scalar(0)};
  Piece pos;
  pos.dom = Cell::solid(ExtScalar(Scalar(0)), true, ExtScalar::pos_inf(), false);
  pos.lower = AffineForm{Scalar(0), Scalar(0)};
  pos.upper = AffineForm{Scalar(1), Scalar(0)};
  return PAMap({neg, pos}, {});
}

PAMap make_jump_two() {
  PAMap band = make_band_pamap(Scalar(-1), Scalar(1));
  return PAMap(band.pieces(),
               {{Scalar(1), RSet::point(Scalar(2)), FiberMode::replace}});
}

PAMap make_unit_shelf() {
  PAMap band = make_band_pamap(Scalar(1), Scalar(2));
  return PAMap(band.pieces(),
               {{Scalar(1), RSet::point(Scalar(0)), FiberMode::add}});
}

PAMap make_rat_tail() {
  Piece p;
  p.dom = Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf());
  p.lower = AffineForm{Scalar(0), Scalar(1)};
  p.upper = std::nullopt;
  p.value_density = Density::dense;
  p.value_offset = Scalar(0);
  return PAMap({p}, {});
}

}  // namespace

MapHandle builtin(const std::string& name) {
  if (name == "identity") return make_map(make_identity_pamap(), name);
  if (name == "abs_interval") return make_map(make_abs_interval(), name);
  if (name == "jump_two") return make_map(make_jump_two(), name);
  if (name == "neg_jump_two") return make_map(make_jump_two().negated(), name);
  if (name == "rat_tail") return make_map(make_rat_tail(), name);
  if (name == "rat_tail_seq") return std::make_shared<SeqTailMap>();
  if (name == "unit_shelf") return make_map(make_unit_shelf(), name);
  if (name == "const_12")
    return make_map(make_band_pamap(Scalar(1), Scalar(2)), name);
  throw DomainError("unknown builtin map: " + name);
}

std::vector<std::string> builtin_names() {
  return {"abs_interval", "const_12",     "identity",     "jump_two",
          "neg_jump_two", "rat_tail",     "rat_tail_seq", "unit_shelf"};
}

// ---------------------------------------------------------------------------
// Parametric maps

ParamMap::ParamMap(std::vector<ParamPiece> pieces) : pieces_(std::move(pieces)) {
  for (const ParamPiece& p : pieces_)
    if (p.xdom.density == Density::dense || p.pdom.density == Density::dense)
      throw DomainError("parametric pieces require solid windows");
}

RSet ParamMap::fiber(const Scalar& x, const Scalar& p) const {
  RSet out;
  for (const ParamPiece& q : pieces_) {
    if (!q.xdom.contains(x) || !q.pdom.contains(p)) continue;
    const ExtScalar lo =
        q.lower ? ExtScalar(q.lower->eval(x, p)) : ExtScalar::neg_inf();
    const ExtScalar hi =
        q.upper ? ExtScalar(q.upper->eval(x, p)) : ExtScalar::pos_inf();
    const Cell c = Cell::solid(lo, q.lower && q.lo_closed, hi,
                               q.upper && q.hi_closed);
    if (!c.is_empty()) out = out.unite(RSet::of_cell(c));
  }
  return out;
}

PAMap ParamMap::freeze_p(const Scalar& p) const {
  std::vector<Piece> ps;
  for (const ParamPiece& q : pieces_) {
    if (!q.pdom.contains(p)) continue;
    Piece n;
    n.dom = q.xdom;
    if (q.lower) n.lower = AffineForm{q.lower->ax, q.lower->ap * p + q.lower->b};
    if (q.upper) n.upper = AffineForm{q.upper->ax, q.upper->ap * p + q.upper->b};
    n.lo_closed = q.lo_closed;
    n.hi_closed = q.hi_closed;
    ps.push_back(n);
  }
  return PAMap(std::move(ps), {});
}

PAMap ParamMap::freeze_x(const Scalar& x) const {
  std::vector<Piece> ps;
  for (const ParamPiece& q : pieces_) {
    if (!q.xdom.contains(x)) continue;
    Piece n;
    n.dom = q.pdom;
    if (q.lower) n.lower = AffineForm{q.lower->ap, q.lower->ax * x + q.lower->b};
    if (q.upper) n.upper = AffineForm{q.upper->ap, q.upper->ax * x + q.upper->b};
    n.lo_closed = q.lo_closed;
    n.hi_closed = q.hi_closed;
    ps.push_back(n);
  }
  return PAMap(std::move(ps), {});
}

std::vector<Scalar> ParamMap::x_structure() const {
  std::vector<Scalar> out;
  for (const ParamPiece& q : pieces_) {
    if (q.xdom.lo.is_finite()) out.push_back(q.xdom.lo.finite());
    if (q.xdom.hi.is_finite()) out.push_back(q.xdom.hi.finite());
  }
  return dedup(std::move(out));
}

std::vector<Scalar> ParamMap::p_structure() const {
  std::vector<Scalar> out;
  for (const ParamPiece& q : pieces_) {
    if (q.pdom.lo.is_finite()) out.push_back(q.pdom.lo.finite());
    if (q.pdom.hi.is_finite()) out.push_back(q.pdom.hi.finite());
  }
  return dedup(std::move(out));
}

std::optional<Scalar> ParamMap::uniform_p_slope() const {
  std::optional<Scalar> slope;
  for (const ParamPiece& q : pieces_) {
    if (q.pdom.lo.is_finite() || q.pdom.hi.is_finite()) return std::nullopt;
    for (const std::optional<AffineForm2>& f : {q.lower, q.upper}) {
      if (!f) continue;
      if (!slope)
        slope = f->ap;
      else if (*slope != f->ap)
        return std::nullopt;
    }
  }
  if (!slope) slope = Scalar(0);
  return slope;
}

std::optional<Scalar> ParamMap::uniform_x_slope() const {
  std::optional<Scalar> slope;
  for (const ParamPiece& q : pieces_) {
    if (q.xdom.lo.is_finite() || q.xdom.hi.is_finite()) return std::nullopt;
    for (const std::optional<AffineForm2>& f : {q.lower, q.upper}) {
      if (!f) continue;
      if (!slope)
        slope = f->ax;
      else if (*slope != f->ax)
        return std::nullopt;
    }
  }
  if (!slope) slope = Scalar(0);
  return slope;
}

std::optional<ParamMap> sum_param_pamap(const ParamMap& h, const PAMap& g) {
  if (!g.exceptional().empty()) return std::nullopt;
  std::vector<ParamPiece> out;
  for (const ParamPiece& a : h.pieces()) {
    // A pinched parametric piece (empty fibers on part of its window) has no
    // product-cell representation of the live region; require nonnegativity.
    if (a.lower && a.upper) {
      const AffineForm2 w{a.upper->ax - a.lower->ax, a.upper->ap - a.lower->ap,
                          a.upper->b - a.lower->b};
      auto worst = [&](const Cell& dom, const Scalar& coeff) -> bool {
        // false when the piece can reach negative width along this axis
        if (coeff.sign() > 0 && !dom.lo.is_finite()) return false;
        if (coeff.sign() < 0 && !dom.hi.is_finite()) return false;
        return true;
      };
      if (!worst(a.xdom, w.ax) || !worst(a.pdom, w.ap)) return std::nullopt;
      ExtScalar m(w.b);
      auto corner = [&](const Cell& dom, const Scalar& coeff) {
        if (coeff.is_zero()) return ExtScalar(Scalar(0));
        const ExtScalar end = coeff.sign() > 0 ? dom.lo : dom.hi;
        return ExtScalar(coeff * end.finite());
      };
      m = m + corner(a.xdom, w.ax) + corner(a.pdom, w.ap);
      if (m < ExtScalar(Scalar(0))) return std::nullopt;
    }
    for (const Piece& b : g.pieces()) {
      if (b.value_density == Density::dense ||
          b.dom.density == Density::dense)
        return std::nullopt;
      const Cell xd = meet_solid(a.xdom, b.dom);
      if (xd.is_empty()) continue;
      ParamPiece n = a;
      n.lower = (a.lower && b.lower)
                    ? std::optional<AffineForm2>(AffineForm2{
                          a.lower->ax + b.lower->a, a.lower->ap,
                          a.lower->b + b.lower->b})
                    : std::nullopt;
      n.upper = (a.upper && b.upper)
                    ? std::optional<AffineForm2>(AffineForm2{
                          a.upper->ax + b.upper->a, a.upper->ap,
                          a.upper->b + b.upper->b})
                    : std::nullopt;
      n.lo_closed = a.lo_closed && b.lo_closed;
      n.hi_closed = a.hi_closed && b.hi_closed;
      const RSet live = nonempty_part(b, xd);
      for (const Cell& d : live.cells()) {
        if (d.density == Density::dense) return std::nullopt;
        n.xdom = d;
        out.push_back(n);
      }
      for (const Scalar& q : live.points()) {
        n.xdom = Cell::solid(ExtScalar(q), true, ExtScalar(q), true);
        out.push_back(n);
      }
    }
  }
  return ParamMap(std::move(out));
}

PAMap implicit_map(const ParamMap& h) {
  std::vector<Piece> out;
  for (const ParamPiece& q : h.pieces()) {
    Cell pwin = q.pdom;
    bool dead = false;
    auto clip = [&](const std::optional<Cell>& half) {
      if (!half)
        dead = true;
      else
        pwin = meet_solid(pwin, *half);
    };
    std::vector<BoundCand> lowers, uppers;
    if (q.lower) {
      if (q.lower->ax.is_zero()) {
        clip(halfline_le(q.lower->ap, q.lower->b, Scalar(0), q.lo_closed));
      } else {
        const AffineForm f{-q.lower->ap / q.lower->ax,
                           -q.lower->b / q.lower->ax};
        if (q.lower->ax.sign() > 0)
          uppers.push_back({f, q.lo_closed});
        else
          lowers.push_back({f, q.lo_closed});
      }
    }
    if (q.upper) {
      if (q.upper->ax.is_zero()) {
        clip(halfline_ge(q.upper->ap, q.upper->b, Scalar(0), q.hi_closed));
      } else {
        const AffineForm f{-q.upper->ap / q.upper->ax,
                           -q.upper->b / q.upper->ax};
        if (q.upper->ax.sign() > 0)
          lowers.push_back({f, q.hi_closed});
        else
          uppers.push_back({f, q.hi_closed});
      }
    }
    if (dead || pwin.is_empty()) continue;
    if (q.xdom.lo.is_finite())
      lowers.push_back(
          {AffineForm{Scalar(0), q.xdom.lo.finite()}, q.xdom.lo_closed});
    if (q.xdom.hi.is_finite())
      uppers.push_back(
          {AffineForm{Scalar(0), q.xdom.hi.finite()}, q.xdom.hi_closed});
    emit_extremal_pieces(pwin, lowers, uppers, Density::solid, Scalar(0), out);
  }
  return PAMap(std::move(out), {});
}

Gamma2::Gamma2(ParamMap f, PAMap g) : f_(std::move(f)), g_(std::move(g)) {}

RSet Gamma2::fiber(const Scalar& y, const Scalar& w) const {
  const auto gv = g_.single_value(w);
  if (!gv)
    throw DomainError("gamma map requires a single-valued g at w = " +
                      w.format());
  RSet out;
  for (const ParamPiece& q : f_.pieces()) {
    if (!q.pdom.contains(y)) continue;
    RSet r = RSet::of_cell(q.xdom);
    bool dead = false;
    if (q.lower) {
      const auto half = halfline_le(q.lower->ax, q.lower->ap * y + q.lower->b + *gv,
                                    Scalar(0), q.lo_closed);
      if (!half)
        dead = true;
      else
        r = intersect(r, *half);
    }
    if (!dead && q.upper) {
      const auto half = halfline_ge(q.upper->ax, q.upper->ap * y + q.upper->b + *gv,
                                    Scalar(0), q.hi_closed);
      if (!half)
        dead = true;
      else
        r = intersect(r, *half);
    }
    if (!dead) out = out.unite(r);
  }
  return out;
}

}  // namespace regmod
