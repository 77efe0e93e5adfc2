// Multifunction layer: exact fibers, images, preimages, inverses, sums,
// difference maps, solution maps of parametric inclusions, and local graph
// closedness.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "regmod/map.hpp"

using namespace regmod;

namespace {

Scalar frac(long long p, long long q = 1) { return Scalar(Rational(p, q)); }

Scalar sq2(long long p, long long q = 1) {
  return Scalar(Rational(0), Rational(p, q));
}

Cell line_cell() {
  return Cell::open(ExtScalar::neg_inf(), ExtScalar::pos_inf());
}

Cell ball(const Scalar& center, const Scalar& radius) {
  return Cell::solid(ExtScalar(center - radius), false,
                     ExtScalar(center + radius), false);
}

RSet seg(const Scalar& lo, const Scalar& hi) {
  return RSet::of_cell(Cell::closed(lo, hi));
}

RSet rationals_from(const Scalar& lo) {
  return RSet::of_cell(
      Cell::dense(ExtScalar(lo), true, ExtScalar::pos_inf(), false, Scalar(0)));
}

RSet rationals_until(const Scalar& hi) {
  return RSet::of_cell(
      Cell::dense(ExtScalar::neg_inf(), false, ExtScalar(hi), true, Scalar(0)));
}

ParamPiece band_param(const Scalar& ax, const Scalar& ap, const Scalar& blo,
                      const Scalar& bhi) {
  ParamPiece q;
  q.xdom = line_cell();
  q.pdom = line_cell();
  q.lower = AffineForm2{ax, ap, blo};
  q.upper = AffineForm2{ax, ap, bhi};
  return q;
}

}  // namespace

TEST_CASE("builtin fibers match their definitions") {
  const MapHandle abs = builtin("abs_interval");
  CHECK(abs->fiber(Scalar(-2)) == seg(Scalar(0), Scalar(2)));
  CHECK(abs->fiber(Scalar(3)) == seg(Scalar(0), Scalar(3)));
  CHECK(abs->fiber(Scalar(0)) == RSet::point(Scalar(0)));
  CHECK(abs->fiber(sq2(1)) == seg(Scalar(0), sq2(1)));

  const MapHandle jump = builtin("jump_two");
  CHECK(jump->fiber(Scalar(1)) == RSet::point(Scalar(2)));
  CHECK(jump->fiber(Scalar(0)) == seg(Scalar(-1), Scalar(1)));
  CHECK(jump->fiber(frac(99, 100)) == seg(Scalar(-1), Scalar(1)));

  const MapHandle neg = builtin("neg_jump_two");
  CHECK(neg->fiber(Scalar(1)) == RSet::point(Scalar(-2)));
  CHECK(neg->fiber(Scalar(0)) == seg(Scalar(-1), Scalar(1)));

  const MapHandle shelf = builtin("unit_shelf");
  CHECK(shelf->fiber(Scalar(1)) ==
        seg(Scalar(1), Scalar(2)).unite(RSet::point(Scalar(0))));
  CHECK(shelf->fiber(Scalar(5)) == seg(Scalar(1), Scalar(2)));

  const MapHandle tail = builtin("rat_tail");
  CHECK(tail->fiber(Scalar(17)) == rationals_from(Scalar(1)));
  CHECK(tail->fiber(sq2(1)) == rationals_from(Scalar(1)));

  const MapHandle id = builtin("identity");
  CHECK(id->fiber(sq2(3, 2)) == RSet::point(sq2(3, 2)));

  CHECK(builtin("const_12")->fiber(Scalar(-7)) == seg(Scalar(1), Scalar(2)));

  CHECK_THROWS_AS((void)builtin("no_such_map"), DomainError);
  const auto names = builtin_names();
  CHECK(names.size() == 8);
  CHECK(std::is_sorted(names.begin(), names.end()));
  for (const auto& n : names) CHECK(builtin(n)->name() == n);
}

TEST_CASE("sequence-tail map: fibers, preimages, images") {
  const MapHandle seq = builtin("rat_tail_seq");
  CHECK_FALSE(seq->finitely_structured());

  // fiber at 1 - 1/3
  const RSet f23 = seq->fiber(frac(2, 3));
  CHECK(f23 == rationals_until(Scalar(-1))
                   .unite(RSet::point(Scalar(-2) + sq2(1, 3))));
  // generic abscissae carry only the rational tail
  CHECK(seq->fiber(sq2(1)) == rationals_until(Scalar(-1)));
  CHECK(seq->fiber(Scalar(1)) == rationals_until(Scalar(-1)));
  CHECK(seq->fiber(frac(2, 5)) == rationals_until(Scalar(-1)));
  // n = 1 at x = 0
  CHECK(seq->fiber(Scalar(0)).contains(Scalar(-2) + sq2(1)));

  // preimages of single values
  CHECK(seq->preimage_point(frac(-3, 2)) == RSet::line());
  CHECK(seq->preimage_point(Scalar(-2) + sq2(1)) == RSet::point(Scalar(0)));
  CHECK(seq->preimage_point(Scalar(-2) + sq2(1, 5)) ==
        RSet::point(frac(4, 5)));
  CHECK(seq->preimage_point(frac(-3, 2) + sq2(1, 100)).is_empty());
  CHECK(seq->preimage_point(Scalar(-2) + sq2(2, 3)).is_empty());

  // images
  CHECK(seq->image(Cell::closed(Scalar(2), Scalar(3))) ==
        rationals_until(Scalar(-1)));
  RSet expect = rationals_until(Scalar(-1));
  for (int n = 1; n <= 5; ++n)
    expect = expect.unite(RSet::point(Scalar(-2) + sq2(1, n)));
  CHECK(seq->image(Cell::closed(Scalar(0), frac(4, 5))) == expect);
  CHECK_THROWS_AS((void)seq->image(Cell::closed(frac(7, 8), frac(9, 8))),
                  Unrepresentable);

  // preimage of a window pinching the n = 1 extra value
  CHECK(seq->preimage(Cell::closed(frac(-3, 5), frac(-11, 20))) ==
        RSet::point(Scalar(0)));
  CHECK(seq->preimage(Cell::closed(Scalar(-4), Scalar(0))) == RSet::line());

  // inversion is a view; inverting twice unwraps to the original handle
  const MapHandle inv = invert(seq);
  CHECK(inv->fiber(frac(-3, 2)) == RSet::line());
  CHECK(inv->fiber(Scalar(-2) + sq2(1, 4)) == RSet::point(frac(3, 4)));
  CHECK(invert(inv).get() == seq.get());
  CHECK_FALSE(inv->finitely_structured());
}

TEST_CASE("images of cells are exact including endpoint attainment") {
  const MapHandle twice = make_map(make_linear_pamap(Scalar(2)), "twice");
  CHECK(twice->image(ball(Scalar(0), frac(3, 4))) ==
        RSet::of_cell(Cell::open(frac(-3, 2), frac(3, 2))));
  CHECK(twice->image(Cell::closed(Scalar(1), Scalar(2))) ==
        seg(Scalar(2), Scalar(4)));

  const MapHandle abs = builtin("abs_interval");
  CHECK(abs->image(ball(Scalar(1), frac(1, 2))) ==
        RSet::of_cell(Cell::solid(ExtScalar(Scalar(0)), true,
                                  ExtScalar(frac(3, 2)), false)));
  CHECK(abs->image(ball(Scalar(0), frac(1, 2))) ==
        RSet::of_cell(Cell::solid(ExtScalar(Scalar(0)), true,
                                  ExtScalar(frac(1, 2)), false)));

  const MapHandle jump = builtin("jump_two");
  CHECK(jump->image(ball(Scalar(1), frac(1, 4))) ==
        seg(Scalar(-1), Scalar(1)).unite(RSet::point(Scalar(2))));

  // image of a degenerate cell is the fiber
  CHECK(jump->image(Cell::closed(Scalar(1), Scalar(1))) ==
        RSet::point(Scalar(2)));

  // image of a rational-class window under an affine map keeps the class
  const MapHandle tail = builtin("rat_tail");
  CHECK(tail->image(ball(Scalar(0), Scalar(1))) == rationals_from(Scalar(1)));
}

TEST_CASE("inverses of piecewise maps are eager and exact") {
  const MapHandle twice = make_map(make_linear_pamap(Scalar(2)), "twice");
  const MapHandle itw = invert(twice);
  REQUIRE(itw->as_pamap() != nullptr);
  CHECK(itw->fiber(Scalar(3)) == RSet::point(frac(3, 2)));
  CHECK(itw->fiber(sq2(1)) == RSet::point(sq2(1, 2)));

  const MapHandle iabs = invert(builtin("abs_interval"));
  REQUIRE(iabs->as_pamap() != nullptr);
  CHECK(iabs->fiber(frac(3, 2)) ==
        RSet::from({Cell::solid(ExtScalar::neg_inf(), false,
                                ExtScalar(frac(-3, 2)), true),
                    Cell::solid(ExtScalar(frac(3, 2)), true,
                                ExtScalar::pos_inf(), false)},
                   {}));
  CHECK(iabs->fiber(Scalar(0)) == RSet::line());
  CHECK(iabs->fiber(Scalar(-1)).is_empty());

  // replace-mode exceptional fibers puncture the inverse correctly
  const MapHandle ijump = invert(builtin("jump_two"));
  REQUIRE(ijump->as_pamap() != nullptr);
  CHECK(ijump->fiber(frac(1, 2)) ==
        RSet::from({Cell::solid(ExtScalar::neg_inf(), false,
                                ExtScalar(Scalar(1)), false),
                    Cell::solid(ExtScalar(Scalar(1)), false,
                                ExtScalar::pos_inf(), false)},
                   {}));
  CHECK(ijump->fiber(Scalar(2)) == RSet::point(Scalar(1)));
  CHECK(ijump->fiber(Scalar(3)).is_empty());

  // add-mode exceptional fibers only extend the inverse
  const MapHandle ishelf = invert(builtin("unit_shelf"));
  CHECK(ishelf->fiber(Scalar(0)) == RSet::point(Scalar(1)));
  CHECK(ishelf->fiber(frac(3, 2)) == RSet::line());

  // dense-valued maps invert to dense-domain maps
  const MapHandle itail = invert(builtin("rat_tail"));
  REQUIRE(itail->as_pamap() != nullptr);
  CHECK(itail->fiber(frac(7, 3)) == RSet::line());
  CHECK(itail->fiber(sq2(3)).is_empty());
  CHECK(itail->fiber(frac(1, 2)).is_empty());
}

TEST_CASE("pointwise sums and the difference map") {
  const MapHandle abs = builtin("abs_interval");
  const MapHandle two_abs = sum_maps(abs, abs);
  REQUIRE(two_abs->as_pamap() != nullptr);
  CHECK(two_abs->fiber(Scalar(-2)) == seg(Scalar(0), Scalar(4)));
  CHECK(two_abs->fiber(Scalar(3)) == seg(Scalar(0), Scalar(6)));
  CHECK(two_abs->fiber(Scalar(0)) == RSet::point(Scalar(0)));

  const MapHandle shelf_sum =
      sum_maps(builtin("unit_shelf"), builtin("const_12"));
  CHECK(shelf_sum->fiber(Scalar(1)) == seg(Scalar(1), Scalar(4)));
  CHECK(shelf_sum->fiber(Scalar(0)) == seg(Scalar(2), Scalar(4)));

  const MapHandle jump_sum =
      sum_maps(builtin("jump_two"), builtin("neg_jump_two"));
  CHECK(jump_sum->fiber(Scalar(1)) == RSet::point(Scalar(0)));
  CHECK(jump_sum->fiber(Scalar(0)) == seg(Scalar(-2), Scalar(2)));

  // difference map (F - G^{-1}) with F = 2x and G = identity is the identity
  const MapHandle twice = make_map(make_linear_pamap(Scalar(2)), "twice");
  const MapHandle diff = diff_map(twice, builtin("identity"));
  REQUIRE(diff->as_pamap() != nullptr);
  CHECK(diff->fiber(frac(5, 3)) == RSet::point(frac(5, 3)));
  CHECK(diff->fiber(sq2(1)) == RSet::point(sq2(1)));
  CHECK(diff->image(ball(Scalar(0), Scalar(1))) ==
        RSet::of_cell(ball(Scalar(0), Scalar(1))));

  // dense + rational constant stays eager and keeps the class
  const MapHandle shifted =
      sum_maps(builtin("rat_tail"),
               make_map(make_affine_pamap(Scalar(0), frac(1, 2)), "half"));
  REQUIRE(shifted->as_pamap() != nullptr);
  CHECK(shifted->fiber(Scalar(7)) == rationals_from(frac(3, 2)));

  // dense + sloped single-valued map has no eager representation
  const MapHandle skew = sum_maps(builtin("rat_tail"), builtin("identity"));
  CHECK(skew->as_pamap() == nullptr);
  CHECK(skew->fiber(sq2(1)).contains(Scalar(1) + sq2(1)));
  CHECK_FALSE(skew->fiber(sq2(1)).contains(Scalar(2)));
  CHECK_THROWS_AS((void)skew->image(Cell::closed(Scalar(0), Scalar(1))),
                  UnsupportedOperation);

  // lazy sum with the bespoke tail map still evaluates fibers exactly
  const MapHandle mixed =
      sum_maps(builtin("rat_tail"), builtin("rat_tail_seq"));
  CHECK(mixed->as_pamap() == nullptr);
  CHECK(mixed->fiber(frac(1, 2)).contains(Scalar(0)));
  CHECK(mixed->fiber(frac(1, 2)).contains(Scalar(1) - Scalar(2) + sq2(1, 2)));
}

TEST_CASE("domains, single values and affine recognition") {
  const MapHandle abs = builtin("abs_interval");
  CHECK(abs->as_pamap()->domain() == RSet::line());
  CHECK(abs->as_pamap()->single_value(Scalar(0)) == Scalar(0));
  CHECK_FALSE(abs->as_pamap()->single_value(Scalar(2)).has_value());
  CHECK_FALSE(abs->as_pamap()->as_affine().has_value());

  const auto aff = make_affine_pamap(Scalar(2), frac(-1, 3)).as_affine();
  REQUIRE(aff.has_value());
  CHECK(aff->a == Scalar(2));
  CHECK(aff->b == frac(-1, 3));

  // wedge with empty fibers right of zero
  Piece w;
  w.dom = line_cell();
  w.lower = AffineForm{Scalar(1), Scalar(0)};
  w.upper = AffineForm{Scalar(-1), Scalar(0)};
  CHECK(PAMap({w}, {}).domain() ==
        RSet::of_cell(
            Cell::solid(ExtScalar::neg_inf(), false, ExtScalar(Scalar(0)), true)));
  Piece wo = w;
  wo.lo_closed = wo.hi_closed = false;
  CHECK(PAMap({wo}, {}).domain() ==
        RSet::of_cell(Cell::solid(ExtScalar::neg_inf(), false,
                                  ExtScalar(Scalar(0)), false)));
}

TEST_CASE("preimages of solid windows") {
  const MapHandle abs = builtin("abs_interval");
  CHECK(abs->preimage(Cell::closed(frac(1, 2), Scalar(1))) ==
        RSet::from({Cell::solid(ExtScalar::neg_inf(), false,
                                ExtScalar(frac(-1, 2)), true),
                    Cell::solid(ExtScalar(frac(1, 2)), true,
                                ExtScalar::pos_inf(), false)},
                   {}));
  CHECK(builtin("jump_two")->preimage(Cell::closed(frac(3, 2), Scalar(3))) ==
        RSet::point(Scalar(1)));
  CHECK(builtin("rat_tail")->preimage(Cell::open(sq2(1), sq2(2))) ==
        RSet::line());
}

TEST_CASE("local graph closedness with exact witnesses") {
  const Cell xw = Cell::closed(frac(1, 2), frac(3, 2));
  const Cell yw = Cell::closed(Scalar(-3), Scalar(3));

  const auto jump_w = builtin("jump_two")->graph_closure_witness(xw, yw);
  REQUIRE(jump_w.has_value());
  CHECK(jump_w->first == Scalar(1));
  CHECK_FALSE(builtin("jump_two")->fiber(jump_w->first).contains(jump_w->second));
  CHECK(xw.contains(jump_w->first));
  CHECK(yw.contains(jump_w->second));

  CHECK_FALSE(builtin("unit_shelf")
                  ->graph_closure_witness(Cell::closed(Scalar(0), Scalar(2)),
                                          Cell::closed(Scalar(-1), Scalar(3)))
                  .has_value());
  CHECK_FALSE(builtin("abs_interval")
                  ->graph_closure_witness(Cell::closed(Scalar(-1), Scalar(1)),
                                          Cell::closed(Scalar(-1), Scalar(1)))
                  .has_value());

  // dense values never close up
  const auto tail_w = builtin("rat_tail")->graph_closure_witness(
      Cell::closed(Scalar(0), Scalar(1)), Cell::closed(Scalar(1), Scalar(2)));
  REQUIRE(tail_w.has_value());
  CHECK_FALSE(builtin("rat_tail")->fiber(tail_w->first).contains(tail_w->second));

  // the sequence-tail map: open below -1, closed away from it
  const MapHandle seq = builtin("rat_tail_seq");
  const auto seq_w = seq->graph_closure_witness(
      xw, Cell::closed(frac(-3, 2), frac(-1, 2)));
  REQUIRE(seq_w.has_value());
  CHECK_FALSE(seq->fiber(seq_w->first).contains(seq_w->second));
  CHECK_FALSE(seq->graph_closure_witness(Cell::closed(frac(-1, 4), frac(1, 4)),
                                         Cell::closed(frac(-1, 2), frac(1, 2)))
                  .has_value());

  // a single-valued graph with open flags is empty, hence closed
  Piece ghost;
  ghost.dom = line_cell();
  ghost.lower = ghost.upper = AffineForm{Scalar(1), Scalar(0)};
  ghost.lo_closed = ghost.hi_closed = false;
  CHECK_FALSE(PAMap({ghost}, {})
                  .graph_closure_witness(Cell::closed(Scalar(-1), Scalar(1)),
                                         Cell::closed(Scalar(-1), Scalar(1)))
                  .has_value());

  // a closed wedge pinching to a point is closed: the empty side of the
  // pinch must not manufacture closure material
  Piece wedge;
  wedge.dom = line_cell();
  wedge.lower = AffineForm{Scalar(1), Scalar(0)};
  wedge.upper = AffineForm{Scalar(-1), Scalar(0)};
  CHECK_FALSE(PAMap({wedge}, {})
                  .graph_closure_witness(Cell::closed(Scalar(-1), Scalar(1)),
                                         Cell::closed(Scalar(-1), Scalar(1)))
                  .has_value());

  // the same wedge with open bounds loses its boundary
  Piece owedge = wedge;
  owedge.lo_closed = owedge.hi_closed = false;
  const PAMap open_wedge({owedge}, {});
  const auto wedge_w = open_wedge.graph_closure_witness(
      Cell::closed(Scalar(-1), Scalar(1)), Cell::closed(Scalar(-1), Scalar(1)));
  REQUIRE(wedge_w.has_value());
  CHECK_FALSE(open_wedge.fiber(wedge_w->first).contains(wedge_w->second));
}

TEST_CASE("parametric maps: fibers, sections, uniform slopes") {
  // H(x,p) = x + p + [-1, 1]
  const ParamMap H({band_param(Scalar(1), Scalar(1), Scalar(-1), Scalar(1))});
  CHECK(H.fiber(Scalar(1), Scalar(2)) == seg(Scalar(2), Scalar(4)));
  CHECK(H.freeze_p(Scalar(2)).fiber(Scalar(1)) == seg(Scalar(2), Scalar(4)));
  CHECK(H.freeze_x(Scalar(1)).fiber(Scalar(2)) == seg(Scalar(2), Scalar(4)));
  CHECK(H.uniform_p_slope() == Scalar(1));
  CHECK(H.uniform_x_slope() == Scalar(1));

  // adding G = -2x pointwise
  const auto HG = sum_param_pamap(H, make_linear_pamap(Scalar(-2)));
  REQUIRE(HG.has_value());
  CHECK(HG->fiber(Scalar(1), Scalar(1)) == seg(Scalar(-1), Scalar(1)));
  CHECK(HG->fiber(Scalar(0), Scalar(0)) == seg(Scalar(-1), Scalar(1)));
  CHECK(HG->uniform_x_slope() == Scalar(-1));

  // no eager sum across exceptional fibers
  CHECK_FALSE(
      sum_param_pamap(H, *builtin("jump_two")->as_pamap()).has_value());
}

TEST_CASE("solution maps of parametric inclusions") {
  // H(x,p) = x - p: S(p) = {p}
  const ParamMap Heq({band_param(Scalar(1), Scalar(-1), Scalar(0), Scalar(0))});
  const PAMap Seq = implicit_map(Heq);
  CHECK(Seq.fiber(Scalar(2)) == RSet::point(Scalar(2)));
  CHECK(Seq.fiber(sq2(1)) == RSet::point(sq2(1)));

  // H(x,p) = -x + p + [-1, 1]: S(p) = [p-1, p+1]
  const ParamMap Hband(
      {band_param(Scalar(-1), Scalar(1), Scalar(-1), Scalar(1))});
  const PAMap Sband = implicit_map(Hband);
  CHECK(Sband.fiber(Scalar(0)) == seg(Scalar(-1), Scalar(1)));
  CHECK(Sband.fiber(frac(5, 2)) == seg(frac(3, 2), frac(7, 2)));
  CHECK(Sband.image(ball(Scalar(0), Scalar(1))) ==
        RSet::of_cell(Cell::open(Scalar(-2), Scalar(2))));

  // H(x,p) = -(3/2)x + p + [0, 1]: S(p) = [(2/3)p, (2/3)p + 2/3]
  const ParamMap Hslope(
      {band_param(frac(-3, 2), Scalar(1), Scalar(0), Scalar(1))});
  const PAMap Sslope = implicit_map(Hslope);
  CHECK(Sslope.fiber(Scalar(1)) == seg(frac(2, 3), frac(4, 3)));
  CHECK(Sslope.fiber(Scalar(0)) == seg(Scalar(0), frac(2, 3)));

  // H(x,p) = p + [0, 1] ignores x: S(p) is all or nothing
  const ParamMap Hflat({band_param(Scalar(0), Scalar(1), Scalar(0), Scalar(1))});
  const PAMap Sflat = implicit_map(Hflat);
  CHECK(Sflat.fiber(frac(-1, 2)) == RSet::line());
  CHECK(Sflat.fiber(Scalar(1)).is_empty());
  CHECK(Sflat.fiber(Scalar(-2)).is_empty());

  // solution membership invariant: x in S(p)  <=>  0 in H(x,p)
  const std::vector<Scalar> probes = {Scalar(-2), Scalar(-1), frac(-1, 2),
                                      Scalar(0),  frac(1, 3), Scalar(1),
                                      frac(5, 2), sq2(1),     sq2(-1, 2)};
  for (const ParamMap* h : {&Heq, &Hband, &Hslope, &Hflat}) {
    const PAMap s = implicit_map(*h);
    for (const Scalar& p : probes)
      for (const Scalar& x : probes)
        CHECK(s.fiber(p).contains(x) == h->fiber(x, p).contains(Scalar(0)));
  }
}

TEST_CASE("gamma maps: perturbed solution fibers") {
  // F(x,y) = x + y + [-1,1], g(w) = 2w
  const ParamMap F({band_param(Scalar(1), Scalar(1), Scalar(-1), Scalar(1))});
  const Gamma2 gamma(F, make_linear_pamap(Scalar(2)));
  CHECK(gamma.fiber(Scalar(1), Scalar(1)) == seg(Scalar(-4), Scalar(-2)));
  CHECK(gamma.fiber(Scalar(0), Scalar(0)) == seg(Scalar(-1), Scalar(1)));
  CHECK(gamma.fiber(sq2(1), Scalar(0)) ==
        seg(-sq2(1) - Scalar(1), -sq2(1) + Scalar(1)));

  // with g identically zero the gamma map is the solution map in p = y
  const Gamma2 plain(F, make_affine_pamap(Scalar(0), Scalar(0)));
  const PAMap S = implicit_map(F);
  for (const Scalar& y : {Scalar(-1), Scalar(0), frac(3, 2), sq2(1)})
    CHECK(plain.fiber(y, Scalar(5)) == S.fiber(y));

  // single-valued equation: F = x - y, g = -w gives {y + w}
  const ParamMap Feq({band_param(Scalar(1), Scalar(-1), Scalar(0), Scalar(0))});
  const Gamma2 geq(Feq, make_linear_pamap(Scalar(-1)));
  CHECK(geq.fiber(Scalar(2), Scalar(3)) == RSet::point(Scalar(5)));
  CHECK(geq.fiber(sq2(1), Scalar(1)) == RSet::point(sq2(1) + Scalar(1)));

  // non-single-valued g is rejected
  const Gamma2 bad(F, make_band_pamap(Scalar(1), Scalar(2)));
  CHECK_THROWS_AS((void)bad.fiber(Scalar(0), Scalar(0)), DomainError);
}

// ---------------------------------------------------------------------------
// Property sweep: fibers, inverses, images, preimages and sums of random
// piecewise-affine maps certify one another through membership identities.

namespace {

PAMap random_pamap(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> small(-2, 2);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> pick(0, 5);
  auto rscalar = [&]() { return Scalar(Rational(small(rng), 1 + coin(rng))); };
  auto rform = [&]() { return AffineForm{Scalar(small(rng)), rscalar()}; };
  std::vector<Piece> pieces;
  const int np = 1 + pick(rng) % 3;
  for (int i = 0; i < np; ++i) {
    Piece p;
    const int a = small(rng), b = small(rng);
    const ExtScalar lo = pick(rng) == 0 ? ExtScalar::neg_inf()
                                        : ExtScalar(Scalar(std::min(a, b)));
    const ExtScalar hi = pick(rng) == 1 ? ExtScalar::pos_inf()
                                        : ExtScalar(Scalar(std::max(a, b)));
    p.dom = pick(rng) == 2
                ? Cell::dense(lo, coin(rng) == 1, hi, coin(rng) == 1,
                              pick(rng) == 0 ? sq2(1, 2) : Scalar(0))
                : Cell::solid(lo, coin(rng) == 1, hi, coin(rng) == 1);
    if (p.dom.is_empty()) continue;
    if (pick(rng) != 0) p.lower = rform();
    if (pick(rng) != 0) p.upper = rform();
    p.lo_closed = coin(rng) == 1;
    p.hi_closed = coin(rng) == 1;
    if (pick(rng) == 0) {
      p.value_density = Density::dense;
      p.value_offset = coin(rng) == 1 ? Scalar(0) : sq2(1, 2);
    }
    pieces.push_back(p);
  }
  std::vector<ExceptionalFiber> exs;
  if (coin(rng) == 1) {
    ExceptionalFiber ex;
    ex.x = Scalar(small(rng));
    ex.set = coin(rng) == 1
                 ? RSet::point(rscalar())
                 : RSet::of_cell(Cell::closed(Scalar(small(rng) - 1),
                                              Scalar(small(rng) + 1)));
    ex.mode = coin(rng) == 1 ? FiberMode::add : FiberMode::replace;
    exs.push_back(ex);
  }
  return PAMap(std::move(pieces), std::move(exs));
}

std::vector<Scalar> probe_scalars() {
  std::vector<Scalar> out;
  for (int k = -6; k <= 6; ++k) out.push_back(frac(k, 2));
  out.push_back(sq2(1, 2));
  out.push_back(sq2(-1, 2));
  out.push_back(Scalar(1) + sq2(1, 2));
  out.push_back(frac(1, 3));
  return out;
}

}  // namespace

TEST_CASE("property sweep: inverse, image, preimage, domain, negation, sum") {
  std::mt19937_64 rng(0x5eed5eedULL);
  const std::vector<Scalar> probes = probe_scalars();
  const std::vector<Cell> windows = {
      Cell::closed(Scalar(-1), Scalar(1)),
      Cell::open(frac(-1, 2), frac(3, 2)),
      Cell::solid(ExtScalar(Scalar(0)), true, ExtScalar::pos_inf(), false),
      Cell::closed(frac(1, 2), frac(1, 2)),
      Cell::dense(ExtScalar(Scalar(-2)), true, ExtScalar(Scalar(2)), false,
                  Scalar(0)),
  };

  for (int trial = 0; trial < 120; ++trial) {
    const PAMap F = random_pamap(rng);
    const PAMap FI = F.inverted();
    const PAMap FII = FI.inverted();
    const PAMap FN = F.negated();
    const RSet dom = F.domain();

    for (const Scalar& y : probes) {
      // the inverse agrees with the pointwise preimage as a whole set
      CHECK(FI.fiber(y) == F.preimage_point(y));
    }
    for (const Scalar& x : probes) {
      const RSet fx = F.fiber(x);
      // membership symmetry of the graph
      for (const Scalar& y : probes)
        CHECK(fx.contains(y) == FI.fiber(y).contains(x));
      // double inversion restores every fiber
      CHECK(FII.fiber(x) == fx);
      // domain = nonempty fibers
      CHECK(dom.contains(x) == !fx.is_empty());
      // negation acts fiberwise
      CHECK(FN.fiber(x) == fx.negate());
    }
    for (const Cell& K : windows) {
      const RSet img = F.image(K);
      // y lands in the image exactly when its preimage meets the window
      for (const Scalar& y : probes)
        CHECK(img.contains(y) == !intersect(F.preimage_point(y), K).is_empty());
      // the fiber of any window point sits inside the image
      for (const Scalar& x : probes)
        if (K.contains(x)) CHECK_FALSE(subset_witness(F.fiber(x), img).has_value());
      // image of a degenerate window is the fiber
      if (K.lo == K.hi && K.density == Density::solid)
        CHECK(img == F.fiber(K.lo.finite()));
      // x is in the preimage exactly when its fiber meets the window
      if (K.density == Density::solid) {
        const RSet pre = F.preimage(K);
        for (const Scalar& x : probes)
          CHECK(pre.contains(x) == !intersect(F.fiber(x), K).is_empty());
      }
    }
  }

  // eager pointwise sums agree with the Minkowski sum of fibers
  for (int trial = 0; trial < 60; ++trial) {
    const PAMap F = random_pamap(rng);
    const PAMap G = random_pamap(rng);
    const auto S = sum_pamaps(F, G);
    if (!S.has_value()) continue;
    for (const Scalar& x : probes)
      CHECK(S->fiber(x) == minkowski(F.fiber(x), G.fiber(x)));
  }
}
