// Exact scan grids, validated linear-fractional fits, section extrema.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "regmod/sweep.hpp"

#include <vector>

using namespace regmod;

namespace {
Scalar q(long long p, long long d = 1) { return Scalar::ratio(p, d); }
ExtScalar pinf() { return ExtScalar::pos_inf(); }
ExtScalar ninf() { return ExtScalar::neg_inf(); }
}  // namespace

TEST_CASE("scan_grid: anchors, gap samples, window membership") {
  // Open window (0,1) with a breakpoint at 1/2; breakpoints outside the hull
  // are dropped, one coinciding with an endpoint is merged into the anchor.
  auto pts = scan_grid(Cell::open(0, 1), {q(1, 2), q(2), q(0)});
  REQUIRE(pts.size() == 5);
  CHECK(pts[0].x == q(0));
  CHECK_FALSE(pts[0].in_window);
  CHECK_FALSE(pts[0].is_sample);
  CHECK(pts[1].is_sample);
  CHECK(pts[1].in_window);
  CHECK(pts[1].x > q(0));
  CHECK(pts[1].x < q(1, 2));
  CHECK(pts[2].x == q(1, 2));
  CHECK(pts[2].in_window);
  CHECK(pts[3].is_sample);
  CHECK(pts[3].x > q(1, 2));
  CHECK(pts[3].x < q(1));
  CHECK(pts[4].x == q(1));
  CHECK_FALSE(pts[4].in_window);

  // Unbounded side: the gap to +inf gets a sample beyond the last anchor.
  auto ray = scan_grid(Cell::solid(0, true, ExtScalar::pos_inf(), false), {});
  REQUIRE(ray.size() == 2);
  CHECK(ray[0].x == q(0));
  CHECK(ray[0].in_window);
  CHECK(ray[1].is_sample);
  CHECK(ray[1].x > q(0));
  CHECK(ray[1].gap_hi.is_pos_inf());

  // Degenerate and empty windows.
  auto one = scan_grid(Cell::closed(2, 2), {});
  REQUIRE(one.size() == 1);
  CHECK(one[0].in_window);
  CHECK(scan_grid(Cell::open(3, 3), {}).empty());

  // The whole line with no structure: a single sample.
  auto line = scan_grid(
      Cell::solid(ExtScalar::neg_inf(), false, ExtScalar::pos_inf(), false),
      {});
  REQUIRE(line.size() == 1);
  CHECK(line[0].is_sample);

  CHECK_THROWS_AS(
      scan_grid(Cell::dense(0, true, 1, true, Scalar(0)), {}), DomainError);
}

TEST_CASE("fit_linfrac: affine, hyperbolic, constant, rejection") {
  auto aff = fit_linfrac({{{q(0), q(1)}, {q(1), q(3)}, {q(2), q(5)}, {q(3), q(7)}}});
  REQUIRE(aff.has_value());
  CHECK(aff->eval(q(5)) == q(11));
  CHECK(aff->limit(pinf(), false) == pinf());
  CHECK(aff->limit(ninf(), false) == ninf());

  // v = 1/x through x = 1,2,3,4.
  auto inv = fit_linfrac(
      {{{q(1), q(1)}, {q(2), q(1, 2)}, {q(3), q(1, 3)}, {q(4), q(1, 4)}}});
  REQUIRE(inv.has_value());
  CHECK(inv->eval(q(1, 2)) == q(2));
  CHECK(inv->limit(ExtScalar(0), /*from_below=*/false) == pinf());
  CHECK(inv->limit(ExtScalar(0), /*from_below=*/true) == ninf());
  CHECK(inv->limit(pinf(), false) == ExtScalar(0));
  CHECK_THROWS_AS(inv->eval(q(0)), DomainError);

  // v = (3x-1)/(x+2): pole at -2, asymptote 3.
  auto lf = fit_linfrac(
      {{{q(0), q(-1, 2)}, {q(1), q(2, 3)}, {q(2), q(5, 4)}, {q(3), q(8, 5)}}});
  REQUIRE(lf.has_value());
  CHECK(lf->eval(q(-1)) == q(-4));
  CHECK(lf->limit(ExtScalar(q(-2)), /*from_below=*/false) == ninf());
  CHECK(lf->limit(ExtScalar(q(-2)), /*from_below=*/true) == pinf());
  CHECK(lf->limit(pinf(), false) == ExtScalar(q(3)));

  // Constant sections are fit despite the underdetermined system.
  auto cst = fit_linfrac({{{q(-1), q(5)}, {q(0), q(5)}, {q(7), q(5)}, {q(9), q(5)}}});
  REQUIRE(cst.has_value());
  CHECK(cst->eval(q(100)) == q(5));
  CHECK(cst->limit(pinf(), false) == ExtScalar(q(5)));

  // A parabola is not linear-fractional: the fourth sample exposes it.
  CHECK_FALSE(fit_linfrac({{{q(0), q(0)}, {q(1), q(1)}, {q(2), q(4)}, {q(3), q(9)}}})
                  .has_value());

  CHECK_THROWS_AS(
      fit_linfrac({{{q(1), q(1)}, {q(1), q(2)}, {q(2), q(3)}, {q(3), q(4)}}}),
      DomainError);
}

TEST_CASE("section_sup/inf: attained extrema and open-endpoint limits") {
  Section absx = [](const Scalar& x) { return ExtScalar(x.abs()); };
  auto sup = section_sup(Cell::open(-1, 2), {q(0)}, absx);
  CHECK(sup.exact);
  CHECK(sup.value == ExtScalar(q(2)));
  CHECK_FALSE(sup.attained);  // only approached at the open endpoint 2
  CHECK(sup.witness_value < sup.value);
  auto inf = section_inf(Cell::open(-1, 2), {q(0)}, absx);
  CHECK(inf.exact);
  CHECK(inf.value == ExtScalar(q(0)));
  CHECK(inf.attained);
  CHECK(inf.witness == q(0));

  // Distance to [0,1] over (-3,4): supremum 3 approached at both ends.
  RSet seg = RSet::of_cell(Cell::closed(0, 1));
  Section dist = [&seg](const Scalar& x) { return seg.distance(x); };
  auto dsup = section_sup(Cell::open(-3, 4), {q(0), q(1)}, dist);
  CHECK(dsup.exact);
  CHECK(dsup.value == ExtScalar(q(3)));
  CHECK_FALSE(dsup.attained);
  auto dinf = section_inf(Cell::open(-3, 4), {q(0), q(1)}, dist);
  CHECK(dinf.value == ExtScalar(q(0)));
  CHECK(dinf.attained);

  // 1/x on (0,1): sup +inf at the pole side, inf 1 approached at 1.
  Section recip = [](const Scalar& x) { return ExtScalar(Scalar(1) / x); };
  auto rsup = section_sup(Cell::open(0, 1), {}, recip);
  CHECK(rsup.exact);
  CHECK(rsup.value == pinf());
  CHECK_FALSE(rsup.attained);
  auto rinf = section_inf(Cell::open(0, 1), {}, recip);
  CHECK(rinf.value == ExtScalar(q(1)));
  CHECK_FALSE(rinf.attained);

  // Identically infinite sections stay exact.
  Section empty_dist = [](const Scalar&) { return ExtScalar::pos_inf(); };
  auto esup = section_sup(Cell::open(0, 1), {}, empty_dist);
  CHECK(esup.exact);
  CHECK(esup.value == pinf());
  CHECK(esup.attained);

  // A hidden jump (missing breakpoint) downgrades exactness but still
  // reports a valid sampled bound.
  Section hidden = [](const Scalar& x) {
    return x < q(0) ? ExtScalar::pos_inf() : ExtScalar(x);
  };
  auto hsup = section_sup(Cell::open(-1, 1), {}, hidden);
  CHECK_FALSE(hsup.exact);
  CHECK(hsup.value == pinf());

  // Closed endpoint attains; open endpoint does not.
  Section idf = [](const Scalar& x) { return ExtScalar(x); };
  auto half = section_sup(Cell::solid(0, true, 1, false), {}, idf);
  CHECK(half.value == ExtScalar(q(1)));
  CHECK_FALSE(half.attained);
  auto half_inf = section_inf(Cell::solid(0, true, 1, false), {}, idf);
  CHECK(half_inf.value == ExtScalar(q(0)));
  CHECK(half_inf.attained);
  CHECK(half_inf.witness == q(0));
}

TEST_CASE("section_limit: one-sided limits along a gap") {
  Section sec = [](const Scalar& x) {
    return ExtScalar((Scalar(2) * x + Scalar(3)) / (x - Scalar(1)));
  };
  auto above = section_limit(ExtScalar(q(1)), ExtScalar(q(1)), ExtScalar(q(2)), sec);
  REQUIRE(above.has_value());
  CHECK(*above == pinf());
  auto below = section_limit(ExtScalar(q(1)), ExtScalar(q(0)), ExtScalar(q(1)), sec);
  REQUIRE(below.has_value());
  CHECK(*below == ninf());
  auto at_inf = section_limit(pinf(), ExtScalar(q(2)), pinf(), sec);
  REQUIRE(at_inf.has_value());
  CHECK(*at_inf == ExtScalar(q(2)));
  CHECK_THROWS_AS(
      section_limit(ExtScalar(q(5)), ExtScalar(q(0)), ExtScalar(q(1)), sec),
      DomainError);
}

TEST_CASE("scan2_violation: complete boolean slab scan") {
  auto near = [](const Scalar& x, const Scalar& u) {
    return (x - u).abs() <= q(1, 2);
  };
  auto ubreaks = [](const Scalar& x) {
    return std::vector<Scalar>{x - q(1, 2), x + q(1, 2)};
  };
  auto bad = scan2_violation(Cell::open(0, 1), Cell::open(0, 1), {q(1, 2)},
                             ubreaks, near);
  REQUIRE(bad.has_value());
  CHECK((bad->first - bad->second).abs() > q(1, 2));

  auto far = [](const Scalar& x, const Scalar& u) {
    return (x - u).abs() <= q(2);
  };
  auto ubreaks2 = [](const Scalar& x) {
    return std::vector<Scalar>{x - q(2), x + q(2)};
  };
  CHECK_FALSE(scan2_violation(Cell::open(0, 1), Cell::open(0, 1), {},
                              ubreaks2, far)
                  .has_value());
}
