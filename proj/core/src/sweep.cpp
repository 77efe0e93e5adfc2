#include "regmod/sweep.hpp"

#include <algorithm>

namespace regmod {

namespace {

Scalar sample_between(const ExtScalar& lo, const ExtScalar& hi) {
  return Scalar(rational_between(lo, hi));
}

// Four distinct exact abscissae inside the open gap, in increasing order.
std::array<Scalar, 4> gap_samples(const ExtScalar& glo, const ExtScalar& ghi) {
  Scalar s1 = sample_between(glo, ghi);
  Scalar s2 = sample_between(glo, ExtScalar(s1));
  Scalar s3 = sample_between(ExtScalar(s1), ghi);
  Scalar s4 = sample_between(ExtScalar(s2), ExtScalar(s1));
  return {s2, s4, s1, s3};
}

}  // namespace

std::vector<ScanPoint> scan_grid(const Cell& window,
                                 std::vector<Scalar> breakpoints) {
  if (window.density != Density::solid)
    throw DomainError("scan windows must be solid intervals");
  std::vector<ScanPoint> out;
  if (window.is_empty()) return out;

  std::vector<Scalar> anchors;
  if (window.lo.is_finite()) anchors.push_back(window.lo.finite());
  if (window.hi.is_finite()) anchors.push_back(window.hi.finite());
  for (auto& b : breakpoints) {
    ExtScalar eb{b};
    if (eb < window.lo || window.hi < eb) continue;  // outside the closed hull
    anchors.push_back(std::move(b));
  }
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());

  auto add_anchor = [&](const Scalar& x) {
    ScanPoint p;
    p.x = x;
    p.in_window = window.contains(x);
    p.is_sample = false;
    p.gap_lo = ExtScalar(x);
    p.gap_hi = ExtScalar(x);
    out.push_back(std::move(p));
  };
  auto add_gap = [&](const ExtScalar& glo, const ExtScalar& ghi) {
    if (!(glo < ghi)) return;
    ScanPoint p;
    p.x = sample_between(glo, ghi);
    p.in_window = true;
    p.is_sample = true;
    p.gap_lo = glo;
    p.gap_hi = ghi;
    out.push_back(std::move(p));
  };

  if (anchors.empty()) {
    add_gap(window.lo, window.hi);
    return out;
  }
  add_gap(window.lo, ExtScalar(anchors.front()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    add_anchor(anchors[i]);
    if (i + 1 < anchors.size())
      add_gap(ExtScalar(anchors[i]), ExtScalar(anchors[i + 1]));
  }
  add_gap(ExtScalar(anchors.back()), window.hi);
  return out;
}

Scalar LinFrac::eval(const Scalar& x) const {
  Scalar d = den(x);
  if (d.is_zero()) throw DomainError("linear-fractional pole");
  return num(x) / d;
}

ExtScalar LinFrac::limit(const ExtScalar& x0, bool from_below) const {
  if (!x0.is_finite()) {
    if (!da.is_zero()) return ExtScalar(na / da);
    if (db.is_zero()) throw DomainError("degenerate denominator");
    if (na.is_zero()) return ExtScalar(nb / db);
    int s = na.sign() * db.sign() * (x0.is_pos_inf() ? 1 : -1);
    return s > 0 ? ExtScalar::pos_inf() : ExtScalar::neg_inf();
  }
  const Scalar& x = x0.finite();
  Scalar n = num(x), d = den(x);
  if (!d.is_zero()) return ExtScalar(n / d);
  if (da.is_zero()) throw DomainError("degenerate denominator");
  // Common root: (x - x0) divides both parts, the ratio of slopes remains.
  if (n.is_zero()) return ExtScalar(na / da);
  // Simple pole: the denominator's sign on the approach side is the sign of
  // da*(x - x0), i.e. -sign(da) from below and +sign(da) from above.
  int dside = from_below ? -da.sign() : da.sign();
  return n.sign() * dside > 0 ? ExtScalar::pos_inf() : ExtScalar::neg_inf();
}

std::optional<LinFrac> fit_linfrac(
    const std::array<std::pair<Scalar, Scalar>, 4>& samples) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (samples[i].first == samples[j].first)
        throw DomainError("duplicate abscissae in linear-fractional fit");

  // Homogeneous rows in (na, nb, da, db):  na*x + nb - v*da*x - v*db = 0.
  std::array<std::array<Scalar, 4>, 3> m;
  for (int i = 0; i < 3; ++i) {
    const auto& [x, v] = samples[i];
    m[i] = {x, Scalar(1), -(v * x), -v};
  }

  // Reduced row echelon form, tracking the pivot row of each column.
  std::array<int, 4> pivot_row{-1, -1, -1, -1};
  int row = 0;
  for (int col = 0; col < 4 && row < 3; ++col) {
    int pr = -1;
    for (int r = row; r < 3; ++r)
      if (!m[r][col].is_zero()) {
        pr = r;
        break;
      }
    if (pr < 0) continue;
    std::swap(m[row], m[pr]);
    for (int r = 0; r < 3; ++r) {
      if (r == row || m[r][col].is_zero()) continue;
      Scalar f = m[r][col] / m[row][col];
      for (int c = 0; c < 4; ++c) m[r][c] -= f * m[row][c];
    }
    pivot_row[col] = row;
    ++row;
  }

  auto kernel_vector = [&](int free_col) {
    std::array<Scalar, 4> sol{Scalar(0), Scalar(0), Scalar(0), Scalar(0)};
    sol[free_col] = Scalar(1);
    for (int col = 0; col < 4; ++col) {
      int r = pivot_row[col];
      if (r < 0) continue;
      Scalar acc(0);
      for (int c = 0; c < 4; ++c)
        if (pivot_row[c] < 0) acc += m[r][c] * sol[c];
      sol[col] = -acc / m[r][col];
    }
    return sol;
  };
  auto validate = [&](const std::array<Scalar, 4>& sol)
      -> std::optional<LinFrac> {
    LinFrac lf{sol[0], sol[1], sol[2], sol[3]};
    if (lf.da.is_zero() && lf.db.is_zero()) return std::nullopt;
    for (const auto& [x, v] : samples) {
      Scalar d = lf.den(x);
      if (d.is_zero() || lf.num(x) != v * d) return std::nullopt;
    }
    return lf;
  };

  std::vector<std::array<Scalar, 4>> basis;
  for (int col = 0; col < 4; ++col)
    if (pivot_row[col] < 0) basis.push_back(kernel_vector(col));
  for (const auto& b : basis)
    if (auto lf = validate(b)) return lf;
  // A basis vector may have an artificial pole at a sample; combinations of
  // two basis vectors dodge any finite set of bad hyperplanes generically.
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j) {
      std::array<Scalar, 4> sum;
      for (int c = 0; c < 4; ++c) sum[c] = basis[i][c] + basis[j][c];
      if (auto lf = validate(sum)) return lf;
    }
  return std::nullopt;
}

namespace {

struct Cand {
  ExtScalar value;
  bool attained;
  Scalar witness;
  std::optional<ExtScalar> limit_at;
  ExtScalar limit_gap_other;
  ExtScalar at_witness;  // section value at the witness abscissa
};

// Collect exact candidates for the supremum: true values at structure points
// and interior samples (attained), one-sided endpoint limits per gap
// (non-attained).  Sets exact=false when a gap is not linear-fractional.
void gather_candidates(const Cell& window, std::vector<Scalar> bps,
                       const Section& sec, std::vector<Cand>& cands,
                       bool& exact) {
  auto pts = scan_grid(window, std::move(bps));
  for (const auto& p : pts) {
    if (!p.is_sample) {
      if (p.in_window) {
        const ExtScalar v = sec(p.x);
        cands.push_back({v, true, p.x, std::nullopt, {}, v});
      }
      continue;
    }
    auto xs = gap_samples(p.gap_lo, p.gap_hi);
    std::array<ExtScalar, 4> vals;
    int n_pos = 0, n_neg = 0, n_fin = 0;
    int taken = 0;
    auto probe = [&](int i) {
      vals[i] = sec(xs[i]);
      cands.push_back({vals[i], true, xs[i], std::nullopt, {}, vals[i]});
      if (vals[i].is_pos_inf())
        ++n_pos;
      else if (vals[i].is_neg_inf())
        ++n_neg;
      else
        ++n_fin;
      ++taken;
    };
    probe(0);
    probe(1);
    if (vals[0] == vals[1]) {
      probe(2);
      // A linear-fractional section through three equal values is constant,
      // so the gap is settled; endpoint limits equal the attained value.
      if (vals[1] == vals[2]) continue;
    }
    for (int i = taken; i < 4; ++i) probe(i);
    if (n_pos == 4 || n_neg == 4) continue;  // identically infinite gap
    if (n_fin != 4) {
      exact = false;  // mixed finite/infinite samples: missing breakpoint
      continue;
    }
    std::array<std::pair<Scalar, Scalar>, 4> data;
    for (int i = 0; i < 4; ++i) data[i] = {xs[i], vals[i].finite()};
    auto lf = fit_linfrac(data);
    if (!lf) {
      exact = false;
      continue;
    }
    cands.push_back({lf->limit(p.gap_lo, /*from_below=*/false), false, xs[0],
                     p.gap_lo, p.gap_hi, vals[0]});
    cands.push_back({lf->limit(p.gap_hi, /*from_below=*/true), false, xs[3],
                     p.gap_hi, p.gap_lo, vals[3]});
  }
}

}  // namespace

Extremum section_sup(const Cell& window, std::vector<Scalar> breakpoints,
                     const Section& section) {
  std::vector<Cand> cands;
  bool exact = true;
  gather_candidates(window, std::move(breakpoints), section, cands, exact);
  Extremum e;
  e.exact = exact;
  if (cands.empty()) {  // empty window: supremum over the empty set
    e.value = ExtScalar::neg_inf();
    e.attained = false;
    e.witness = Scalar(0);
    e.witness_value = ExtScalar::neg_inf();
    return e;
  }
  const Cand* best = &cands.front();
  for (const auto& c : cands) {
    if (c.value > best->value || (c.value == best->value && c.attained &&
                                  !best->attained))
      best = &c;
  }
  e.value = best->value;
  e.attained = best->attained;
  e.witness = best->witness;
  e.witness_value = best->at_witness;
  e.limit_at = best->limit_at;
  e.limit_gap_other = best->limit_gap_other;
  return e;
}

Extremum section_inf(const Cell& window, std::vector<Scalar> breakpoints,
                     const Section& section) {
  Section negated = [&section](const Scalar& x) { return -section(x); };
  Extremum e = section_sup(window, std::move(breakpoints), negated);
  e.value = -e.value;
  e.witness_value = -e.witness_value;
  return e;
}

std::optional<ExtScalar> section_limit(const ExtScalar& x0,
                                       const ExtScalar& glo,
                                       const ExtScalar& ghi,
                                       const Section& section) {
  if (x0 != glo && x0 != ghi)
    throw DomainError("limit point must be a gap endpoint");
  bool from_below = (x0 == ghi);
  auto xs = gap_samples(glo, ghi);
  std::array<ExtScalar, 4> vals;
  int n_pos = 0, n_neg = 0;
  for (int i = 0; i < 4; ++i) {
    vals[i] = section(xs[i]);
    if (vals[i].is_pos_inf()) ++n_pos;
    if (vals[i].is_neg_inf()) ++n_neg;
  }
  if (n_pos == 4) return ExtScalar::pos_inf();
  if (n_neg == 4) return ExtScalar::neg_inf();
  if (n_pos + n_neg != 0) return std::nullopt;
  std::array<std::pair<Scalar, Scalar>, 4> data;
  for (int i = 0; i < 4; ++i) data[i] = {xs[i], vals[i].finite()};
  auto lf = fit_linfrac(data);
  if (!lf) return std::nullopt;
  return lf->limit(x0, from_below);
}

std::optional<std::pair<Scalar, Scalar>> scan2_violation(
    const Cell& xwindow, const Cell& uwindow, std::vector<Scalar> xbreaks,
    const std::function<std::vector<Scalar>(const Scalar&)>& ubreaks,
    const std::function<bool(const Scalar&, const Scalar&)>& holds) {
  auto xs = scan_grid(xwindow, std::move(xbreaks));
  for (const auto& px : xs) {
    if (!px.in_window) continue;
    auto us = scan_grid(uwindow, ubreaks(px.x));
    for (const auto& pu : us) {
      if (!pu.in_window) continue;
      if (!holds(px.x, pu.x)) return std::make_pair(px.x, pu.x);
    }
  }
  return std::nullopt;
}

}  // namespace regmod
