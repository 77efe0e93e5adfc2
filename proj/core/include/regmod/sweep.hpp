// regmod — exact piecewise analysis utilities.
//
// Every quantified condition the checkers certify is reduced to finitely many
// exact point evaluations.  This header holds the shared machinery for that
// reduction: complete scan grids over an interval (structure points plus one
// rational sample inside each open gap), validated linear-fractional fits of
// a section along a gap (for one-sided limits), exact one-variable extrema,
// and a two-variable slab scan for boolean conditions.
//
// Soundness contract (on callers): a scan is complete only when every
// abscissa at which the section can change its defining formula or its truth
// value is supplied as a breakpoint.  Between adjacent supplied points the
// section must be a single linear-fractional formula (for value scans), be
// identically infinite, or have constant truth (for boolean scans).  All
// enumerations in this library over-include breakpoints: a spurious
// breakpoint costs time, never correctness.  Fits are never trusted blindly:
// a fit is built from three samples and must reproduce a fourth exactly,
// otherwise the result is withheld and the caller downgrades its evidence.

#ifndef REGMOD_SWEEP_HPP
#define REGMOD_SWEEP_HPP

#include "regmod/rset.hpp"
#include "regmod/scalar.hpp"

#include <array>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace regmod {

// One abscissa of a scan grid.  Structure points are evaluated individually;
// a sample point certifies the whole open gap (gap_lo, gap_hi) it sits in.
struct ScanPoint {
  Scalar x;
  bool in_window = false;  // the point belongs to the (possibly open) window
  bool is_sample = false;  // interior sample of an open gap
  ExtScalar gap_lo, gap_hi;
};

// Complete scan grid over a solid interval window: the window's finite
// endpoints, every supplied breakpoint inside the closed hull, and one
// rational sample inside each maximal open gap (including unbounded sides).
// Throws DomainError on dense windows.
std::vector<ScanPoint> scan_grid(const Cell& window,
                                 std::vector<Scalar> breakpoints);

// A one-variable linear-fractional form (na*x + nb) / (da*x + db).
struct LinFrac {
  Scalar na, nb, da, db;

  Scalar num(const Scalar& x) const { return na * x + nb; }
  Scalar den(const Scalar& x) const { return da * x + db; }
  // Exact value; throws DomainError at a pole.
  Scalar eval(const Scalar& x) const;
  // Limit at x0 approached from inside the side indicated by from_below
  // (x -> x0 with x < x0 when from_below).  x0 may be infinite, in which case
  // the side flag is ignored and the asymptotic value is returned.  Poles
  // yield the correctly signed infinity; a common root cancels.
  ExtScalar limit(const ExtScalar& x0, bool from_below) const;
};

// Fit a linear-fractional form through four exact samples (distinct
// abscissae): solve on three, then require the form to reproduce all four
// exactly and to have no pole at any of them.  Returns nullopt when the data
// is not linear-fractional.  Throws DomainError on duplicate abscissae.
std::optional<LinFrac> fit_linfrac(
    const std::array<std::pair<Scalar, Scalar>, 4>& samples);

// Exact extremum of a section over a window.
struct Extremum {
  ExtScalar value;          // the exact sup/inf (under the scan contract)
  bool attained = false;    // some point of the window attains it
  Scalar witness;           // attaining point, or the best sampled point
  ExtScalar witness_value;  // section(witness)
  bool exact = true;        // false: a fit failed; value is only a sampled bound
  // When the extremum is a non-attained one-sided gap limit: the approached
  // endpoint and the gap's other end, so callers can walk interior points
  // arbitrarily close to the extremal value.
  std::optional<ExtScalar> limit_at;
  ExtScalar limit_gap_other;
};

using Section = std::function<ExtScalar(const Scalar&)>;

// Supremum / infimum of a section over a solid window.  Under the scan
// contract the result is exact: structure points contribute their true
// values, each gap contributes interior samples plus its two one-sided
// endpoint limits (non-attained candidates).  When a gap's samples are not
// linear-fractional (contract violation) the extremum is still a valid
// sampled bound but `exact` is false.
Extremum section_sup(const Cell& window, std::vector<Scalar> breakpoints,
                     const Section& section);
Extremum section_inf(const Cell& window, std::vector<Scalar> breakpoints,
                     const Section& section);

// One-sided limit of a section at x0 along the open gap (glo, ghi), where x0
// is one of the two gap endpoints: four interior samples are fitted and the
// fitted form is evaluated at x0.  Identically infinite gaps yield that
// infinity.  Returns nullopt when the samples are not linear-fractional.
std::optional<ExtScalar> section_limit(const ExtScalar& x0,
                                       const ExtScalar& glo,
                                       const ExtScalar& ghi,
                                       const Section& section);

// Two-variable boolean slab scan over xwindow x uwindow.  xbreaks must list
// every abscissa where the u-section structure changes (vertical structure
// lines, pairwise intersections of structure lines, window endpoints);
// ubreaks(x) must list, for that fixed x, every ordinate where the section's
// truth can change.  Returns a violating pair if one exists at any grid
// point, nullopt when the condition holds on the whole grid — which, under
// the completeness contract, certifies it on the whole window product.
std::optional<std::pair<Scalar, Scalar>> scan2_violation(
    const Cell& xwindow, const Cell& uwindow, std::vector<Scalar> xbreaks,
    const std::function<std::vector<Scalar>(const Scalar&)>& ubreaks,
    const std::function<bool(const Scalar&, const Scalar&)>& holds);

}  // namespace regmod

#endif  // REGMOD_SWEEP_HPP
