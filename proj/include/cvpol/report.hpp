#pragma once

// Assembled polarisation analysis: both degrees, the per-manifold table and
// the truncation tail bound.  The table carries, per manifold N, the
// semi-classical contribution p_N <S>_N / <S0> (a signed 3-vector; the
// degrees satisfy P1sc = ||sum of them||) and the manifold contribution
// p_N ||<S>_N|| / N (so P1 = sum of them).

#include <optional>
#include <vector>

#include "cvpol/polarimetry.hpp"
#include "cvpol/types.hpp"

namespace cvpol {

template <class Scalar>
struct ReportRow {
  int n = 0;
  Scalar p = 0;
  Vector3R<Scalar> stokes = Vector3R<Scalar>::Zero();
  Vector3R<Scalar> contrib_sc = Vector3R<Scalar>::Zero();
  Scalar contrib_p1 = 0;
  bool defined = false;
};

template <class Scalar>
struct PolarisationReport {
  Scalar p1 = 0;
  Scalar p1sc = 0;
  Scalar tail_bound = 0;
  std::optional<Scalar> p1_err;
  std::optional<Scalar> p1sc_err;
  std::vector<ReportRow<Scalar>> rows;
};

template <class Scalar>
PolarisationReport<Scalar> build_report(const ManifoldDecomposition<Scalar>& dec,
                                        Scalar extra_skipped_mass = Scalar(0)) {
  PolarisationReport<Scalar> rep;
  const DegreeWithTail<Scalar> p1 = degree_p1(dec);
  rep.p1 = p1.value;
  rep.p1sc = degree_p1sc(dec);
  rep.tail_bound = p1.tail_bound + extra_skipped_mass;

  Scalar s0 = 0;
  for (const auto& row : dec.rows)
    if (row.defined) s0 += row.p * Scalar(row.n);
  rep.rows.reserve(dec.rows.size());
  for (const auto& row : dec.rows) {
    ReportRow<Scalar> r;
    r.n = row.n;
    r.p = row.p;
    r.defined = row.defined;
    if (row.defined) {
      r.stokes = row.stokes;
      if (s0 > Scalar(kStokesVacuumEps)) r.contrib_sc = row.p * row.stokes / s0;
      if (row.n > 0) r.contrib_p1 = row.p * row.stokes.norm() / Scalar(row.n);
    }
    rep.rows.push_back(r);
  }

  if (rep.p1 < Scalar(0) || rep.p1 > Scalar(1) + rep.tail_bound + Scalar(1e-9))
    throw numerical_error("PolarisationReport: P1 outside [0, 1 + tail]");
  if (rep.p1sc < Scalar(0) || rep.p1sc > Scalar(1) + Scalar(1e-9))
    throw numerical_error("PolarisationReport: P1sc outside [0, 1]");
  return rep;
}

}  // namespace cvpol
