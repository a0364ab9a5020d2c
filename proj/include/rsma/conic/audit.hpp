#pragma once

#include "rsma/conic/program.hpp"

#include <span>

namespace rsma::conic {

/// Largest relative violation per constraint family, re-evaluated from the
/// raw affine forms of the program (no solver internals involved).
struct AuditReport {
  double linear_eq = 0.0;
  double linear_ineq = 0.0;
  double soc = 0.0;
  double exp = 0.0;

  double worst() const;
  bool passes(double tol) const { return worst() <= tol; }
};

AuditReport audit(const ConicProgram& program, std::span<const double> x);

}  // namespace rsma::conic
