#pragma once

#include <ostream>

namespace mimopc {

/// Embedded invariant suite; prints one PASS/FAIL line per check and returns the number of
/// failures. `perturb` scales the solver-side coefficients by 1.01 so the cross-checks against
/// untouched oracles must fail.
int run_selftest(std::ostream& os, bool perturb);

}  // namespace mimopc
