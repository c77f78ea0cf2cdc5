// Operator-identity suite shared by the identities scenario and the tests:
// MDFM factorization, the dilation norm identity, F_j zero-mode closed forms,
// the retarded-integral cross-check, the Leray commutator, split reconstruction.
#pragma once

#include "mss/potentials.hpp"

#include <cstdint>
#include <vector>

namespace mss {

struct CheckResult {
  std::string name;
  double value = 0;     // measured (relative) error
  double tolerance = 0; // pinned acceptance tolerance
  bool pass = false;
};

CheckResult check_mdfm_factorization(const SpectralGrid& g, double t);
CheckResult check_dilation_identity(const SpectralGrid& g);         // nu = 2, m = 1
CheckResult check_fj_zero_mode(const SpectralGrid& g, int j);       // 1/2 resp. 1/6
// retarded time-quadrature cross-check of the kernel; time_panels controls the
// refinement of the oracle side (error decreases monotonically with it)
CheckResult check_retarded_kernel(const SpectralGrid& g, int j, int time_panels = 12);
CheckResult check_leray_commutator(const SpectralGrid& g);
CheckResult check_split_reconstruction(const SpectralGrid& g, std::uint64_t seed);

std::vector<CheckResult> run_identity_checks(const SpectralGrid& g, std::uint64_t seed);

} // namespace mss
