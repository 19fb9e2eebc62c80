#pragma once

#include "topoconv/mps.hpp"

namespace topoconv::dmrg {

struct DmrgConfig {
  int chi_max = 64;           // 100 is the usual choice for three-level sites
  int sweeps_max = 30;
  double energy_tol = 1e-10;  // absolute energy change per sweep
  double truncation_tol = 1e-12;  // discarded relative weight per bond
  double noise_amplitude = 1e-6;  // environment-mixing weight, x0.1 per sweep
  int chi_start = 16;         // bond cap ramps from here, doubling per sweep
  int lanczos_matvecs = 300;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundStateResult {
  mps::Mps state;             // normalized, canonical center at site 1
  double energy = 0.0;        // <state|H|state>; bare H for sector runs
  std::vector<double> energy_history;  // per sweep, as optimized
  bool converged = false;
  double max_discarded_weight = 0.0;   // worst bond of the final sweep
  // Mid-chain entropy moved less than 1e-7 over the final two sweeps.
  bool entropy_stable = false;
  double sz_total = 0.0;      // sector runs only
  double sz_variance = 0.0;   // sector runs only
};

// Two-site sweeping from a caller-supplied initial state.
GroundStateResult minimize(const models::Mpo& op, const mps::Mps& init,
                           const DmrgConfig& cfg);

// Ground state of the model from a deterministic product-biased start.
GroundStateResult ground_state(const models::ModelSpec& spec,
                               const DmrgConfig& cfg);

// Three-level chains with the sector penalty active: optimizes the penalized
// Hamiltonian from an on-sector start, verifies |<Sz_tot> - m| < 1e-4 and
// Var(Sz_tot) < 1e-4, and reports the penalty-free energy.
GroundStateResult ground_state_in_sector(const models::ModelSpec& spec,
                                         const DmrgConfig& cfg);

// As ground_state_in_sector but sweeping from a caller-supplied start, which
// must already lie in the target sector (warm starts from a neighbor point).
GroundStateResult minimize_in_sector(const models::ModelSpec& spec,
                                     const mps::Mps& init,
                                     const DmrgConfig& cfg);

}  // namespace topoconv::dmrg
