#include "topoconv/cli.hpp"

namespace topoconv::cli {

namespace {

// Every preset is a complete config file; `run` and `verify` parse these
// exactly like user-supplied files. Presets sharing a model and grid carry
// several partitions so the per-point ground states are solved once.
std::vector<FigurePreset> build_presets() {
  std::vector<FigurePreset> v;

  v.push_back(
      {"cluster_sign_diagrams",
       "two-level chain N=100, g in [0,2]: boundary cuts 3/50/90 and interior "
       "blocks 3 and 10 wide, with string order, correlation length, pairing",
       R"([model]
family = cluster_ising
sites = 100
perturbation = cluster_edge_xz
pert_eps = 1e-3
pert_sign = 1

[sweep]
parameter = g
start = 0
stop = 2
step = 0.05

[partitions]
cut = 3
cut = 50
cut = 90
block = 49 3
block = 46 10

[alpha]
grid = standard

[dmrg]
chi_max = 64
seed = 1

[observables]
string_order = true
correlation_length = true
degeneracy = true

[output]
dir = out/cluster_sign_diagrams
workers = 1
)"});

  v.push_back(
      {"cluster_critical_zoom",
       "two-level chain N=100 around g=1 at chi=128: entropy-scaling fit for "
       "the central charge plus correlation length",
       R"([model]
family = cluster_ising
sites = 100
perturbation = cluster_edge_xz
pert_eps = 1e-3
pert_sign = 1

[sweep]
parameter = g
start = 0.9
stop = 1.1
step = 0.05

[partitions]
cut = 50

[alpha]
grid = standard

[dmrg]
chi_max = 128
seed = 1

[observables]
correlation_length = true
central_charge = true

[output]
dir = out/cluster_critical_zoom
workers = 1
)"});

  v.push_back(
      {"cluster_oracle_check",
       "two-level chain N=100 with the quadratic edge pair term: boundary "
       "blocks of 10 and 50 for the covariance-oracle comparison (verify)",
       R"([model]
family = cluster_ising
sites = 100
perturbation = cluster_edge
pert_eps = 1e-3
pert_sign = 1

[sweep]
parameter = g
start = 0.2
stop = 1.6
step = 0.35

[partitions]
cut = 10
cut = 50

[alpha]
values = 0.5,1,2
include_infinity = true

[dmrg]
chi_max = 256
energy_tol = 1e-11
truncation_tol = 1e-15
seed = 1

[observables]

[output]
dir = out/cluster_oracle_check
workers = 1
)"});

  v.push_back(
      {"cluster_ed_check",
       "two-level chain N=10: dense-diagonalization comparison grid (verify)",
       R"([model]
family = cluster_ising
sites = 10
perturbation = cluster_edge_xz
pert_eps = 1e-3
pert_sign = 1

[sweep]
parameter = g
start = 0.2
stop = 1.8
step = 0.4

[partitions]
cut = 3
cut = 5

[alpha]
values = 0.5,1,2
include_infinity = true

[dmrg]
chi_max = 32
seed = 1

[observables]
string_order = true

[output]
dir = out/cluster_ed_check
workers = 1
)"});

  v.push_back(
      {"haldane_d_sweep",
       "three-level chain N=100, lambda=1, D in [-1,1]: asymmetric cut 96 and "
       "symmetric cut 50, with string order and pairing",
       R"([model]
family = lambda_d
sites = 100
lambda = 1
perturbation = spin_one_edge
pert_eps = 1e-3
pert_sign = -1

[sweep]
parameter = D
start = -1
stop = 1
step = 0.1

[partitions]
cut = 96
cut = 50

[alpha]
grid = standard

[dmrg]
chi_max = 48
seed = 1

[observables]
string_order = true
degeneracy = true

[output]
dir = out/haldane_d_sweep
workers = 1
)"});

  v.push_back(
      {"haldane_d_sweep_sector",
       "three-level chain N=100 in the total-Sz=1 sector, lambda=1, D in "
       "[-1,1]: interior blocks 4 and 10 wide, with edge profiles",
       R"([model]
family = lambda_d
sites = 100
lambda = 1
perturbation = spin_one_edge
pert_eps = 1e-3
pert_sign = -1
sector_active = true
sector_m = 1
sector_mu = 10

[sweep]
parameter = D
start = -1
stop = 1
step = 0.1

[partitions]
block = 49 4
block = 46 10

[alpha]
grid = standard

[dmrg]
chi_max = 48
seed = 1

[observables]
string_order = true
edge_profile = true

[output]
dir = out/haldane_d_sweep_sector
workers = 1
)"});

  v.push_back(
      {"haldane_lambda_sweep",
       "three-level chain N=100, D=0, lambda in [0,1.5]: asymmetric cut 96 "
       "and symmetric cut 50, with string order and pairing",
       R"([model]
family = lambda_d
sites = 100
d = 0
perturbation = spin_one_edge
pert_eps = 1e-3
pert_sign = -1

[sweep]
parameter = lambda
start = 0
stop = 1.5
step = 0.1

[partitions]
cut = 96
cut = 50

[alpha]
grid = standard

[dmrg]
chi_max = 48
seed = 1

[observables]
string_order = true
degeneracy = true

[output]
dir = out/haldane_lambda_sweep
workers = 1
)"});

  v.push_back(
      {"haldane_lambda_sweep_sector",
       "three-level chain N=100 in the total-Sz=1 sector, D=0, lambda in "
       "[0,1.5]: interior blocks 4 and 10 wide",
       R"([model]
family = lambda_d
sites = 100
d = 0
perturbation = spin_one_edge
pert_eps = 1e-3
pert_sign = -1
sector_active = true
sector_m = 1
sector_mu = 10

[sweep]
parameter = lambda
start = 0
stop = 1.5
step = 0.1

[partitions]
block = 49 4
block = 46 10

[alpha]
grid = standard

[dmrg]
chi_max = 48
seed = 1

[observables]
string_order = true

[output]
dir = out/haldane_lambda_sweep_sector
workers = 1
)"});

  v.push_back(
      {"haldane_ed_check",
       "three-level chain N=6 in the total-Sz=1 sector: dense-diagonalization "
       "comparison grid (verify)",
       R"([model]
family = lambda_d
sites = 6
lambda = 1
perturbation = spin_one_edge
pert_eps = 1e-3
pert_sign = -1
sector_active = true
sector_m = 1
sector_mu = 10

[sweep]
parameter = D
start = -0.5
stop = 0.5
step = 0.5

[partitions]
cut = 3
block = 3 2

[alpha]
values = 0.5,1,2
include_infinity = true

[dmrg]
chi_max = 16
seed = 1

[observables]
string_order = true

[output]
dir = out/haldane_ed_check
workers = 1
)"});

  return v;
}

}  // namespace

const std::vector<FigurePreset>& figure_presets() {
  static const std::vector<FigurePreset> presets = build_presets();
  return presets;
}

const FigurePreset& preset_by_name(const std::string& name) {
  for (const FigurePreset& p : figure_presets())
    if (p.name == name) return p;
  throw Error(ErrorKind::Config,
              "unknown preset '" + name + "' (run `topoconv presets` for the list)");
}

}  // namespace topoconv::cli
