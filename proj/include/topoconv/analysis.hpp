#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "topoconv/mps.hpp"

namespace topoconv::analysis {

// Renyi orders for the entropy columns. `values` are the finite orders,
// strictly ascending; the infinity column (S = -log x_1) is appended when
// `include_infinity` is set.
struct AlphaGrid {
  std::vector<double> values;
  bool include_infinity = true;

  // 40 log-spaced orders in [0.1, 100]; endpoints and the alpha = 1 point
  // land exactly.
  static AlphaGrid standard();
  void validate() const;
};

// S_alpha = log(sum x^alpha) / (1 - alpha); alpha = 1 is the von Neumann
// limit, alpha = infinity gives -log max(x). Eigenvalues below 1e-14 are
// outside the spectrum's resolution and are skipped.
double renyi_entropy(const std::vector<double>& eigenvalues, double alpha);
double renyi_entropy(const mps::RdmSpectrum& spec, double alpha);

// {-log x_n} for x_n > 1e-14, ascending.
std::vector<double> entanglement_spectrum(const mps::RdmSpectrum& spec);

// Pairing test on an ascending entanglement spectrum. Only levels with
// x_n > 1e-8 participate; `paired` requires an even count grouped into
// consecutive pairs with intra-pair gap below pair_tol (in -log units).
struct DegeneracyReport {
  bool paired = false;
  double max_gap_within_pairs = 0.0;
  int levels_considered = 0;
};
DegeneracyReport degeneracy_report(const std::vector<double>& es,
                                   double pair_tol = 1e-4);

// One ground-state solve on a parameter grid: the spectra of every requested
// partition plus run diagnostics. `spectra` is ordered identically at every
// point.
struct SweepPoint {
  double p = 0.0;
  double energy = 0.0;
  bool converged = false;
  std::vector<mps::RdmSpectrum> spectra;
};

struct SweepResult {
  std::string parameter_name;  // "g", "D", or "lambda"
  std::vector<double> grid;    // strictly ascending
  std::vector<SweepPoint> points;
  void validate() const;
};

// Row verdict over all Renyi orders at one parameter value. Up/Down refer to
// the sign of dS/dp: Up means every order's entropy is non-decreasing in p.
enum class Verdict { ConvertibleUp, ConvertibleDown, NonConvertible, Indeterminate };
const char* verdict_name(Verdict v);

struct SignDiagram {
  std::vector<double> parameters;
  std::vector<double> alphas;  // finite columns
  bool has_infinity = false;
  // signs[i][k] in {-1, 0, +1}; column alphas.size() is the infinity column
  // when present.
  std::vector<std::vector<int>> signs;
  std::vector<Verdict> verdicts;             // per parameter
  std::vector<bool> critical_adjacent;       // per parameter, default false
};

// dS_alpha/dp by central differences (one-sided at the grid ends); |d| below
// zero_tol maps to sign 0. The infinity column is recomputed from the top
// eigenvalue's slope and must agree in sign wherever both exceed zero_tol.
SignDiagram derivative_sign_diagram(const SweepResult& sweep, int partition_index,
                                    const AlphaGrid& alphas,
                                    double zero_tol = 1e-6);

// Marks rows within one grid step of a correlation-length peak. `xi` is
// aligned with diagram.parameters; a local maximum counts as a detected
// divergence when it exceeds `factor` times the grid median.
void flag_critical_adjacent(SignDiagram& diagram, const std::vector<double>& xi,
                            double factor = 3.0);

// Nonlocal order parameters: a site operator at each end of the chain dressed
// by a string of symmetry operators over the interior, with the (-1)^(N-2)
// sign convention folded in.
enum class StringKind { ClusterZ, LambdaDx, LambdaDz };
double string_order(const mps::Mps& state, StringKind kind);

// Connected correlator C(n) = <A_j B_{j+n}> - <A_j><B_{j+n}> fitted to an
// exponential over n = stride, 2*stride, .., max_offset; xi = -1 / slope of
// log|C|. The anchor must sit at least N/4 from both edges so the window
// stays in the bulk. `stride` skips offsets where the correlator vanishes
// structurally (the cluster chain only correlates at multiples of three);
// sampling those would fit truncation noise instead of the decay.
struct CorrelationFit {
  double xi = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
};
CorrelationFit correlation_length(const mps::Mps& state,
                                  const Eigen::MatrixXcd& op_a,
                                  const Eigen::MatrixXcd& op_b, int anchor,
                                  int max_offset, int stride = 1);

// Per-site expectation profile plus an edge-localization score: mean |value|
// over the five sites nearest each edge minus mean |value| over the five
// central sites.
struct EdgeProfile {
  std::vector<double> values;
  double localization = 0.0;
};
EdgeProfile edge_profile(const mps::Mps& state, const Eigen::MatrixXcd& op);

// Fits the open-chain entropy scaling S_1(l) = (c/6) log[(2N/pi) sin(pi l/N)]
// + const over the given cuts. `poor_fit` flags r_squared < 0.99; the value
// is still returned.
struct CentralChargeFit {
  double c = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool poor_fit = false;
};
CentralChargeFit central_charge_fit(const mps::Mps& state,
                                    const std::vector<int>& cuts);
// Same fit from precomputed von Neumann entropies (entropies[i] belongs to
// cuts[i]); lets oracle entropies be fitted identically to MPS ones.
CentralChargeFit central_charge_fit_points(int n_sites,
                                           const std::vector<int>& cuts,
                                           const std::vector<double>& entropies);

}  // namespace topoconv::analysis
