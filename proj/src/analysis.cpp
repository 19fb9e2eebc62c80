#include "topoconv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "topoconv/models.hpp"

namespace topoconv::analysis {

namespace {

constexpr double kSpectrumFloor = 1e-14;  // resolution of the spectra
constexpr double kPairingFloor = 1e-8;    // eigenvalue cutoff for pairing

std::string format_p(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

// Least squares y = intercept + slope * x with coefficient of determination.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx < 1e-30)
    throw Error(ErrorKind::Numerical, "line fit: abscissae are degenerate");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy < 1e-30 ? 1.0 : 1.0 - ss_res / syy;
  return f;
}

// Central differences in the interior, one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& p,
                                    const std::vector<double>& y) {
  const int n = static_cast<int>(p.size());
  std::vector<double> d(n);
  d[0] = (y[1] - y[0]) / (p[1] - p[0]);
  d[n - 1] = (y[n - 1] - y[n - 2]) / (p[n - 1] - p[n - 2]);
  for (int i = 1; i + 1 < n; ++i)
    d[i] = (y[i + 1] - y[i - 1]) / (p[i + 1] - p[i - 1]);
  return d;
}

int sign_with_tol(double d, double zero_tol) {
  if (std::abs(d) <= zero_tol) return 0;
  return d > 0.0 ? 1 : -1;
}

double real_checked(cxd v, double tol, const char* what) {
  if (std::abs(v.imag()) > tol)
    throw Error(ErrorKind::Numerical,
                std::string(what) + ": imaginary part " +
                    std::to_string(v.imag()) + " exceeds tolerance");
  return v.real();
}

}  // namespace

AlphaGrid AlphaGrid::standard() {
  AlphaGrid g;
  const int m = 40;
  const double lo = -1.0, hi = 2.0;  // log10 of 0.1 and 100
  g.values.resize(m);
  for (int k = 0; k < m; ++k)
    g.values[k] = std::pow(10.0, (lo * (m - 1 - k) + hi * k) / (m - 1));
  g.include_infinity = true;
  return g;
}

void AlphaGrid::validate() const {
  if (values.empty())
    throw Error(ErrorKind::Config, "alpha grid must not be empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw Error(ErrorKind::Config, "alpha grid entries must be positive");
    if (i > 0 && values[i] <= values[i - 1])
      throw Error(ErrorKind::Config, "alpha grid must be strictly ascending");
  }
}

double renyi_entropy(const std::vector<double>& eigenvalues, double alpha) {
  if (std::isnan(alpha) || alpha <= 0.0)
    throw Error(ErrorKind::Config, "renyi order must be positive");
  double top = 0.0;
  for (double x : eigenvalues) top = std::max(top, x);
  if (top <= kSpectrumFloor)
    throw Error(ErrorKind::Shape, "renyi entropy of an empty spectrum");
  if (std::isinf(alpha)) return -std::log(top);
  if (std::abs(alpha - 1.0) < 1e-9) {
    double s = 0.0;
    for (double x : eigenvalues)
      if (x > kSpectrumFloor) s -= x * std::log(x);
    return s;
  }
  // Factor out the largest eigenvalue so x^alpha never underflows.
  double sum = 0.0;
  for (double x : eigenvalues)
    if (x > kSpectrumFloor) sum += std::pow(x / top, alpha);
  return (alpha * std::log(top) + std::log(sum)) / (1.0 - alpha);
}

double renyi_entropy(const mps::RdmSpectrum& spec, double alpha) {
  return renyi_entropy(spec.eigenvalues, alpha);
}

std::vector<double> entanglement_spectrum(const mps::RdmSpectrum& spec) {
  std::vector<double> es;
  es.reserve(spec.eigenvalues.size());
  for (double x : spec.eigenvalues)
    if (x > kSpectrumFloor) es.push_back(-std::log(x));
  std::sort(es.begin(), es.end());
  return es;
}

DegeneracyReport degeneracy_report(const std::vector<double>& es,
                                   double pair_tol) {
  const double cutoff = -std::log(kPairingFloor);
  DegeneracyReport rep;
  std::vector<double> sig;
  for (double e : es)
    if (e < cutoff) sig.push_back(e);
  std::sort(sig.begin(), sig.end());
  rep.levels_considered = static_cast<int>(sig.size());
  rep.paired = !sig.empty() && sig.size() % 2 == 0;
  for (std::size_t i = 0; i + 1 < sig.size(); i += 2) {
    const double gap = sig[i + 1] - sig[i];
    rep.max_gap_within_pairs = std::max(rep.max_gap_within_pairs, gap);
    if (gap >= pair_tol) rep.paired = false;
  }
  return rep;
}

void SweepResult::validate() const {
  if (grid.size() != points.size())
    throw Error(ErrorKind::Shape, "sweep grid and points disagree in length");
  if (grid.empty()) throw Error(ErrorKind::Shape, "sweep is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw Error(ErrorKind::Shape, "sweep grid must be strictly ascending");
  for (const SweepPoint& pt : points)
    if (pt.spectra.size() != points.front().spectra.size())
      throw Error(ErrorKind::Shape,
                  "sweep points carry different partition counts");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConvertibleUp: return "ConvertibleUp";
    case Verdict::ConvertibleDown: return "ConvertibleDown";
    case Verdict::NonConvertible: return "NonConvertible";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  throw Error(ErrorKind::Shape, "unknown verdict");
}

SignDiagram derivative_sign_diagram(const SweepResult& sweep, int partition_index,
                                    const AlphaGrid& alphas, double zero_tol) {
  sweep.validate();
  alphas.validate();
  const int np = static_cast<int>(sweep.grid.size());
  if (np < 3)
    throw Error(ErrorKind::Config,
                "sign diagram needs at least 3 grid points");
  if (partition_index < 0 ||
      partition_index >= static_cast<int>(sweep.points.front().spectra.size()))
    throw Error(ErrorKind::Shape, "partition index out of range");
  if (zero_tol <= 0.0)
    throw Error(ErrorKind::Config, "zero_tol must be positive");

  const int na = static_cast<int>(alphas.values.size());
  const int ncol = na + (alphas.include_infinity ? 1 : 0);

  SignDiagram diag;
  diag.parameters = sweep.grid;
  diag.alphas = alphas.values;
  diag.has_infinity = alphas.include_infinity;
  diag.signs.assign(np, std::vector<int>(ncol, 0));
  diag.critical_adjacent.assign(np, false);

  std::vector<double> column(np);
  for (int k = 0; k < na; ++k) {
    for (int i = 0; i < np; ++i)
      column[i] = renyi_entropy(
          sweep.points[i].spectra[partition_index].eigenvalues,
          alphas.values[k]);
    const std::vector<double> d = grid_derivative(sweep.grid, column);
    for (int i = 0; i < np; ++i) diag.signs[i][k] = sign_with_tol(d[i], zero_tol);
  }

  if (alphas.include_infinity) {
    std::vector<double> s_inf(np), log_top(np);
    for (int i = 0; i < np; ++i) {
      s_inf[i] = renyi_entropy(
          sweep.points[i].spectra[partition_index].eigenvalues,
          std::numeric_limits<double>::infinity());
      log_top[i] = -s_inf[i];  // S_inf = -log x_1
    }
    const std::vector<double> d_inf = grid_derivative(sweep.grid, s_inf);
    const std::vector<double> d_top = grid_derivative(sweep.grid, log_top);
    for (int i = 0; i < np; ++i) {
      if (std::abs(d_inf[i]) > zero_tol && std::abs(d_top[i]) > zero_tol &&
          sign_with_tol(d_inf[i], zero_tol) != -sign_with_tol(d_top[i], zero_tol))
        throw Error(ErrorKind::Numerical,
                    "infinite-order column disagrees with the top-eigenvalue "
                    "slope at p = " + format_p(sweep.grid[i]));
      diag.signs[i][na] = sign_with_tol(d_inf[i], zero_tol);
    }
  }

  diag.verdicts.resize(np);
  for (int i = 0; i < np; ++i) {
    bool plus = false, minus = false;
    for (int k = 0; k < ncol; ++k) {
      plus = plus || diag.signs[i][k] > 0;
      minus = minus || diag.signs[i][k] < 0;
    }
    diag.verdicts[i] = plus && minus ? Verdict::NonConvertible
                       : plus        ? Verdict::ConvertibleUp
                       : minus       ? Verdict::ConvertibleDown
                                     : Verdict::Indeterminate;
  }
  return diag;
}

void flag_critical_adjacent(SignDiagram& diagram, const std::vector<double>& xi,
                            double factor) {
  const int np = static_cast<int>(diagram.parameters.size());
  if (static_cast<int>(xi.size()) != np)
    throw Error(ErrorKind::Shape,
                "correlation-length series does not match the parameter grid");
  std::vector<double> finite;
  for (double x : xi)
    if (std::isfinite(x) && x > 0.0) finite.push_back(x);
  if (finite.size() < 3) return;
  std::sort(finite.begin(), finite.end());
  const double median = finite[finite.size() / 2];
  if (median <= 0.0) return;
  for (int i = 0; i < np; ++i) {
    if (!std::isfinite(xi[i]) || xi[i] <= factor * median) continue;
    const bool peak = (i == 0 || !(xi[i - 1] > xi[i])) &&
                      (i == np - 1 || !(xi[i + 1] > xi[i]));
    if (!peak) continue;
    for (int j = std::max(0, i - 1); j <= std::min(np - 1, i + 1); ++j)
      diagram.critical_adjacent[j] = true;
  }
}

double string_order(const mps::Mps& state, StringKind kind) {
  const int n = state.sites();
  Eigen::MatrixXcd end, interior;
  int d = 0;
  switch (kind) {
    case StringKind::ClusterZ:
      d = 2;
      end = models::pauli_y();
      interior = models::pauli_z();
      break;
    case StringKind::LambdaDx:
      d = 3;
      end = models::spin1_x();
      interior = models::spin1_exp_pi_x();
      break;
    case StringKind::LambdaDz:
      d = 3;
      end = models::spin1_z();
      interior = models::spin1_exp_pi_z();
      break;
  }
  if (state.d != d)
    throw Error(ErrorKind::Shape,
                "string order family expects physical dimension " +
                    std::to_string(d) + ", state has " +
                    std::to_string(state.d));
  std::vector<std::pair<int, Eigen::MatrixXcd>> ops;
  ops.reserve(n);
  ops.emplace_back(1, end);
  for (int j = 2; j < n; ++j) ops.emplace_back(j, interior);
  ops.emplace_back(n, end);
  const double sign = (n - 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * real_checked(mps::string_expectation(state, ops), 1e-8,
                             "string order");
}

CorrelationFit correlation_length(const mps::Mps& state,
                                  const Eigen::MatrixXcd& op_a,
                                  const Eigen::MatrixXcd& op_b, int anchor,
                                  int max_offset, int stride) {
  const int n = state.sites();
  if (max_offset < 1 || stride < 1)
    throw Error(ErrorKind::Config, "correlation window is empty");
  if (4 * anchor < n || 4 * (anchor + max_offset) > 3 * n)
    throw Error(ErrorKind::Config,
                "correlation window must stay in the central half of the chain");
  const double a_mean = mps::local_expectation(state, op_a, anchor);
  std::vector<double> xs, ys;
  for (int k = stride; k <= max_offset; k += stride) {
    const std::vector<std::pair<int, Eigen::MatrixXcd>> ops = {
        {anchor, op_a}, {anchor + k, op_b}};
    const double ab =
        real_checked(mps::string_expectation(state, ops), 1e-8, "correlator");
    const double b_mean = mps::local_expectation(state, op_b, anchor + k);
    const double c = ab - a_mean * b_mean;
    if (std::abs(c) > 1e-12) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(std::abs(c)));
    }
  }
  if (xs.size() < 4)
    throw Error(ErrorKind::Numerical,
                "fewer than 4 usable correlation points; nothing to fit");
  const LineFit f = fit_line(xs, ys);
  if (f.slope >= 0.0)
    throw Error(ErrorKind::Numerical,
                "correlations do not decay over the window");
  CorrelationFit fit;
  fit.xi = -1.0 / f.slope;
  fit.r_squared = f.r_squared;
  fit.points_used = static_cast<int>(xs.size());
  return fit;
}

EdgeProfile edge_profile(const mps::Mps& state, const Eigen::MatrixXcd& op) {
  const int n = state.sites();
  if (n < 12)
    throw Error(ErrorKind::Config,
                "edge profile needs at least 12 sites to separate edge and bulk");
  EdgeProfile prof;
  prof.values = mps::site_expectations(state, op);
  double edge = 0.0, center = 0.0;
  for (int i = 0; i < 5; ++i) {
    edge += std::abs(prof.values[i]) + std::abs(prof.values[n - 1 - i]);
    center += std::abs(prof.values[(n - 5) / 2 + i]);
  }
  prof.localization = edge / 10.0 - center / 5.0;
  return prof;
}

CentralChargeFit central_charge_fit_points(int n_sites,
                                           const std::vector<int>& cuts,
                                           const std::vector<double>& entropies) {
  if (cuts.size() != entropies.size())
    throw Error(ErrorKind::Shape, "one entropy per cut required");
  if (cuts.size() < 4)
    throw Error(ErrorKind::Config, "central-charge fit needs at least 4 cuts");
  int lo = n_sites, hi = 0;
  for (int c : cuts) {
    if (8 * c < n_sites || 8 * c > 7 * n_sites)
      throw Error(ErrorKind::Config,
                  "central-charge cuts must lie within [N/8, 7N/8]");
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (2 * (hi - lo) < n_sites)
    throw Error(ErrorKind::Config,
                "central-charge cuts must span at least half the chain");
  std::vector<double> xs(cuts.size());
  for (std::size_t i = 0; i < cuts.size(); ++i)
    xs[i] = std::log((2.0 * n_sites / M_PI) * std::sin(M_PI * cuts[i] / n_sites));
  const LineFit f = fit_line(xs, entropies);
  CentralChargeFit fit;
  fit.c = 6.0 * f.slope;
  fit.intercept = f.intercept;
  fit.r_squared = f.r_squared;
  fit.poor_fit = f.r_squared < 0.99;
  return fit;
}

CentralChargeFit central_charge_fit(const mps::Mps& state,
                                    const std::vector<int>& cuts) {
  std::vector<double> ys;
  ys.reserve(cuts.size());
  for (int c : cuts)
    ys.push_back(
        renyi_entropy(mps::boundary_cut_spectrum(state, c).eigenvalues, 1.0));
  return central_charge_fit_points(state.sites(), cuts, ys);
}

}  // namespace topoconv::analysis
