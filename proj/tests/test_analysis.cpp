#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"
#include "topoconv/analysis.hpp"
#include "topoconv/dmrg.hpp"
#include "topoconv/exact.hpp"

using namespace topoconv;
using analysis::AlphaGrid;
using analysis::Verdict;
using models::Family;
using models::ModelSpec;
using models::Perturbation;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

mps::RdmSpectrum spectrum(std::vector<double> xs) {
  mps::RdmSpectrum s;
  s.eigenvalues = std::move(xs);
  return s;
}

ModelSpec cluster(int n, double g, double eps = 0.0, int sign = 1) {
  ModelSpec s;
  s.family = Family::ClusterIsing;
  s.sites = n;
  s.g = g;
  if (eps != 0.0) {
    s.pert = Perturbation::ClusterEdge;
    s.pert_eps = eps;
    s.pert_sign = sign;
  }
  return s;
}

mps::Mps ed_ground_mps(const ModelSpec& spec) {
  exact::GroundState gs = exact::ed_ground(spec);
  Eigen::VectorXcd v(gs.amplitudes.size());
  for (long i = 0; i < v.size(); ++i) v[i] = gs.amplitudes[i];
  return mps::from_statevector(v, spec.sites, spec.local_dim());
}

// Sweep of covariance-oracle block spectra for the quadratic-edge cluster
// chain; mirrors what the runner assembles from DMRG states.
analysis::SweepResult oracle_sweep(int n, const std::vector<double>& grid,
                                   int first, int count) {
  analysis::SweepResult sweep;
  sweep.parameter_name = "g";
  sweep.grid = grid;
  for (double g : grid) {
    exact::FreeFermionGround ff =
        exact::free_fermion_ground(exact::cluster_majorana(n, g, 1e-3, 1));
    analysis::SweepPoint pt;
    pt.p = g;
    pt.energy = ff.energy;
    pt.converged = true;
    mps::RdmSpectrum spec;
    spec.eigenvalues = exact::covariance_block_spectrum(ff.gamma, first, count);
    pt.spectra.push_back(spec);
    sweep.points.push_back(pt);
  }
  return sweep;
}

std::vector<double> grid_range(double lo, int count, double step) {
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + step * i;
  return g;
}

}  // namespace

TEST_CASE("renyi entropy on closed-form spectra") {
  for (double a : {0.5, 1.0, 2.0, kInf}) {
    CHECK(analysis::renyi_entropy({1.0}, a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(analysis::renyi_entropy({0.5, 0.5}, a) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  const std::vector<double> p = {0.75, 0.25};
  CHECK(analysis::renyi_entropy(p, kInf) == doctest::Approx(-std::log(0.75)));
  CHECK(analysis::renyi_entropy(p, 2.0) == doctest::Approx(-std::log(0.625)));
  CHECK(analysis::renyi_entropy(p, 1.0) ==
        doctest::Approx(-(0.75 * std::log(0.75) + 0.25 * std::log(0.25))));
  CHECK(analysis::renyi_entropy(p, 0.5) ==
        doctest::Approx(2.0 * std::log(std::sqrt(0.75) + std::sqrt(0.25))));

  // Order of eigenvalues and unresolved tail weight must not matter.
  CHECK(analysis::renyi_entropy({0.25, 0.75}, 0.5) ==
        doctest::Approx(analysis::renyi_entropy(p, 0.5)).epsilon(1e-14));
  CHECK(analysis::renyi_entropy({0.5, 0.5, 1e-20, 0.0}, 3.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK(analysis::renyi_entropy(spectrum({0.5, 0.5}), 2.0) ==
        doctest::Approx(std::log(2.0)));
}

TEST_CASE("renyi entropy is continuous through the von Neumann point") {
  const std::vector<double> p = {0.6, 0.3, 0.1};
  const double s1 = analysis::renyi_entropy(p, 1.0);
  CHECK(analysis::renyi_entropy(p, 1.0 + 5e-10) == doctest::Approx(s1).epsilon(1e-6));
  CHECK(analysis::renyi_entropy(p, 1.0 - 5e-10) == doctest::Approx(s1).epsilon(1e-6));
}

TEST_CASE("renyi entropy rejects bad orders and empty spectra") {
  CHECK_THROWS_AS(analysis::renyi_entropy({0.5, 0.5}, 0.0), Error);
  CHECK_THROWS_AS(analysis::renyi_entropy({0.5, 0.5}, -1.0), Error);
  CHECK_THROWS_AS(analysis::renyi_entropy({0.5, 0.5}, std::nan("")), Error);
  CHECK_THROWS_AS(analysis::renyi_entropy(std::vector<double>{}, 2.0), Error);
  CHECK_THROWS_AS(analysis::renyi_entropy({1e-16, 1e-17}, 2.0), Error);
}

TEST_CASE("renyi entropy is non-increasing in alpha") {
  const std::vector<double> p = {0.4, 0.25, 0.2, 0.1, 0.05};
  const AlphaGrid grid = AlphaGrid::standard();
  double prev = analysis::renyi_entropy(p, grid.values.front());
  for (std::size_t k = 1; k < grid.values.size(); ++k) {
    const double s = analysis::renyi_entropy(p, grid.values[k]);
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
  CHECK(analysis::renyi_entropy(p, kInf) <= prev + 1e-12);
}

TEST_CASE("standard alpha grid is log-spaced with exact anchor points") {
  const AlphaGrid g = AlphaGrid::standard();
  REQUIRE(g.values.size() == 40);
  CHECK(g.include_infinity);
  CHECK(g.values.front() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(g.values[13] == 1.0);  // the von Neumann column lands exactly
  CHECK(g.values.back() == doctest::Approx(100.0).epsilon(1e-15));
  for (std::size_t i = 1; i < g.values.size(); ++i)
    CHECK(g.values[i] > g.values[i - 1]);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("alpha grid validation") {
  AlphaGrid g;
  CHECK_THROWS_AS(g.validate(), Error);  // empty
  g.values = {0.5, 0.5};
  CHECK_THROWS_AS(g.validate(), Error);  // not strictly ascending
  g.values = {-1.0, 2.0};
  CHECK_THROWS_AS(g.validate(), Error);  // nonpositive
  g.values = {0.1, kInf};
  CHECK_THROWS_AS(g.validate(), Error);  // infinity belongs to the flag
}

TEST_CASE("entanglement spectrum drops unresolved weight and sorts ascending") {
  const std::vector<double> es =
      analysis::entanglement_spectrum(spectrum({0.2, 0.5, 0.3, 1e-16}));
  REQUIRE(es.size() == 3);
  CHECK(es[0] == doctest::Approx(-std::log(0.5)));
  CHECK(es[1] == doctest::Approx(-std::log(0.3)));
  CHECK(es[2] == doctest::Approx(-std::log(0.2)));
}

TEST_CASE("degeneracy report pairs levels within tolerance") {
  {
    const std::vector<double> es = {0.91, 0.91, 2.4, 2.4 + 3e-5};
    analysis::DegeneracyReport rep = analysis::degeneracy_report(es);
    CHECK(rep.paired);
    CHECK(rep.levels_considered == 4);
    CHECK(rep.max_gap_within_pairs == doctest::Approx(3e-5));
  }
  {
    // Second pair split beyond tolerance.
    analysis::DegeneracyReport rep =
        analysis::degeneracy_report({0.91, 0.91, 2.4, 2.4 + 3e-4});
    CHECK_FALSE(rep.paired);
  }
  {
    // Odd level count cannot pair.
    analysis::DegeneracyReport rep = analysis::degeneracy_report({0.7, 0.7, 1.4});
    CHECK_FALSE(rep.paired);
    CHECK(rep.levels_considered == 3);
  }
  {
    // Levels past the x > 1e-8 resolution cutoff do not participate.
    analysis::DegeneracyReport rep = analysis::degeneracy_report({1.0, 1.0, 18.5, 19.7});
    CHECK(rep.paired);
    CHECK(rep.levels_considered == 2);
  }
  CHECK_FALSE(analysis::degeneracy_report({}).paired);
}

TEST_CASE("sign diagram on synthetic two-level sweeps") {
  AlphaGrid grid;
  grid.values = {0.1, 1.0, 2.0};

  analysis::SweepResult sweep;
  sweep.parameter_name = "g";
  sweep.grid = {0.0, 1.0, 2.0};
  for (double a : {0.6, 0.7, 0.8}) {
    analysis::SweepPoint pt;
    pt.p = sweep.grid[sweep.points.size()];
    pt.converged = true;
    pt.spectra.push_back(spectrum({a, 1.0 - a}));
    sweep.points.push_back(pt);
  }

  analysis::SignDiagram diag = analysis::derivative_sign_diagram(sweep, 0, grid);
  REQUIRE(diag.parameters.size() == 3);
  REQUIRE(diag.alphas.size() == 3);
  CHECK(diag.has_infinity);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k <= 3; ++k) CHECK(diag.signs[i][k] == -1);
    CHECK(diag.verdicts[i] == Verdict::ConvertibleDown);
    CHECK_FALSE(diag.critical_adjacent[i]);
  }
}

TEST_CASE("sign diagram detects opposite slopes across orders") {
  AlphaGrid grid;
  grid.values = {0.1, 1.0, 2.0};

  // Top eigenvalue sharpens while the tail spreads: S_inf falls, S_0.1 rises.
  analysis::SweepResult sweep;
  sweep.parameter_name = "g";
  sweep.grid = {0.0, 1.0, 2.0};
  const std::vector<std::vector<double>> spectra = {
      {0.6, 0.39, 0.01}, {0.65, 0.30, 0.05}, {0.7, 0.21, 0.09}};
  for (std::size_t i = 0; i < 3; ++i) {
    analysis::SweepPoint pt;
    pt.p = sweep.grid[i];
    pt.converged = true;
    pt.spectra.push_back(spectrum(spectra[i]));
    sweep.points.push_back(pt);
  }

  analysis::SignDiagram diag = analysis::derivative_sign_diagram(sweep, 0, grid);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(diag.signs[i][0] == +1);  // alpha = 0.1 grows with the tail
    CHECK(diag.signs[i][3] == -1);  // infinity column follows the top level
    CHECK(diag.verdicts[i] == Verdict::NonConvertible);
  }
}

TEST_CASE("sign diagram maps flat entropies to indeterminate") {
  AlphaGrid grid;
  grid.values = {0.5, 2.0};

  analysis::SweepResult sweep;
  sweep.parameter_name = "D";
  sweep.grid = {0.0, 0.5, 1.0};
  for (int i = 0; i < 3; ++i) {
    analysis::SweepPoint pt;
    pt.p = sweep.grid[i];
    pt.converged = true;
    // Slopes of ~1e-9 in the eigenvalues sit far below zero_tol.
    pt.spectra.push_back(spectrum({0.6 + 1e-9 * i, 0.4 - 1e-9 * i}));
    sweep.points.push_back(pt);
  }

  analysis::SignDiagram diag = analysis::derivative_sign_diagram(sweep, 0, grid);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(diag.verdicts[i] == Verdict::Indeterminate);
    for (std::size_t k = 0; k <= 2; ++k) CHECK(diag.signs[i][k] == 0);
  }
}

TEST_CASE("sign diagram input validation") {
  AlphaGrid grid;
  grid.values = {0.5, 2.0};

  analysis::SweepResult sweep;
  sweep.parameter_name = "g";
  sweep.grid = {0.0, 1.0};
  for (int i = 0; i < 2; ++i) {
    analysis::SweepPoint pt;
    pt.p = sweep.grid[i];
    pt.spectra.push_back(spectrum({0.6, 0.4}));
    sweep.points.push_back(pt);
  }
  // Two points cannot support central differences.
  CHECK_THROWS_AS(analysis::derivative_sign_diagram(sweep, 0, grid), Error);

  analysis::SweepPoint pt;
  pt.p = 2.0;
  pt.spectra.push_back(spectrum({0.6, 0.4}));
  sweep.grid.push_back(2.0);
  sweep.points.push_back(pt);
  CHECK_THROWS_AS(analysis::derivative_sign_diagram(sweep, 1, grid), Error);
  CHECK_THROWS_AS(analysis::derivative_sign_diagram(sweep, -1, grid), Error);
  CHECK_THROWS_AS(analysis::derivative_sign_diagram(sweep, 0, grid, 0.0), Error);
  CHECK_NOTHROW(analysis::derivative_sign_diagram(sweep, 0, grid));
}

TEST_CASE("sweep validation rejects malformed input") {
  analysis::SweepResult sweep;
  sweep.grid = {0.0};
  CHECK_THROWS_AS(sweep.validate(), Error);  // grid/points length mismatch

  sweep.points.resize(1);
  CHECK_NOTHROW(sweep.validate());

  sweep.grid = {0.0, 0.0};
  sweep.points.resize(2);
  CHECK_THROWS_AS(sweep.validate(), Error);  // not strictly ascending

  sweep.grid = {0.0, 1.0};
  sweep.points[1].spectra.push_back(spectrum({1.0}));
  CHECK_THROWS_AS(sweep.validate(), Error);  // partition counts differ
}

TEST_CASE("verdict names") {
  CHECK(std::string(analysis::verdict_name(Verdict::ConvertibleUp)) == "ConvertibleUp");
  CHECK(std::string(analysis::verdict_name(Verdict::ConvertibleDown)) ==
        "ConvertibleDown");
  CHECK(std::string(analysis::verdict_name(Verdict::NonConvertible)) ==
        "NonConvertible");
  CHECK(std::string(analysis::verdict_name(Verdict::Indeterminate)) ==
        "Indeterminate");
}

// The covariance oracle pins the verdict windows for the quadratic-edge
// cluster chain; these freeze the physics the production sweeps must show.

TEST_CASE("boundary-triple verdicts against the covariance oracle") {
  // 3-site boundary block: non-convertible throughout the cluster phase.
  analysis::SweepResult sweep =
      oracle_sweep(100, grid_range(0.15, 10, 0.1), 1, 3);
  analysis::SignDiagram diag =
      analysis::derivative_sign_diagram(sweep, 0, AlphaGrid::standard());
  for (int i = 0; i <= 7; ++i)  // g = 0.15 .. 0.85
    CHECK(diag.verdicts[i] == Verdict::NonConvertible);
  CHECK(diag.verdicts[8] == Verdict::ConvertibleDown);  // g = 0.95
}

TEST_CASE("symmetric-cut verdicts against the covariance oracle") {
  // Half-chain cut at N = 32: convertible on both sides of the transition.
  analysis::SweepResult sweep =
      oracle_sweep(32, grid_range(0.35, 11, 0.1), 1, 16);
  analysis::SignDiagram diag =
      analysis::derivative_sign_diagram(sweep, 0, AlphaGrid::standard());
  for (int i = 0; i <= 3; ++i)  // g = 0.35 .. 0.65
    CHECK(diag.verdicts[i] == Verdict::ConvertibleUp);
  CHECK(diag.verdicts[4] == Verdict::NonConvertible);  // g = 0.75
  CHECK(diag.verdicts[5] == Verdict::NonConvertible);  // g = 0.85
  for (int i = 6; i <= 9; ++i)  // g = 0.95 .. 1.25
    CHECK(diag.verdicts[i] == Verdict::ConvertibleDown);
}

TEST_CASE("interior-block verdicts against the covariance oracle") {
  // 10-site interior block (sites 46..55) of N = 100.
  analysis::SweepResult sweep =
      oracle_sweep(100, grid_range(0.15, 14, 0.1), 46, 10);
  analysis::SignDiagram diag =
      analysis::derivative_sign_diagram(sweep, 0, AlphaGrid::standard());
  CHECK(diag.verdicts[0] == Verdict::ConvertibleUp);  // g = 0.15
  CHECK(diag.verdicts[1] == Verdict::ConvertibleUp);  // g = 0.25
  for (int i = 2; i <= 8; ++i)  // g = 0.35 .. 0.95
    CHECK(diag.verdicts[i] == Verdict::NonConvertible);
  for (int i = 9; i <= 12; ++i)  // g = 1.05 .. 1.35
    CHECK(diag.verdicts[i] == Verdict::ConvertibleDown);
}

TEST_CASE("critical-adjacent flags mark correlation-length peaks") {
  analysis::SignDiagram diag;
  diag.parameters = {0, 1, 2, 3, 4, 5, 6};
  diag.critical_adjacent.assign(7, false);

  SUBCASE("isolated peak flags itself and both neighbors") {
    analysis::flag_critical_adjacent(diag, {1, 1, 1, 9, 1, 1, 1});
    const std::vector<bool> want = {false, false, true, true, true, false, false};
    for (int i = 0; i < 7; ++i) CHECK(diag.critical_adjacent[i] == want[i]);
  }
  SUBCASE("smooth profile below the factor threshold flags nothing") {
    analysis::flag_critical_adjacent(diag, {1, 1.2, 1.5, 2, 2.6, 3.4, 4.4});
    for (int i = 0; i < 7; ++i) CHECK_FALSE(diag.critical_adjacent[i]);
  }
  SUBCASE("fewer than three finite lengths flags nothing") {
    analysis::flag_critical_adjacent(
        diag, {kInf, -1, 2, std::nan(""), 9, 0, -3});
    for (int i = 0; i < 7; ++i) CHECK_FALSE(diag.critical_adjacent[i]);
  }
  SUBCASE("series length must match the grid") {
    CHECK_THROWS_AS(analysis::flag_critical_adjacent(diag, {1, 2, 3}), Error);
  }
}

TEST_CASE("cluster string order agrees with dense ED and the covariance oracle") {
  // Operator identity against a hand-built dense product.
  const ModelSpec bare = cluster(8, 0.4);
  exact::GroundState gs = exact::ed_ground(bare);
  std::vector<std::pair<int, Eigen::MatrixXcd>> factors;
  factors.emplace_back(1, models::pauli_y());
  for (int j = 2; j <= 7; ++j) factors.emplace_back(j, models::pauli_z());
  factors.emplace_back(8, models::pauli_y());
  const cxd dense = exact::ed_expectation(gs.amplitudes, 8, 2, factors);
  const mps::Mps m = ed_ground_mps(bare);
  CHECK(analysis::string_order(m, analysis::StringKind::ClusterZ) ==
        doctest::Approx(dense.real()).epsilon(1e-10));

  // Full-stack consistency on a nondegenerate perturbed chain.
  const ModelSpec pert = cluster(8, 0.4, 0.1, -1);
  exact::FreeFermionGround ff =
      exact::free_fermion_ground(exact::cluster_majorana(8, 0.4, 0.1, -1));
  CHECK(analysis::string_order(ed_ground_mps(pert), analysis::StringKind::ClusterZ) ==
        doctest::Approx(exact::string_order_z_free(ff.gamma)).epsilon(1e-9));
}

TEST_CASE("spin-1 string orders agree with dense ED") {
  ModelSpec s;
  s.family = Family::LambdaD;
  s.sites = 6;
  s.lambda = 1.0;
  s.d_field = 0.3;
  s.pert = Perturbation::SpinOneEdge;
  s.pert_eps = 0.1;
  s.pert_sign = -1;
  exact::GroundState gs = exact::ed_ground(s);
  const mps::Mps m = ed_ground_mps(s);

  for (auto kind : {analysis::StringKind::LambdaDz, analysis::StringKind::LambdaDx}) {
    const Eigen::MatrixXcd end = kind == analysis::StringKind::LambdaDz
                                     ? models::spin1_z()
                                     : models::spin1_x();
    const Eigen::MatrixXcd interior = kind == analysis::StringKind::LambdaDz
                                          ? models::spin1_exp_pi_z()
                                          : models::spin1_exp_pi_x();
    std::vector<std::pair<int, Eigen::MatrixXcd>> factors;
    factors.emplace_back(1, end);
    for (int j = 2; j <= 5; ++j) factors.emplace_back(j, interior);
    factors.emplace_back(6, end);
    const cxd dense = exact::ed_expectation(gs.amplitudes, 6, 3, factors);
    CHECK(analysis::string_order(m, kind) ==
          doctest::Approx(dense.real()).epsilon(1e-10));
  }
}

TEST_CASE("string order rejects a mismatched operator family") {
  const mps::Mps m = ed_ground_mps(cluster(6, 0.4));
  CHECK_THROWS_AS(analysis::string_order(m, analysis::StringKind::LambdaDz), Error);
}

TEST_CASE("correlation length from an optimized state matches the oracle") {
  const ModelSpec spec = cluster(32, 0.4, 1e-3, 1);
  dmrg::DmrgConfig cfg;
  cfg.chi_max = 48;
  cfg.energy_tol = 1e-11;
  const dmrg::GroundStateResult r = dmrg::ground_state(spec, cfg);
  REQUIRE(r.converged);

  exact::FreeFermionGround ff =
      exact::free_fermion_ground(exact::cluster_majorana(32, 0.4, 1e-3, 1));
  const Eigen::MatrixXcd x = models::pauli_x();
  const int anchor = 8;

  // The x-correlator is nonzero only at multiples of three sites; check the
  // surviving points against the covariance values, then the fitted length.
  std::vector<double> xs, ys;
  for (int k = 3; k <= 15; k += 3) {
    const double c_ff = exact::xx_correlation(ff.gamma, anchor, anchor + k);
    const double c_mps =
        real(mps::string_expectation(
            r.state, {{anchor, x}, {anchor + k, x}})) -
        mps::local_expectation(r.state, x, anchor) *
            mps::local_expectation(r.state, x, anchor + k);
    CHECK(c_mps == doctest::Approx(c_ff).epsilon(1e-3));
    xs.push_back(k);
    ys.push_back(std::log(std::abs(c_ff)));
  }
  // Reference slope from the oracle values.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  const double n = static_cast<double>(xs.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  REQUIRE(slope < 0.0);

  const analysis::CorrelationFit fit =
      analysis::correlation_length(r.state, x, x, anchor, 15, 3);
  CHECK(fit.points_used >= 4);
  CHECK(fit.xi > 0.0);
  CHECK(fit.xi == doctest::Approx(-1.0 / slope).epsilon(0.05));
  CHECK(fit.r_squared > 0.8);
  CHECK(fit.r_squared <= 1.0 + 1e-12);

  // Window validation.
  CHECK_THROWS_AS(analysis::correlation_length(r.state, x, x, 2, 8), Error);
  CHECK_THROWS_AS(analysis::correlation_length(r.state, x, x, anchor, 0), Error);
  CHECK_THROWS_AS(analysis::correlation_length(r.state, x, x, anchor, 17), Error);
  CHECK_THROWS_AS(analysis::correlation_length(r.state, x, x, anchor, 15, 0), Error);
}

TEST_CASE("correlation length refuses a product state") {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << 12);
  v[0] = 1.0;
  const mps::Mps m = mps::from_statevector(v, 12, 2);
  CHECK_THROWS_AS(
      analysis::correlation_length(m, models::pauli_x(), models::pauli_x(), 3, 6),
      Error);
}

TEST_CASE("edge profile separates edge from bulk weight") {
  {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << 12);
    v[0] = 1.0;
    const mps::Mps m = mps::from_statevector(v, 12, 2);
    const analysis::EdgeProfile prof = analysis::edge_profile(m, models::pauli_z());
    REQUIRE(prof.values.size() == 12);
    for (double x : prof.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prof.localization == doctest::Approx(0.0).epsilon(1e-12));
  }
  {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(1 << 4);
    v[0] = 1.0;
    const mps::Mps m = mps::from_statevector(v, 4, 2);
    CHECK_THROWS_AS(analysis::edge_profile(m, models::pauli_z()), Error);
  }
}

TEST_CASE("sector ground state localizes its magnetization at the edges") {
  ModelSpec s;
  s.family = Family::LambdaD;
  s.sites = 12;
  s.lambda = 1.0;
  s.d_field = 0.5;
  s.sector_active = true;
  s.sector_m = 1.0;
  s.sector_mu = 10.0;
  dmrg::DmrgConfig cfg;
  cfg.chi_max = 24;
  const dmrg::GroundStateResult r = dmrg::ground_state_in_sector(s, cfg);
  REQUIRE(r.converged);

  const analysis::EdgeProfile prof =
      analysis::edge_profile(r.state, models::spin1_z());
  double total = 0.0;
  for (double x : prof.values) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(prof.localization > 0.0);
}

TEST_CASE("central charge fit flags the critical point correctly") {
  std::vector<int> cuts;
  for (int c = 15; c <= 85; ++c) cuts.push_back(c);

  {
    exact::FreeFermionGround ff =
        exact::free_fermion_ground(exact::cluster_majorana(100, 1.0, 1e-3, 1));
    std::vector<double> ent;
    for (int c : cuts)
      ent.push_back(exact::covariance_block_renyi(ff.gamma, 1, c, 1.0));
    const analysis::CentralChargeFit fit =
        analysis::central_charge_fit_points(100, cuts, ent);
    CHECK(fit.c == doctest::Approx(1.4908).epsilon(2e-3));
    CHECK(fit.r_squared == doctest::Approx(0.9625).epsilon(1e-2));
    CHECK(fit.poor_fit);  // mod-3 oscillations hold r^2 below the flag line
  }
  {
    exact::FreeFermionGround ff =
        exact::free_fermion_ground(exact::cluster_majorana(100, 0.2, 1e-3, 1));
    std::vector<double> ent;
    for (int c : cuts)
      ent.push_back(exact::covariance_block_renyi(ff.gamma, 1, c, 1.0));
    const analysis::CentralChargeFit fit =
        analysis::central_charge_fit_points(100, cuts, ent);
    CHECK(std::abs(fit.c) < 0.05);  // gapped: no conformal growth
    CHECK(fit.poor_fit);
    CHECK(fit.r_squared < 0.5);
  }
}

TEST_CASE("central charge fit input validation") {
  CHECK_THROWS_AS(
      analysis::central_charge_fit_points(100, {20, 30, 40}, {1., 1., 1.}), Error);
  CHECK_THROWS_AS(analysis::central_charge_fit_points(
                      100, {20, 30, 40, 50}, {1., 1., 1.}), Error);
  CHECK_THROWS_AS(analysis::central_charge_fit_points(
                      100, {10, 30, 50, 70}, {1., 1., 1., 1.}), Error);
  CHECK_THROWS_AS(analysis::central_charge_fit_points(
                      100, {40, 42, 44, 46}, {1., 1., 1., 1.}), Error);
}

TEST_CASE("central charge fit accepts a small optimized state") {
  const mps::Mps m = ed_ground_mps(cluster(12, 1.0));
  const analysis::CentralChargeFit fit =
      analysis::central_charge_fit(m, {2, 4, 6, 8, 10});
  CHECK(std::isfinite(fit.c));
  CHECK(fit.r_squared <= 1.0 + 1e-12);
}
