#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "topoconv/cli.hpp"
#include "topoconv/exact.hpp"

namespace topoconv::cli {

namespace {

namespace fs = std::filesystem;

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 16);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

const char* json_bool(bool b) { return b ? "true" : "false"; }

// Everything one grid point produces; assembled into files by the single
// writer after all workers have joined.
struct PointOutcome {
  PointRecord rec;
  std::vector<mps::RdmSpectrum> spectra;
  double string_z = std::numeric_limits<double>::quiet_NaN();
  double string_x = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  double xi_r_squared = std::numeric_limits<double>::quiet_NaN();
  int xi_points = 0;
  std::vector<double> profile;
  double edge_localization = std::numeric_limits<double>::quiet_NaN();
  analysis::CentralChargeFit charge;
  bool has_charge = false;
};

std::string cache_base(const RunConfig& cfg, const std::string& key) {
  return cfg.output_dir + "/cache/" + key;
}

void save_cache(const std::string& base, const mps::Mps& state,
                const PointRecord& rec) {
  mps::save(state, base + ".mps.tmp");
  fs::rename(base + ".mps.tmp", base + ".mps");
  std::ostringstream j;
  j << "{\n";
  j << "  \"p\": " << format_float(rec.p) << ",\n";
  j << "  \"energy\": " << format_float(rec.energy) << ",\n";
  j << "  \"converged\": " << json_bool(rec.converged) << ",\n";
  j << "  \"entropy_stable\": " << json_bool(rec.entropy_stable) << ",\n";
  j << "  \"sweeps\": " << rec.sweeps << ",\n";
  j << "  \"max_discarded_weight\": " << format_float(rec.max_discarded_weight)
    << ",\n";
  j << "  \"warm_started\": " << json_bool(rec.warm_started) << "\n";
  j << "}\n";
  // The sidecar is written last: its presence marks the state as complete.
  write_text_file(base + ".json", j.str());
}

bool load_cache(const std::string& base, mps::Mps& state, PointRecord& rec) {
  if (!fs::exists(base + ".json") || !fs::exists(base + ".mps")) return false;
  try {
    state = mps::load(base + ".mps");
    const nlohmann::json j = nlohmann::json::parse(read_text_file(base + ".json"));
    rec.energy = j.at("energy").get<double>();
    rec.converged = j.at("converged").get<bool>();
    rec.entropy_stable = j.at("entropy_stable").get<bool>();
    rec.sweeps = j.at("sweeps").get<int>();
    rec.max_discarded_weight = j.at("max_discarded_weight").get<double>();
    rec.warm_started = j.at("warm_started").get<bool>();
    rec.from_cache = true;
    return true;
  } catch (const std::exception&) {
    return false;  // torn or stale entry: recompute and overwrite
  }
}

// Family defaults for the sweep observables. The two-level chain correlates
// only at offsets that are multiples of three, hence the stride.
struct ObservablePlan {
  Eigen::MatrixXcd corr_op;
  int stride = 1;
  Eigen::MatrixXcd profile_op;
};

ObservablePlan plan_for(const models::ModelSpec& spec) {
  ObservablePlan plan;
  if (spec.family == models::Family::ClusterIsing) {
    plan.corr_op = models::pauli_x();
    plan.stride = 3;
    plan.profile_op = models::pauli_z();
  } else {
    plan.corr_op = models::spin1_z();
    plan.stride = 1;
    plan.profile_op = models::spin1_z();
  }
  return plan;
}

std::vector<int> charge_cuts(int n) {
  std::vector<int> cuts;
  for (int l = (n + 7) / 8; 8 * l <= 7 * n; l += 3) cuts.push_back(l);
  return cuts;
}

PointRecord solve_state(const RunConfig& cfg, double p,
                        const std::optional<mps::Mps>& warm, mps::Mps& state) {
  PointRecord rec;
  rec.p = p;
  rec.cache_key = point_cache_key(cfg, p);
  const std::string base = cache_base(cfg, rec.cache_key);
  if (load_cache(base, state, rec)) return rec;

  const models::ModelSpec spec = model_at_point(cfg, p);
  dmrg::DmrgConfig dc = cfg.dmrg;
  if (warm) {
    dc.chi_start = dc.chi_max;
    dc.noise_amplitude = 1e-8;
  }
  dmrg::GroundStateResult r;
  if (spec.sector_active)
    r = warm ? dmrg::minimize_in_sector(spec, *warm, dc)
             : dmrg::ground_state_in_sector(spec, dc);
  else
    r = warm ? dmrg::minimize(models::build_mpo(spec), *warm, dc)
             : dmrg::ground_state(spec, dc);
  state = std::move(r.state);
  rec.energy = r.energy;
  rec.converged = r.converged;
  rec.entropy_stable = r.entropy_stable;
  rec.sweeps = static_cast<int>(r.energy_history.size());
  rec.max_discarded_weight = r.max_discarded_weight;
  rec.warm_started = warm.has_value();
  save_cache(base, state, rec);
  return rec;
}

PointOutcome solve_point(const RunConfig& cfg, double p,
                         const std::optional<mps::Mps>& warm, mps::Mps& state) {
  PointOutcome out;
  out.rec = solve_state(cfg, p, warm, state);

  for (const mps::PartitionSpec& part : cfg.partitions) {
    if (part.kind == mps::PartitionSpec::Kind::BoundaryCut)
      out.spectra.push_back(mps::boundary_cut_spectrum(state, part.cut_after));
    else
      out.spectra.push_back(
          mps::middle_block_spectrum(state, part.start, part.length));
  }

  const models::ModelSpec spec = model_at_point(cfg, p);
  const ObservablePlan plan = plan_for(spec);
  if (cfg.observables.string_order) {
    if (spec.family == models::Family::ClusterIsing) {
      out.string_z = analysis::string_order(state, analysis::StringKind::ClusterZ);
    } else {
      out.string_z = analysis::string_order(state, analysis::StringKind::LambdaDz);
      out.string_x = analysis::string_order(state, analysis::StringKind::LambdaDx);
    }
  }
  if (cfg.observables.correlation_length) {
    const int n = spec.sites;
    const int anchor = n / 4;
    int max_offset = std::min(10 * plan.stride, 3 * n / 4 - anchor);
    max_offset -= max_offset % plan.stride;
    try {
      const analysis::CorrelationFit fit = analysis::correlation_length(
          state, plan.corr_op, plan.corr_op, anchor, max_offset, plan.stride);
      out.xi = fit.xi;
      out.xi_r_squared = fit.r_squared;
      out.xi_points = fit.points_used;
    } catch (const Error&) {
      // flat or noise-dominated correlator at this point: no length to report
    }
  }
  if (cfg.observables.edge_profile) {
    const analysis::EdgeProfile prof = analysis::edge_profile(state, plan.profile_op);
    out.profile = prof.values;
    out.edge_localization = prof.localization;
  }
  if (cfg.observables.central_charge) {
    try {
      out.charge = analysis::central_charge_fit(state, charge_cuts(spec.sites));
      out.has_charge = true;
    } catch (const Error&) {
      out.has_charge = false;
    }
  }
  return out;
}

void write_sign_diagram(const std::string& path,
                        const analysis::SignDiagram& diagram) {
  std::ostringstream csv;
  csv << "p,alpha,sign\n";
  for (std::size_t i = 0; i < diagram.parameters.size(); ++i) {
    for (std::size_t k = 0; k < diagram.alphas.size(); ++k)
      csv << format_float(diagram.parameters[i]) << ","
          << format_float(diagram.alphas[k]) << "," << diagram.signs[i][k] << "\n";
    if (diagram.has_infinity)
      csv << format_float(diagram.parameters[i]) << ",inf,"
          << diagram.signs[i][diagram.alphas.size()] << "\n";
  }
  write_text_file(path, csv.str());
}

void write_verdicts(const std::string& path, const analysis::SignDiagram& diagram) {
  std::ostringstream csv;
  csv << "p,verdict,critical_adjacent\n";
  for (std::size_t i = 0; i < diagram.parameters.size(); ++i)
    csv << format_float(diagram.parameters[i]) << ","
        << analysis::verdict_name(diagram.verdicts[i]) << ","
        << (diagram.critical_adjacent[i] ? 1 : 0) << "\n";
  write_text_file(path, csv.str());
}

}  // namespace

models::ModelSpec model_at_point(const RunConfig& cfg, double p) {
  models::ModelSpec spec = cfg.model;
  if (cfg.sweep.parameter == "g")
    spec.g = p;
  else if (cfg.sweep.parameter == "lambda")
    spec.lambda = p;
  else
    spec.d_field = p;
  return spec;
}

std::string point_cache_key(const RunConfig& cfg, double p) {
  RunConfig pinned = cfg;
  pinned.model = model_at_point(cfg, p);
  std::istringstream in(render_config(pinned));
  std::string line, section, keep;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') section = line;
    if (section == "[model]" || section == "[dmrg]") keep += line + "\n";
  }
  return hash_hex(fnv1a(keep));
}

PointRecord solve_point_cached(const RunConfig& cfg, double p, mps::Mps& state) {
  ensure_directory(cfg.output_dir);
  ensure_directory(cfg.output_dir + "/cache");
  return solve_state(cfg, p, std::nullopt, state);
}

RunArtifacts run(const RunConfig& cfg) {
  cfg.validate();
  RunArtifacts art;
  art.grid = cfg.sweep.grid();
  ensure_directory(cfg.output_dir);
  ensure_directory(cfg.output_dir + "/cache");

  const std::size_t npts = art.grid.size();
  std::vector<PointOutcome> out(npts);
  const int workers = std::min<int>(cfg.workers, static_cast<int>(npts));

  if (workers <= 1) {
    // Sequential: warm-start each point from its predecessor's state.
    std::optional<mps::Mps> prev;
    for (std::size_t i = 0; i < npts; ++i) {
      mps::Mps cur;
      out[i] = solve_point(cfg, art.grid[i], prev, cur);
      prev = std::move(cur);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex done_mutex;
    std::vector<char> done(npts, 0);
    std::vector<std::string> done_base(npts);
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= npts) return;
        // Warm-start from the nearest lower neighbor that has finished.
        std::optional<mps::Mps> warm;
        {
          std::lock_guard<std::mutex> lock(done_mutex);
          for (std::size_t j = i; j-- > 0;)
            if (done[j]) {
              try {
                warm = mps::load(done_base[j] + ".mps");
              } catch (const std::exception&) {
              }
              break;
            }
        }
        mps::Mps state;
        out[i] = solve_point(cfg, art.grid[i], warm, state);
        {
          std::lock_guard<std::mutex> lock(done_mutex);
          done[i] = 1;
          done_base[i] = cache_base(cfg, out[i].rec.cache_key);
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // ---- single-writer merge, ascending p ----
  for (std::size_t j = 0; j < cfg.partitions.size(); ++j) {
    analysis::SweepResult sweep;
    sweep.parameter_name = cfg.sweep.parameter;
    sweep.grid = art.grid;
    for (std::size_t i = 0; i < npts; ++i) {
      analysis::SweepPoint pt;
      pt.p = art.grid[i];
      pt.energy = out[i].rec.energy;
      pt.converged = out[i].rec.converged;
      pt.spectra.push_back(out[i].spectra[j]);
      sweep.points.push_back(std::move(pt));
    }
    sweep.validate();
    analysis::SignDiagram diagram =
        analysis::derivative_sign_diagram(sweep, 0, cfg.alpha_grid);
    if (cfg.observables.correlation_length) {
      std::vector<double> xi(npts);
      for (std::size_t i = 0; i < npts; ++i) xi[i] = out[i].xi;
      analysis::flag_critical_adjacent(diagram, xi);
    }
    art.sweeps.push_back(std::move(sweep));
    art.diagrams.push_back(std::move(diagram));
  }
  for (std::size_t i = 0; i < npts; ++i) {
    art.points.push_back(out[i].rec);
    if (!out[i].rec.converged) art.any_unconverged = true;
  }

  for (std::size_t j = 0; j < cfg.partitions.size(); ++j) {
    const std::string dir = cfg.output_dir + "/" + cfg.partitions[j].label();
    ensure_directory(dir);
    write_sign_diagram(dir + "/sign_diagram.csv", art.diagrams[j]);
    write_verdicts(dir + "/verdicts.csv", art.diagrams[j]);
    if (cfg.observables.degeneracy) {
      std::ostringstream csv;
      csv << "p,paired,levels,max_gap\n";
      for (std::size_t i = 0; i < npts; ++i) {
        const analysis::DegeneracyReport rep = analysis::degeneracy_report(
            analysis::entanglement_spectrum(out[i].spectra[j]));
        csv << format_float(art.grid[i]) << "," << (rep.paired ? 1 : 0) << ","
            << rep.levels_considered << "," << format_float(rep.max_gap_within_pairs)
            << "\n";
      }
      write_text_file(dir + "/degeneracy.csv", csv.str());
    }
  }

  {
    std::ostringstream csv;
    csv << "p,partition,alpha,entropy\n";
    for (std::size_t i = 0; i < npts; ++i)
      for (std::size_t j = 0; j < cfg.partitions.size(); ++j) {
        for (double alpha : cfg.alpha_grid.values)
          csv << format_float(art.grid[i]) << "," << cfg.partitions[j].label()
              << "," << format_float(alpha) << ","
              << format_float(analysis::renyi_entropy(out[i].spectra[j], alpha))
              << "\n";
        if (cfg.alpha_grid.include_infinity)
          csv << format_float(art.grid[i]) << "," << cfg.partitions[j].label()
              << ",inf,"
              << format_float(analysis::renyi_entropy(
                     out[i].spectra[j], std::numeric_limits<double>::infinity()))
              << "\n";
      }
    write_text_file(cfg.output_dir + "/entropies.csv", csv.str());
  }

  if (cfg.observables.string_order || cfg.observables.correlation_length) {
    std::ostringstream csv;
    csv << "p,name,value\n";
    for (std::size_t i = 0; i < npts; ++i) {
      if (cfg.observables.string_order) {
        csv << format_float(art.grid[i]) << ",string_z,"
            << format_float(out[i].string_z) << "\n";
        if (cfg.model.family == models::Family::LambdaD)
          csv << format_float(art.grid[i]) << ",string_x,"
              << format_float(out[i].string_x) << "\n";
      }
      if (cfg.observables.correlation_length) {
        csv << format_float(art.grid[i]) << ",xi," << format_float(out[i].xi)
            << "\n";
        csv << format_float(art.grid[i]) << ",xi_r_squared,"
            << format_float(out[i].xi_r_squared) << "\n";
      }
    }
    write_text_file(cfg.output_dir + "/observables.csv", csv.str());
  }

  if (cfg.observables.edge_profile) {
    std::ostringstream csv;
    csv << "p,site,value\n";
    for (std::size_t i = 0; i < npts; ++i)
      for (std::size_t s = 0; s < out[i].profile.size(); ++s)
        csv << format_float(art.grid[i]) << "," << (s + 1) << ","
            << format_float(out[i].profile[s]) << "\n";
    write_text_file(cfg.output_dir + "/edge_profile.csv", csv.str());
    std::ostringstream loc;
    loc << "p,localization\n";
    for (std::size_t i = 0; i < npts; ++i)
      loc << format_float(art.grid[i]) << ","
          << format_float(out[i].edge_localization) << "\n";
    write_text_file(cfg.output_dir + "/edge_localization.csv", loc.str());
  }

  if (cfg.observables.central_charge) {
    std::ostringstream csv;
    csv << "p,c,r_squared,poor_fit\n";
    for (std::size_t i = 0; i < npts; ++i) {
      if (out[i].has_charge)
        csv << format_float(art.grid[i]) << "," << format_float(out[i].charge.c)
            << "," << format_float(out[i].charge.r_squared) << ","
            << (out[i].charge.poor_fit ? 1 : 0) << "\n";
      else
        csv << format_float(art.grid[i]) << ",nan,nan,1\n";
    }
    write_text_file(cfg.output_dir + "/central_charge.csv", csv.str());
  }

  {
    std::ostringstream j;
    j << "{\n  \"points\": [\n";
    for (std::size_t i = 0; i < npts; ++i) {
      j << "    {\"p\": " << format_float(art.grid[i]) << ", \"partitions\": {";
      for (std::size_t k = 0; k < cfg.partitions.size(); ++k) {
        j << (k ? ", " : "") << "\"" << cfg.partitions[k].label() << "\": [";
        const std::vector<double>& ev = out[i].spectra[k].eigenvalues;
        for (std::size_t v = 0; v < ev.size(); ++v)
          j << (v ? ", " : "") << format_float(ev[v]);
        j << "]";
      }
      j << "}}" << (i + 1 < npts ? "," : "") << "\n";
    }
    j << "  ]\n}\n";
    write_text_file(cfg.output_dir + "/spectra.json", j.str());
  }

  {
    const std::string echo = render_config(cfg);
    std::ostringstream j;
    j << "{\n";
    j << "  \"tool\": \"" << version_string() << "\",\n";
    j << "  \"config_hash\": \"" << hash_hex(fnv1a(echo)) << "\",\n";
    j << "  \"seed\": " << cfg.dmrg.seed << ",\n";
    j << "  \"workers\": " << cfg.workers << ",\n";
    j << "  \"any_unconverged\": " << json_bool(art.any_unconverged) << ",\n";
    j << "  \"points\": [\n";
    for (std::size_t i = 0; i < npts; ++i) {
      const PointRecord& r = art.points[i];
      j << "    {\"p\": " << format_float(r.p) << ", \"cache_key\": \""
        << r.cache_key << "\", \"energy\": " << format_float(r.energy)
        << ", \"converged\": " << json_bool(r.converged)
        << ", \"entropy_stable\": " << json_bool(r.entropy_stable)
        << ", \"sweeps\": " << r.sweeps << ", \"max_discarded_weight\": "
        << format_float(r.max_discarded_weight)
        << ", \"from_cache\": " << json_bool(r.from_cache)
        << ", \"warm_started\": " << json_bool(r.warm_started) << "}"
        << (i + 1 < npts ? "," : "") << "\n";
    }
    j << "  ],\n";
    j << "  \"config\": \"" << json_escape(echo) << "\"\n";
    j << "}\n";
    write_text_file(cfg.output_dir + "/manifest.json", j.str());
  }

  return art;
}

}  // namespace topoconv::cli
