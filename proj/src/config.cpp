#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "topoconv/cli.hpp"

namespace topoconv::cli {

namespace {

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
  throw Error(ErrorKind::Config, origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& origin, int line,
                    const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || std::isnan(x))
    fail_at(origin, line, key + " expects a number, got '" + v + "'");
  return x;
}

long parse_int(const std::string& v, const std::string& origin, int line,
               const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail_at(origin, line, key + " expects an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v, const std::string& origin, int line,
                const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail_at(origin, line, key + " expects true or false, got '" + v + "'");
}

const char* family_name(models::Family f) {
  return f == models::Family::ClusterIsing ? "cluster_ising" : "lambda_d";
}

const char* pert_name(models::Perturbation p) {
  switch (p) {
    case models::Perturbation::None: return "none";
    case models::Perturbation::ClusterEdge: return "cluster_edge";
    case models::Perturbation::ClusterEdgeXZ: return "cluster_edge_xz";
    case models::Perturbation::SpinOneEdge: return "spin_one_edge";
  }
  return "none";
}

}  // namespace

std::vector<double> SweepSpec::grid() const {
  std::vector<double> g;
  const int count = static_cast<int>(std::floor((stop - start) / step + 0.5)) + 1;
  for (int k = 0; k < count; ++k) {
    const double p = start + step * k;
    if (p > stop + 0.5 * step) break;
    g.push_back(p);
  }
  return g;
}

void SweepSpec::validate() const {
  if (parameter != "g" && parameter != "lambda" && parameter != "D")
    throw Error(ErrorKind::Config,
                "sweep parameter must be g, lambda, or D, got '" + parameter + "'");
  if (!(step > 0.0)) throw Error(ErrorKind::Config, "sweep step must be positive");
  if (!(start < stop)) throw Error(ErrorKind::Config, "sweep start must precede stop");
  if (grid().size() < 3)
    throw Error(ErrorKind::Config, "sweep has fewer than 3 grid points");
}

void RunConfig::validate() const {
  sweep.validate();
  // The template must be a valid model once the sweep pins its parameter.
  const bool spin_one = model.family == models::Family::LambdaD;
  if (sweep.parameter == "g" && spin_one)
    throw Error(ErrorKind::Config, "sweep parameter g requires the two-level chain");
  if (sweep.parameter != "g" && !spin_one)
    throw Error(ErrorKind::Config,
                "sweep parameter " + sweep.parameter + " requires the three-level chain");
  models::ModelSpec probe = model;
  if (sweep.parameter == "g") probe.g = sweep.start;
  if (sweep.parameter == "lambda") probe.lambda = sweep.start;
  if (sweep.parameter == "D") probe.d_field = sweep.start;
  probe.validate();

  if (partitions.empty())
    throw Error(ErrorKind::Config, "at least one partition is required");
  for (const mps::PartitionSpec& part : partitions) {
    if (part.kind == mps::PartitionSpec::Kind::BoundaryCut) {
      if (part.cut_after < 1 || part.cut_after >= model.sites)
        throw Error(ErrorKind::Config,
                    "cut " + std::to_string(part.cut_after) + " is outside 1.." +
                        std::to_string(model.sites - 1));
    } else {
      if (part.start < 1 || part.length < 1 ||
          part.start + part.length - 1 > model.sites)
        throw Error(ErrorKind::Config, "block " + std::to_string(part.start) + " " +
                                           std::to_string(part.length) +
                                           " does not fit the chain");
    }
  }
  alpha_grid.validate();
  dmrg.validate();
  if (workers < 1) throw Error(ErrorKind::Config, "workers must be at least 1");
  if (output_dir.empty()) throw Error(ErrorKind::Config, "output dir is required");
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.alpha_grid = analysis::AlphaGrid::standard();

  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(origin, line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "sweep" && section != "partitions" &&
          section != "alpha" && section != "dmrg" && section != "observables" &&
          section != "output")
        fail_at(origin, line, "unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail_at(origin, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) fail_at(origin, line, "expected key = value");
    if (section.empty()) fail_at(origin, line, "key before any [section]");
    seen.insert(section + "." + key);

    if (section == "model") {
      if (key == "family") {
        if (value == "cluster_ising")
          cfg.model.family = models::Family::ClusterIsing;
        else if (value == "lambda_d")
          cfg.model.family = models::Family::LambdaD;
        else
          fail_at(origin, line, "family must be cluster_ising or lambda_d");
      } else if (key == "sites") {
        cfg.model.sites = static_cast<int>(parse_int(value, origin, line, key));
      } else if (key == "g") {
        cfg.model.g = parse_double(value, origin, line, key);
      } else if (key == "lambda") {
        cfg.model.lambda = parse_double(value, origin, line, key);
      } else if (key == "d") {
        cfg.model.d_field = parse_double(value, origin, line, key);
      } else if (key == "perturbation") {
        if (value == "none")
          cfg.model.pert = models::Perturbation::None;
        else if (value == "cluster_edge")
          cfg.model.pert = models::Perturbation::ClusterEdge;
        else if (value == "cluster_edge_xz")
          cfg.model.pert = models::Perturbation::ClusterEdgeXZ;
        else if (value == "spin_one_edge")
          cfg.model.pert = models::Perturbation::SpinOneEdge;
        else
          fail_at(origin, line, "unknown perturbation '" + value + "'");
      } else if (key == "pert_eps") {
        cfg.model.pert_eps = parse_double(value, origin, line, key);
      } else if (key == "pert_sign") {
        const long s = parse_int(value, origin, line, key);
        if (s != 1 && s != -1) fail_at(origin, line, "pert_sign must be 1 or -1");
        cfg.model.pert_sign = static_cast<int>(s);
      } else if (key == "edge_field_y") {
        cfg.model.edge_field_y = parse_double(value, origin, line, key);
      } else if (key == "parity_pin") {
        cfg.model.parity_pin = parse_double(value, origin, line, key);
      } else if (key == "sector_active") {
        cfg.model.sector_active = parse_bool(value, origin, line, key);
      } else if (key == "sector_m") {
        cfg.model.sector_m = parse_double(value, origin, line, key);
      } else if (key == "sector_mu") {
        cfg.model.sector_mu = parse_double(value, origin, line, key);
      } else {
        fail_at(origin, line, "unknown model key '" + key + "'");
      }
    } else if (section == "sweep") {
      if (key == "parameter")
        cfg.sweep.parameter = value;
      else if (key == "start")
        cfg.sweep.start = parse_double(value, origin, line, key);
      else if (key == "stop")
        cfg.sweep.stop = parse_double(value, origin, line, key);
      else if (key == "step")
        cfg.sweep.step = parse_double(value, origin, line, key);
      else
        fail_at(origin, line, "unknown sweep key '" + key + "'");
    } else if (section == "partitions") {
      mps::PartitionSpec part;
      if (key == "cut") {
        part.kind = mps::PartitionSpec::Kind::BoundaryCut;
        part.cut_after = static_cast<int>(parse_int(value, origin, line, key));
      } else if (key == "block") {
        std::istringstream pair(value);
        int start = 0, length = 0;
        if (!(pair >> start >> length) || !(pair >> std::ws).eof())
          fail_at(origin, line, "block expects 'start length'");
        part.kind = mps::PartitionSpec::Kind::MiddleBlock;
        part.start = start;
        part.length = length;
      } else {
        fail_at(origin, line, "unknown partition key '" + key + "'");
      }
      cfg.partitions.push_back(part);
    } else if (section == "alpha") {
      if (key == "grid") {
        if (value != "standard")
          fail_at(origin, line, "alpha grid must be 'standard' or use values =");
        cfg.alpha_grid = analysis::AlphaGrid::standard();
      } else if (key == "values") {
        cfg.alpha_grid.values.clear();
        std::istringstream list(value);
        std::string item;
        while (std::getline(list, item, ','))
          cfg.alpha_grid.values.push_back(
              parse_double(trim(item), origin, line, key));
      } else if (key == "include_infinity") {
        cfg.alpha_grid.include_infinity = parse_bool(value, origin, line, key);
      } else {
        fail_at(origin, line, "unknown alpha key '" + key + "'");
      }
    } else if (section == "dmrg") {
      if (key == "chi_max")
        cfg.dmrg.chi_max = static_cast<int>(parse_int(value, origin, line, key));
      else if (key == "sweeps_max")
        cfg.dmrg.sweeps_max = static_cast<int>(parse_int(value, origin, line, key));
      else if (key == "energy_tol")
        cfg.dmrg.energy_tol = parse_double(value, origin, line, key);
      else if (key == "truncation_tol")
        cfg.dmrg.truncation_tol = parse_double(value, origin, line, key);
      else if (key == "noise_amplitude")
        cfg.dmrg.noise_amplitude = parse_double(value, origin, line, key);
      else if (key == "chi_start")
        cfg.dmrg.chi_start = static_cast<int>(parse_int(value, origin, line, key));
      else if (key == "lanczos_matvecs")
        cfg.dmrg.lanczos_matvecs =
            static_cast<int>(parse_int(value, origin, line, key));
      else if (key == "seed")
        cfg.dmrg.seed = static_cast<std::uint64_t>(parse_int(value, origin, line, key));
      else
        fail_at(origin, line, "unknown dmrg key '" + key + "'");
    } else if (section == "observables") {
      const bool on = parse_bool(value, origin, line, key);
      if (key == "string_order")
        cfg.observables.string_order = on;
      else if (key == "correlation_length")
        cfg.observables.correlation_length = on;
      else if (key == "edge_profile")
        cfg.observables.edge_profile = on;
      else if (key == "degeneracy")
        cfg.observables.degeneracy = on;
      else if (key == "central_charge")
        cfg.observables.central_charge = on;
      else
        fail_at(origin, line, "unknown observable '" + key + "'");
    } else if (section == "output") {
      if (key == "dir")
        cfg.output_dir = value;
      else if (key == "workers")
        cfg.workers = static_cast<int>(parse_int(value, origin, line, key));
      else
        fail_at(origin, line, "unknown output key '" + key + "'");
    }
  }

  for (const char* req : {"model.family", "model.sites", "sweep.parameter",
                          "sweep.start", "sweep.stop", "sweep.step", "output.dir"})
    if (!seen.count(req))
      throw Error(ErrorKind::Config, origin + ": missing required key " + std::string(req));
  cfg.validate();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    // an unreadable config is a configuration problem, not an io failure
    throw Error(ErrorKind::Config, e.what());
  }
  return parse_config_text(text, path);
}

std::string render_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[model]\n";
  out << "family = " << family_name(cfg.model.family) << "\n";
  out << "sites = " << cfg.model.sites << "\n";
  out << "g = " << format_float(cfg.model.g) << "\n";
  out << "lambda = " << format_float(cfg.model.lambda) << "\n";
  out << "d = " << format_float(cfg.model.d_field) << "\n";
  out << "perturbation = " << pert_name(cfg.model.pert) << "\n";
  out << "pert_eps = " << format_float(cfg.model.pert_eps) << "\n";
  out << "pert_sign = " << cfg.model.pert_sign << "\n";
  out << "edge_field_y = " << format_float(cfg.model.edge_field_y) << "\n";
  out << "parity_pin = " << format_float(cfg.model.parity_pin) << "\n";
  out << "sector_active = " << (cfg.model.sector_active ? "true" : "false") << "\n";
  out << "sector_m = " << format_float(cfg.model.sector_m) << "\n";
  out << "sector_mu = " << format_float(cfg.model.sector_mu) << "\n";
  out << "\n[sweep]\n";
  out << "parameter = " << cfg.sweep.parameter << "\n";
  out << "start = " << format_float(cfg.sweep.start) << "\n";
  out << "stop = " << format_float(cfg.sweep.stop) << "\n";
  out << "step = " << format_float(cfg.sweep.step) << "\n";
  out << "\n[partitions]\n";
  for (const mps::PartitionSpec& part : cfg.partitions) {
    if (part.kind == mps::PartitionSpec::Kind::BoundaryCut)
      out << "cut = " << part.cut_after << "\n";
    else
      out << "block = " << part.start << " " << part.length << "\n";
  }
  out << "\n[alpha]\n";
  out << "values = ";
  for (std::size_t i = 0; i < cfg.alpha_grid.values.size(); ++i)
    out << (i ? "," : "") << format_float(cfg.alpha_grid.values[i]);
  out << "\n";
  out << "include_infinity = " << (cfg.alpha_grid.include_infinity ? "true" : "false")
      << "\n";
  out << "\n[dmrg]\n";
  out << "chi_max = " << cfg.dmrg.chi_max << "\n";
  out << "sweeps_max = " << cfg.dmrg.sweeps_max << "\n";
  out << "energy_tol = " << format_float(cfg.dmrg.energy_tol) << "\n";
  out << "truncation_tol = " << format_float(cfg.dmrg.truncation_tol) << "\n";
  out << "noise_amplitude = " << format_float(cfg.dmrg.noise_amplitude) << "\n";
  out << "chi_start = " << cfg.dmrg.chi_start << "\n";
  out << "lanczos_matvecs = " << cfg.dmrg.lanczos_matvecs << "\n";
  out << "seed = " << cfg.dmrg.seed << "\n";
  out << "\n[observables]\n";
  out << "string_order = " << (cfg.observables.string_order ? "true" : "false") << "\n";
  out << "correlation_length = "
      << (cfg.observables.correlation_length ? "true" : "false") << "\n";
  out << "edge_profile = " << (cfg.observables.edge_profile ? "true" : "false") << "\n";
  out << "degeneracy = " << (cfg.observables.degeneracy ? "true" : "false") << "\n";
  out << "central_charge = " << (cfg.observables.central_charge ? "true" : "false")
      << "\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.output_dir << "\n";
  out << "workers = " << cfg.workers << "\n";
  return out.str();
}

}  // namespace topoconv::cli
