#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <string>

#include "topoconv/cli.hpp"

namespace {

using namespace topoconv;

int code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 1;
    case ErrorKind::OracleMismatch: return 3;
    default: return 2;
  }
}

// `run` and `verify` accept either a preset name or a config file path.
cli::RunConfig load_config_arg(const std::string& arg) {
  for (const cli::FigurePreset& p : cli::figure_presets())
    if (p.name == arg)
      return cli::parse_config_text(p.config_text, "preset:" + arg);
  return cli::parse_config_file(arg);
}

void apply_worker_env(cli::RunConfig& cfg) {
  const char* env = std::getenv("TOPOCONV_WORKERS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long w = std::strtol(env, &end, 10);
  if (*end != '\0' || w < 1)
    throw Error(ErrorKind::Config,
                "TOPOCONV_WORKERS must be a positive integer, got '" +
                    std::string(env) + "'");
  cfg.workers = static_cast<int>(w);
}

analysis::AlphaGrid parse_alpha_arg(const std::string& arg) {
  if (arg == "standard") return analysis::AlphaGrid::standard();
  analysis::AlphaGrid grid;
  grid.include_infinity = false;
  std::string item;
  std::istringstream in(arg);
  while (std::getline(in, item, ',')) {
    if (item == "inf") {
      grid.include_infinity = true;
      continue;
    }
    char* end = nullptr;
    const double a = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0')
      throw Error(ErrorKind::Config, "bad alpha value '" + item + "'");
    grid.values.push_back(a);
  }
  std::sort(grid.values.begin(), grid.values.end());
  grid.validate();
  return grid;
}

int do_run(const std::string& arg) {
  cli::RunConfig cfg = load_config_arg(arg);
  apply_worker_env(cfg);
  const cli::RunArtifacts art = cli::run(cfg);
  int unconverged = 0;
  for (const cli::PointRecord& r : art.points)
    if (!r.converged) ++unconverged;
  std::printf("wrote %s: %zu points, %zu partitions\n", cfg.output_dir.c_str(),
              art.grid.size(), art.diagrams.size());
  if (unconverged > 0)
    std::printf("warning: %d unconverged point%s (marked in manifest.json)\n",
                unconverged, unconverged == 1 ? "" : "s");
  return 0;
}

int do_verify(const std::string& arg) {
  cli::RunConfig cfg = load_config_arg(arg);
  const cli::VerifyReport rep = cli::verify(cfg);
  std::fputs(rep.text.c_str(), stdout);
  std::printf("verified %d points\n", rep.points_checked);
  return 0;
}

int do_presets() {
  std::size_t width = 0;
  for (const cli::FigurePreset& p : cli::figure_presets())
    width = std::max(width, p.name.size());
  for (const cli::FigurePreset& p : cli::figure_presets())
    std::printf("%-*s  %s\n", static_cast<int>(width), p.name.c_str(),
                p.summary.c_str());
  std::printf("\nuse: topoconv run <name>  (or verify <name>)\n");
  return 0;
}

int do_entropy(const std::string& path, const std::string& alpha_arg) {
  const analysis::AlphaGrid grid = parse_alpha_arg(alpha_arg);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(cli::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
  std::printf("p,partition,alpha,entropy\n");
  for (const nlohmann::json& point : doc.at("points")) {
    const double p = point.at("p").get<double>();
    for (const auto& [label, values] : point.at("partitions").items()) {
      const std::vector<double> ev = values.get<std::vector<double>>();
      for (double a : grid.values)
        std::printf("%s,%s,%s,%s\n", cli::format_float(p).c_str(), label.c_str(),
                    cli::format_float(a).c_str(),
                    cli::format_float(analysis::renyi_entropy(ev, a)).c_str());
      if (grid.include_infinity)
        std::printf("%s,%s,inf,%s\n", cli::format_float(p).c_str(), label.c_str(),
                    cli::format_float(analysis::renyi_entropy(
                                          ev, std::numeric_limits<double>::infinity()))
                        .c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential local convertibility of matrix-product ground states"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);

  std::string run_arg, verify_arg, spectra_path;
  std::string alpha_arg = "standard";

  CLI::App* cmd_run = app.add_subcommand("run", "execute a sweep config or preset");
  cmd_run->add_option("config", run_arg, "config file path or preset name")
      ->required();
  CLI::App* cmd_verify =
      app.add_subcommand("verify", "compare a config against the exact oracles");
  cmd_verify->add_option("config", verify_arg, "config file path or preset name")
      ->required();
  app.add_subcommand("presets", "list the built-in presets");
  CLI::App* cmd_entropy =
      app.add_subcommand("entropy", "recompute entropies from a spectra.json");
  cmd_entropy->add_option("spectra", spectra_path, "path to spectra.json")
      ->required();
  cmd_entropy->add_option("--alpha", alpha_arg,
                          "comma-separated orders ('inf' allowed) or 'standard'");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return do_run(run_arg);
    if (app.got_subcommand("verify")) return do_verify(verify_arg);
    if (app.got_subcommand("presets")) return do_presets();
    return do_entropy(spectra_path, alpha_arg);
  } catch (const topoconv::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
