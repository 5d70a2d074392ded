#include <CLI11.hpp>
#include <iostream>

#include "cli/commands.hpp"
#include "cli/config.hpp"

using namespace spinfreeze::cli;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string data_path;
  int threads = -1;
  std::string format;
  std::vector<std::string> overrides;
};

CommandArgs build_args(const CliOptions& opts) {
  ConfigMap map;
  if (!opts.config_path.empty())
    map = ConfigMap::parse_file(opts.config_path);
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    map.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.format.empty()) map.set("outputs.format", opts.format);
  if (opts.threads >= 0) map.set("threads", std::to_string(opts.threads));

  CommandArgs args;
  args.config = resolve_config(map);
  if (!opts.out_dir.empty()) args.out_dir = std::filesystem::path(opts.out_dir);
  args.out = &std::cout;
  return args;
}

void add_common(CLI::App* cmd, CliOptions& opts, bool with_data = false) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
  cmd->add_option("--format", opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--set", opts.overrides, "override a config key (key=value)");
  if (with_data)
    cmd->add_option("data", opts.data_path, "decay-curve CSV to fit")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-space simulator for spin-wave lifetime extension via lattice phase modulation"};
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* scales = app.add_subcommand("scales", "print the derived physical scales");
  add_common(scales, opts);
  CLI::App* scan = app.add_subcommand("scan", "storage-time scans -> decay-curve CSVs");
  add_common(scan, opts);
  CLI::App* figure2 =
      app.add_subcommand("figure2", "time-resolved spectrum map of the protocol");
  add_common(figure2, opts);
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "pulse-duration calibration and Bessel fit");
  add_common(calibrate, opts);
  CLI::App* fit = app.add_subcommand("fit", "lifetime fit of a decay-curve CSV");
  add_common(fit, opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return run_guarded(name, [&]() -> int {
    const CommandArgs args = build_args(opts);
    if (name == "scales") return cmd_scales(args);
    if (name == "scan") return cmd_scan(args);
    if (name == "figure2") return cmd_figure2(args);
    if (name == "calibrate") return cmd_calibrate(args);
    return cmd_fit(args, opts.data_path);
  }, std::cerr);
}
