#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "commands.hpp"
#include "courtside/error.hpp"
#include "courtside/stats.hpp"

using namespace courtside;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"courtside: badminton match analysis"};
  app.set_config("--config", "", "TOML/INI file with flag values");
  app.require_subcommand(1);

  fs::path input, output, out_dir;

  auto* validate = app.add_subcommand("validate", "Check an input directory or a bundle.json");
  validate->add_option("input", input, "Input directory or bundle.json")->required();

  AnalyzeOptions aopt;
  bool no_fit = false;
  std::optional<double> vt;
  std::string zone_bounds;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run the analysis pipeline");
  analyze_cmd->add_option("input", input, "Input directory")->required();
  analyze_cmd->add_option("-o,--out", output, "Output bundle.json")->default_val("bundle.json");
  analyze_cmd->add_flag("--no-fit", no_fit, "Skip trajectory fitting");
  analyze_cmd->add_option("--vt", vt, "Fix the terminal velocity (m/s)")->check(CLI::Range(0.5, 100.0));
  analyze_cmd->add_option("--zone-bounds", zone_bounds, "Front/middle and middle/back distances from the net, e.g. 2.233,4.467");
  analyze_cmd->add_option("--jobs", aopt.jobs, "Fit threads (0 = all)")->check(CLI::NonNegativeNumber);

  cli::StatsOptions sopt;
  std::optional<int> game;
  std::string half, scorer, role, hitter, from_zone, to_zone;
  std::string format = "text";
  auto* stats = app.add_subcommand("stats", "Print summary tables for a bundle");
  stats->add_option("bundle", input, "bundle.json")->required();
  stats->add_option("--game", game, "Game number (1-based)");
  stats->add_option("--half", half, "first|second (needs --game)");
  stats->add_option("--scorer", scorer, "A|B: rallies won by");
  stats->add_option("--role", role, "all|winners|errors");
  stats->add_option("--hitter", hitter, "A|B");
  stats->add_option("--from-zone", from_zone, "Zones like A.back.left, comma separated");
  stats->add_option("--to-zone", to_zone, "Zones like B.front.right, comma separated");
  stats->add_option("--format", format, "text|json")->check(CLI::IsMember({"text", "json"}));

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "Generate a simulated match with ground truth");
  synth->add_option("--seed", synth_opt.seed, "RNG seed");
  synth->add_option("--rallies", synth_opt.rallies, "Number of rallies");
  synth->add_option("--fps", synth_opt.fps, "Frame rate");
  synth->add_option("--noise", synth_opt.pixel_noise, "Track noise sigma (px)");
  synth->add_option("--out", out_dir, "Output directory")->required();

  ServiceConfig scfg;
  auto* serve = app.add_subcommand("serve", "Serve analyzed bundles over HTTP");
  serve->add_option("--data-dir", scfg.data_dir, "Directory of bundles")->required();
  serve->add_option("--video-dir", scfg.video_dir, "Directory of match videos");
  serve->add_option("--static-dir", scfg.static_dir, "Viewer build to host at /");
  serve->add_option("--port", scfg.port, "Port (0 = any)")->check(CLI::Range(0, 65535));
  serve->add_option("--bind", scfg.bind, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*validate) return cli::cmd_validate(input, std::cout, std::cerr);
    if (*analyze_cmd) {
      aopt.fit = !no_fit;
      aopt.vt = vt;
      if (!zone_bounds.empty()) {
        const auto zb = cli::parse_zone_bounds(zone_bounds);
        if (!zb) {
          std::cerr << "--zone-bounds expects two comma separated numbers\n";
          return cli::kUsage;
        }
        aopt.court.zone_bounds = *zb;
        if (!aopt.court.valid()) {
          std::cerr << "--zone-bounds must increase and stay inside the half court\n";
          return cli::kUsage;
        }
      }
      return cli::cmd_analyze(input, output, aopt, std::cout, std::cerr);
    }
    if (*stats) {
      try {
        sopt.filter = parse_filter([&](std::string_view k) -> std::optional<std::string> {
          if (k == "game") return game ? std::optional<std::string>(std::to_string(*game)) : std::nullopt;
          const std::string* v = k == "half" ? &half : k == "scorer" ? &scorer : k == "role" ? &role
                               : k == "hitter" ? &hitter : k == "from_zone" ? &from_zone : &to_zone;
          return v->empty() ? std::nullopt : std::optional<std::string>(*v);
        });
      } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "] " << e.what() << '\n';
        return cli::kUsage;
      }
      sopt.json = format == "json";
      return cli::cmd_stats(input, sopt, std::cout, std::cerr);
    }
    if (*synth) {
      if (synth_opt.rallies < 1) {
        std::cerr << "--rallies must be at least 1\n";
        return cli::kUsage;
      }
      return cli::cmd_synth(synth_opt, out_dir, std::cout, std::cerr);
    }
    if (*serve) return cli::cmd_serve(scfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kInternal;
  }
  return cli::kUsage;
}
