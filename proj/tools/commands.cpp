#include "commands.hpp"

#include <csignal>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "courtside/bundle_io.hpp"
#include "courtside/error.hpp"
#include "courtside/ingest.hpp"
#include "courtside/stats.hpp"
#include "courtside/validate.hpp"

namespace courtside::cli {

namespace fs = std::filesystem;

namespace {

int report(const Error& e, std::ostream& err) {
  err << "error [" << e.code() << "] " << e.what();
  if (e.line()) err << " (line " << *e.line() << ")";
  err << '\n';
  return kValidation;
}

std::string score_str(const std::array<int, 2>& s) { return std::to_string(s[0]) + "-" + std::to_string(s[1]); }

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_grid(std::ostream& out, const std::vector<HeatmapCell>& cells, const MatchBundle& b) {
  // Each half drawn from its owner's viewpoint: back row first, left column first.
  for (PlayerId half : {PlayerId::A, PlayerId::B}) {
    out << "  half " << to_string(half) << " ("
        << (half == PlayerId::A ? b.manifest.player_a : b.manifest.player_b) << ")\n";
    for (Depth d : {Depth::Back, Depth::Middle, Depth::Front}) {
      out << "    " << std::left << std::setw(7)
          << (d == Depth::Back ? "back" : d == Depth::Middle ? "middle" : "front") << std::right;
      for (Side s : {Side::Left, Side::Right}) {
        const auto& c = cells[Zone{s, d, half}.index()];
        out << std::setw(6) << c.count << " (" << std::setw(3) << c.display_percent << "%)";
      }
      out << '\n';
    }
  }
}

}  // namespace

std::optional<std::array<double, 2>> parse_zone_bounds(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return std::nullopt;
  try {
    std::size_t p1 = 0, p2 = 0;
    const double a = std::stod(s.substr(0, comma), &p1);
    const double b = std::stod(s.substr(comma + 1), &p2);
    if (p1 != comma || p2 != s.size() - comma - 1) return std::nullopt;
    return std::array<double, 2>{a, b};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int cmd_validate(const fs::path& input, std::ostream& out, std::ostream& err) {
  try {
    std::vector<Diagnostic> diags;
    if (fs::is_regular_file(input)) {
      const auto bundle = read_bundle(input);
      diags = validate_bundle(bundle).entries;
    } else {
      if (!fs::is_directory(input)) throw Error("UnreadableFile", "no such input " + input.string());
      const auto raw = load_match_dir(input);
      diags = raw.warnings;
      camera_from(raw.calibration);
    }
    int errors = 0;
    for (const auto& d : diags) {
      (d.severity == Severity::Error ? err : out) << format(d) << '\n';
      errors += d.severity == Severity::Error;
    }
    out << (errors ? "invalid" : "ok") << ": " << errors << " error(s), " << diags.size() - errors
        << " warning(s)\n";
    return errors ? kValidation : kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

int cmd_analyze(const fs::path& input, const fs::path& output, const AnalyzeOptions& opt, std::ostream& out,
                std::ostream& err) {
  try {
    const auto raw = load_match_dir(input);
    const auto bundle = analyze(raw, opt);
    write_bundle(output, bundle);
    int fitted = 0, shots = 0;
    for (const auto& g : bundle.games)
      for (const auto& r : g.rallies)
        for (const auto& s : r.shots) {
          ++shots;
          fitted += s.fit && s.fit->converged;
        }
    out << "wrote " << output.string() << ": " << bundle.summary.rally_count << " rallies, " << shots
        << " shots, " << fitted << " fitted, camera rmse " << fixed(bundle.camera.rmse_px, 3) << " px, "
        << bundle.warnings.size() << " warning(s)\n";
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

int cmd_stats(const fs::path& path, const StatsOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    check_filter(opt.filter);
    const auto b = read_bundle(path);
    const Scope scope{opt.filter.game, opt.filter.half};
    const auto summary = summarize(b, scope);
    const auto counts = outcome_counts(b, scope);
    const auto shots = filter_shots(b, opt.filter);
    const auto menu = rally_menu(b, opt.filter);
    const auto from = heatmap(shots, Direction::From);
    const auto to = heatmap(shots, Direction::To);
    int short_items = 0;
    for (const auto& m : menu) short_items += m.is_short;

    if (opt.json) {
      Json j = {{"filter", to_json(opt.filter)},
                {"summary", to_json(summary)},
                {"outcomes", to_json(counts)},
                {"shot_count", static_cast<int>(shots.size())},
                {"rallies", static_cast<int>(menu.size())},
                {"short_rallies", short_items},
                {"heatmap", {{"from", heatmap_json(from)}, {"to", heatmap_json(to)}}}};
      out << j.dump(2) << '\n';
      return kOk;
    }

    const auto& m = b.manifest;
    out << m.player_a << " (A) vs " << m.player_b << " (B)";
    if (!m.event.empty()) out << "  " << m.event;
    out << '\n';
    out << "scope: " << (scope.game ? "game " + std::to_string(*scope.game) : std::string("match"));
    if (scope.half) out << ", " << to_string(*scope.half) << " half";
    out << "\n\nMatch Summary\n";
    out << "  duration        " << fixed(summary.duration_sec, 1) << " s\n";
    out << "  rallies         " << summary.rally_count << '\n';
    out << "  shots           " << summary.shot_count << '\n';
    out << "  avg shots/rally " << (summary.empty ? std::string("0 (empty)") : fixed(summary.avg_shots_per_rally, 2))
        << '\n';
    out << "  rallies won     A " << summary.rallies_won[0] << ", B " << summary.rallies_won[1] << '\n';
    if (b.summary.match_winner) out << "  match winner    " << to_string(*b.summary.match_winner) << '\n';
    out << "\nGames\n";
    for (const auto& g : b.games) {
      if (scope.game && g.number != *scope.game) continue;
      out << "  G" << g.number << "  " << score_str(g.score) << (g.finished ? "" : " (unfinished)");
      if (g.winner) out << "  winner " << to_string(*g.winner);
      out << '\n';
    }
    out << "\nOutcomes           A     B\n";
    out << "  winners     " << std::setw(6) << counts.winners[0] << std::setw(6) << counts.winners[1] << '\n';
    out << "  errors      " << std::setw(6) << counts.errors[0] << std::setw(6) << counts.errors[1] << '\n';
    out << "  short won   " << std::setw(6) << counts.short_rallies_won[0] << std::setw(6)
        << counts.short_rallies_won[1] << '\n';
    out << "  degenerate rallies " << counts.degenerate << '\n';

    out << "\nShot Filter";
    for (const auto& [k, v] : filter_fields(opt.filter)) out << ' ' << k << '=' << v;
    out << '\n';
    if (shots.empty()) {
      out << "  0 shots\n";
      return kOk;
    }
    out << "  " << shots.size() << " shots in " << menu.size() << " rallies (" << short_items << " short)\n";
    out << "\nHeatmap from\n";
    print_grid(out, from, b);
    out << "\nHeatmap to\n";
    print_grid(out, to, b);
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

int cmd_synth(const SynthOptions& opt, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const auto m = synthesize(opt);
    write_synth(out_dir, m);
    out << "wrote " << out_dir.string() << ": " << m.rallies.size() << " rallies, " << m.shots.size()
        << " shots (seed " << opt.seed << ")\n";
    if (static_cast<int>(m.rallies.size()) < opt.rallies) {
      err << "warning: match decided after " << m.rallies.size() << " rallies\n";
    }
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

namespace {
Server* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int cmd_serve(const ServiceConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Server server(config);
    out << "serving on http://" << config.bind << ':' << server.port() << '\n' << std::flush;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return kOk;
  } catch (const Error& e) {
    return report(e, err);
  }
}

}  // namespace courtside::cli
