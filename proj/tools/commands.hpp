// Subcommand bodies behind the `courtside` executable. Each returns the
// process exit code: 0 ok, 1 validation errors, 2 usage, 3 internal failure.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "courtside/pipeline.hpp"
#include "courtside/query.hpp"
#include "courtside/service.hpp"
#include "courtside/synth.hpp"

namespace courtside::cli {

enum Exit { kOk = 0, kValidation = 1, kUsage = 2, kInternal = 3 };

// Input directory (annotation files) or an analyzed bundle.json.
int cmd_validate(const std::filesystem::path& input, std::ostream& out, std::ostream& err);

int cmd_analyze(const std::filesystem::path& input, const std::filesystem::path& output,
                const AnalyzeOptions& opt, std::ostream& out, std::ostream& err);

struct StatsOptions {
  ShotFilter filter;
  bool json = false;
};
int cmd_stats(const std::filesystem::path& bundle, const StatsOptions& opt, std::ostream& out, std::ostream& err);

int cmd_synth(const SynthOptions& opt, const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

int cmd_serve(const ServiceConfig& config, std::ostream& out, std::ostream& err);

// "a,b" -> zone bounds in meters from the net.
std::optional<std::array<double, 2>> parse_zone_bounds(const std::string& s);

}  // namespace courtside::cli
