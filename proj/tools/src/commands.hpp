#pragma once

// awmctl subcommands. Every command runs from a resolved settings object,
// built from defaults, an optional JSON config file and command-line flags,
// and embeds that object in its outputs.

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace awm::cli {

using Settings = nlohmann::ordered_json;

/// Default settings of `command`; ConfigError for unknown commands.
Settings defaults(const std::string &command);

/// Overlay `patch` on `base`. Keys missing from `base` are ConfigErrors.
/// Object-valued settings are replaced whole and validated by their owner.
void merge_settings(Settings &base, const nlohmann::json &patch, const std::string &where);

int cmd_compile(const Settings &s, std::ostream &log);
int cmd_sim(const Settings &s, std::ostream &log);
int cmd_bench(const Settings &s, std::ostream &log);
int cmd_analyze(const Settings &s, std::ostream &log);
int cmd_decode(const Settings &s, std::ostream &log);

/// Parse "4:1048576" (powers of two), "32,64,128" or a JSON array.
std::vector<double> parse_payloads(const nlohmann::json &spec);

/// Whole command line; args[0] is the program name. Returns the exit code.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace awm::cli
