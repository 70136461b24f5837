#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace covr {

/// Entry point of the `covr` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on usage errors and 2 on data errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key=value lines; '#' starts a comment. Throws UsageError on a malformed
/// line.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Appends `--key=value` for every config entry whose flag is not already on
/// the command line, so explicit flags win over the file and the file wins
/// over defaults. Underscores in keys map to dashes.
std::vector<std::string> merge_config(std::vector<std::string> args,
                                      const std::map<std::string, std::string>& config);

}  // namespace covr
