#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "run_config.hpp"

namespace bioie::cli {

std::span<const std::string_view> command_names();

// Runs one command against a resolved config. Results go under
// config.output and a summary to `out`. Library errors propagate.
void run_command(std::string_view command, const RunConfig& config, std::ostream& out);

// Parses argv (`bioie <command> [--config FILE] [--key value ...]`), then
// runs. Exit status: 0 success, 1 data or config error, 2 usage error.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bioie::cli
