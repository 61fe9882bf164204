#pragma once

// JSON-lines serialization of run logs. One "start" line per arm, then one
// "tick" line per tick per arm.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dawnik/simulation.hpp"

namespace dawnik {

void write_run_log(std::ostream& out, const RunLog& log);
void write_run_log(const std::filesystem::path& path, const RunLog& log);

// Throws ParseError naming the offending line.
RunLog read_run_log(std::istream& in);
RunLog read_run_log(const std::filesystem::path& path);

std::string run_log_filename(int trial);  // "trial_<n>.jsonl"

}  // namespace dawnik
