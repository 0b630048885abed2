#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "refinery/core.hpp"

namespace refinery {

enum class ReportFormat { text, json };

/// text: stable line-oriented prose; json: one object
/// {"check","verdict","failed_condition","degree","witnesses"} with degree as
/// an exact decimal or fraction string. Byte-identical for equal reports.
std::string render_report(const CheckReport& report, ReportFormat format,
                          bool color = false);

/// Parses argv-style arguments, loads the workspace, dispatches the check and
/// writes the report to out. Returns 0 on pass, 1 on fail, 2 on usage, parse
/// or validation errors (and on an exhausted search budget).
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace refinery
