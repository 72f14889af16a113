// Executes the checks a configuration requests, in order, and assembles the
// report. Unmet preconditions become "skipped: <reason>" verdicts, never
// silent omissions.
#pragma once

#include <string>
#include <vector>

#include "confstab/config.hpp"
#include "confstab/report.hpp"

namespace confstab {

// `checks_override` replaces the config's list when non-empty (used by the
// CLI subcommands); "all" expands to every check in canonical order.
Report run_config(const RunConfig& cfg, const std::vector<std::string>& checks_override = {},
                  int threads = 1);

}  // namespace confstab
