#pragma once

#include "report.hpp"

namespace deflab::cli {

// Each command fills `result` and returns 0 on a pass verdict, 1 on a fail verdict.
int run_check(const Config& cfg, Json& result);
int run_deflate(const Config& cfg, Json& result);
int run_foellmer(const Config& cfg, Json& result);
int run_ky_verify(const Config& cfg, Json& result);
int run_stopped_check(const Config& cfg, Json& result);
int run_enlarge_jacod(const Config& cfg, Json& result);
int run_enlarge_universal(const Config& cfg, Json& result);
int run_enlarge_insider(const Config& cfg, Json& result);
int run_enlarge_logutility(const Config& cfg, Json& result);
int run_simulate(const Config& cfg, Json& result);
int run_scenario(const Config& cfg, Json& result);

}  // namespace deflab::cli
