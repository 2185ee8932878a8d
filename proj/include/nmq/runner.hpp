#pragma once

#include "nmq/run_config.hpp"

namespace nmq {

// Executes one measure run: builds the trace, computes the three measures and
// the equivalence verdict, and writes trace.csv, curves.csv and report.json
// into the configured output directory. Identical configs produce
// byte-identical files.
void run(const RunConfig& config);

// Executes a 1- or 2-axis parameter sweep and writes sweep.csv (one row per
// grid point in lexicographic axis order). Points run concurrently up to
// config.jobs; a single writer emits the rows afterwards.
void sweep(const RunConfig& config);

}  // namespace nmq
