#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nmq/jc.hpp"
#include "nmq/measures.hpp"
#include "nmq/spectral.hpp"
#include "nmq/time_grid.hpp"

namespace nmq {

struct PairConfig {
  double a = 0.0;
  complexd b{1.0, 0.0};
};

struct SweepPairsConfig {
  std::size_t n_pairs = 200;
  std::uint64_t seed = 42;
};

struct AxisConfig {
  std::string parameter;
  std::vector<double> values;
};

// Parsed and validated run configuration. All rates and frequencies are in
// units of lambda (JC / Lorentzian) or omega_c (dephasing / Ohmic); the JSON
// schema is documented in the README and in `nmq --help`.
struct RunConfig {
  ModelKind model = ModelKind::jc;
  SpectralDensityModel density;
  TimeGrid grid;
  double g_floor = kDefaultGFloor;
  std::optional<PairConfig> pair;
  std::optional<SweepPairsConfig> sweep_pairs;
  std::vector<double> epsilon_schedule{1e-3, 1e-4, 1e-5};
  std::string output_dir = "out";
  std::vector<AxisConfig> axes;
  std::size_t jobs = 1;

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);

  // Applies one sweep-axis value; throws ConfigError for parameters that do
  // not exist on the configured density variant.
  void set_parameter(const std::string& name, double value);

  void validate_common() const;
  void validate_for_run() const;    // exactly one of pair / sweep_pairs
  void validate_for_sweep() const;  // additionally 1-2 axes

  PairParams effective_pair() const;  // configured pair or the canonical one

  nlohmann::ordered_json echo() const;
};

}  // namespace nmq
