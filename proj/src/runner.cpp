#include "nmq/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <variant>

#include "nmq/dephasing.hpp"
#include "nmq/errors.hpp"
#include "parallel_for.hpp"
#include "report_io.hpp"

namespace nmq {
namespace {

namespace fs = std::filesystem;
using detail::format_g12;

constexpr int kFormatVersion = 1;
constexpr const char* kDivToken = "div";

struct TraceBundle {
  std::optional<GTrace> jc;
  std::optional<DephasingTrace> dephasing;
};

TraceBundle build_trace(const RunConfig& config) {
  TraceBundle bundle;
  if (config.model == ModelKind::jc) {
    const CorrelationKernel kernel(config.density);
    bundle.jc = derive_rates(solve_g(kernel, config.grid), config.g_floor);
  } else {
    bundle.dephasing = dephasing_trace(config.density, config.grid, 1e-9,
                                       config.jobs == 1 ? 0 : config.jobs);
  }
  return bundle;
}

nlohmann::ordered_json intervals_json(const IntervalSet& set) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Interval& iv : set.intervals()) {
    arr.push_back({iv.t_start, iv.t_end});
  }
  return arr;
}

nlohmann::ordered_json measure_json(const MeasureValue& mv) {
  nlohmann::ordered_json doc;
  doc["value"] = mv.value;
  doc["divergent"] = mv.divergent;
  doc["intervals"] = intervals_json(mv.intervals);
  return doc;
}

nlohmann::ordered_json sweep_summary_json(const SweepSummary& s) {
  nlohmann::ordered_json doc;
  doc["n_pairs"] = s.n_pairs;
  doc["seed"] = s.seed;
  doc["n_nonzero"] = s.n_nonzero;
  doc["intervals_invariant"] = s.intervals_invariant;
  doc["max_endpoint_discrepancy"] = s.max_endpoint_discrepancy;
  doc["argmax_pair"] = {{"a", s.argmax_pair.a},
                        {"b_re", s.argmax_pair.b.real()},
                        {"b_im", s.argmax_pair.b.imag()}};
  doc["max_value"] = s.max_value;
  doc["refined_argmax"] = {{"a", s.refined_argmax.a},
                           {"b_re", s.refined_argmax.b.real()},
                           {"b_im", s.refined_argmax.b.imag()}};
  doc["refined_max"] = s.refined_max;
  doc["canonical_value"] = s.canonical_value;
  doc["canonical_attains_max"] = s.canonical_attains_max;
  return doc;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream stream(path, std::ios::binary);
  if (!stream.good()) {
    throw ConfigError("cannot write to '" + path.string() + "'");
  }
  stream << content;
}

std::string trace_csv(const TraceBundle& bundle) {
  std::string out;
  if (bundle.jc) {
    const GTrace& tr = *bundle.jc;
    out += "t,re_g,im_g,gamma,big_gamma,s\n";
    for (std::size_t k = 0; k < tr.grid.count; ++k) {
      out += format_g12(tr.grid.time(k));
      out += ',';
      out += format_g12(tr.g[k].real());
      out += ',';
      out += format_g12(tr.g[k].imag());
      out += ',';
      out += tr.divergent[k] ? kDivToken : format_g12(tr.gamma[k]);
      out += ',';
      out += format_g12(tr.big_gamma[k]);
      out += ',';
      out += tr.divergent[k] ? kDivToken : format_g12(tr.lamb_shift[k]);
      out += '\n';
    }
  } else {
    const DephasingTrace& tr = *bundle.dephasing;
    out += "t,gamma_p,big_gamma_p\n";
    for (std::size_t k = 0; k < tr.grid.count; ++k) {
      out += format_g12(tr.grid.time(k));
      out += ',';
      out += format_g12(tr.gamma_p[k]);
      out += ',';
      out += format_g12(tr.big_gamma_p[k]);
      out += '\n';
    }
  }
  return out;
}

std::string curves_csv(const TraceBundle& bundle, const PairParams& pair,
                       const std::vector<double>& choi) {
  std::string out = "t,trace_distance,concurrence,g_choi\n";
  const auto emit_row = [&](double t, double dist, double conc, double g,
                            bool flagged) {
    out += format_g12(t);
    out += ',';
    out += format_g12(dist);
    out += ',';
    out += format_g12(conc);
    out += ',';
    out += flagged ? kDivToken : format_g12(g);
    out += '\n';
  };
  if (bundle.jc) {
    const GTrace& tr = *bundle.jc;
    const double b2 = std::norm(pair.b);
    for (std::size_t k = 0; k < tr.grid.count; ++k) {
      const double u = tr.abs_g(k);
      const double dist = u * std::sqrt(u * u * pair.a * pair.a + b2);
      emit_row(tr.grid.time(k), dist, u, choi[k], tr.divergent[k] != 0);
    }
  } else {
    const DephasingTrace& tr = *bundle.dephasing;
    const double b2 = std::norm(pair.b);
    for (std::size_t k = 0; k < tr.grid.count; ++k) {
      const double v = std::exp(tr.big_gamma_p[k]);
      const double dist = std::sqrt(pair.a * pair.a + b2 * v * v);
      emit_row(tr.grid.time(k), dist, v, choi[k], false);
    }
  }
  return out;
}

std::string report_json(const RunConfig& config, const MeasureReport& report,
                        double blp_formula_value) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["config"] = config.echo();
  doc["units"] = config.model == ModelKind::jc
                     ? "rates and frequencies in units of lambda"
                     : "rates and frequencies in units of omega_c";
  doc["pair"] = {{"a", report.pair.a},
                 {"b_re", report.pair.b.real()},
                 {"b_im", report.pair.b.imag()}};

  nlohmann::ordered_json measures;
  nlohmann::ordered_json blp = measure_json(report.blp);
  blp["formula_value"] = blp_formula_value;
  measures["blp"] = blp;
  measures["rhp_entanglement"] = measure_json(report.rhp_entanglement);
  nlohmann::ordered_json divisibility = measure_json(report.rhp_divisibility);
  divisibility["g_floor"] = config.g_floor;
  measures["rhp_divisibility"] = divisibility;
  doc["measures"] = measures;

  doc["interval_routes"] = {
      {"distance", intervals_json(report.blp.intervals)},
      {"concurrence", intervals_json(report.rhp_entanglement.intervals)},
      {"choi", intervals_json(report.choi_route)}};

  doc["equivalence"] = {
      {"verdict", report.equivalence.verdict},
      {"interval_set_distance", report.equivalence.interval_set_distance},
      {"sets_match", report.equivalence.sets_match},
      {"positivity_agrees", report.equivalence.positivity_agrees}};

  doc["conventions"] = {
      {"basis", "{|1>,|0>} excited first; two-qubit {|11>,|10>,|01>,|00>}"},
      {"choi_reference_state", "(|11>+|00>)/sqrt(2)"},
      {"entanglement_reference_state", "(|10>+|01>)/sqrt(2)"}};

  if (report.sweep) {
    doc["sweep"] = sweep_summary_json(*report.sweep);
  }
  return detail::dump_deterministic(doc);
}

struct PointResult {
  MeasureValue blp;
  MeasureValue entanglement;
  MeasureValue divisibility;
  bool verdict = false;
};

PointResult evaluate_point(const RunConfig& config) {
  const TraceBundle bundle = build_trace(config);
  const PairParams pair = config.effective_pair();
  MeasureReport report;
  if (bundle.jc) {
    report = build_measure_report(*bundle.jc, pair, config.epsilon_schedule);
  } else {
    report =
        build_measure_report(*bundle.dephasing, pair, config.epsilon_schedule);
  }
  return PointResult{report.blp, report.rhp_entanglement,
                     report.rhp_divisibility, report.equivalence.verdict};
}

}  // namespace

void run(const RunConfig& config) {
  config.validate_for_run();

  const TraceBundle bundle = build_trace(config);
  const PairParams pair = config.effective_pair();

  MeasureReport report;
  double blp_formula = 0.0;
  std::vector<double> choi;
  if (bundle.jc) {
    report = build_measure_report(*bundle.jc, pair, config.epsilon_schedule);
    blp_formula = report.blp_formula_value;
    choi = choi_curve(*bundle.jc, config.epsilon_schedule);
    if (config.sweep_pairs) {
      report.sweep = pair_sweep(*bundle.jc, config.sweep_pairs->n_pairs,
                                config.sweep_pairs->seed, config.jobs);
    }
  } else {
    report =
        build_measure_report(*bundle.dephasing, pair, config.epsilon_schedule);
    blp_formula = report.blp_formula_value;
    choi = choi_curve(*bundle.dephasing, config.epsilon_schedule);
    if (config.sweep_pairs) {
      report.sweep = pair_sweep(*bundle.dephasing, config.sweep_pairs->n_pairs,
                                config.sweep_pairs->seed, config.jobs);
    }
  }

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_file(dir / "trace.csv", trace_csv(bundle));
  write_file(dir / "curves.csv", curves_csv(bundle, pair, choi));
  write_file(dir / "report.json", report_json(config, report, blp_formula));
}

void sweep(const RunConfig& config) {
  config.validate_for_sweep();

  // Lexicographic point list over 1 or 2 axes.
  std::vector<std::vector<double>> points;
  if (config.axes.size() == 1) {
    for (double v : config.axes[0].values) points.push_back({v});
  } else {
    for (double v0 : config.axes[0].values) {
      for (double v1 : config.axes[1].values) points.push_back({v0, v1});
    }
  }

  std::vector<PointResult> results(points.size());
  detail::parallel_for(points.size(), config.jobs, [&](std::size_t i) {
    RunConfig point_config = config;
    point_config.axes.clear();
    point_config.jobs = 1;
    for (std::size_t axis = 0; axis < config.axes.size(); ++axis) {
      point_config.set_parameter(config.axes[axis].parameter, points[i][axis]);
    }
    results[i] = evaluate_point(point_config);
  });

  std::string out;
  for (const AxisConfig& ax : config.axes) {
    out += ax.parameter;
    out += ',';
  }
  out += "n,i_e,i,i_divergent,verdict\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (double v : points[i]) {
      out += format_g12(v);
      out += ',';
    }
    out += format_g12(results[i].blp.value);
    out += ',';
    out += format_g12(results[i].entanglement.value);
    out += ',';
    out += format_g12(results[i].divisibility.value);
    out += ',';
    out += results[i].divisibility.divergent ? "true" : "false";
    out += ',';
    out += results[i].verdict ? "true" : "false";
    out += '\n';
  }

  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  write_file(dir / "sweep.csv", out);
}

}  // namespace nmq
