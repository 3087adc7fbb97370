#include "ddnoise/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddnoise/engine.hpp"
#include "ddnoise/errors.hpp"
#include "ddnoise/expansion.hpp"
#include "ddnoise/montecarlo.hpp"
#include "ddnoise/optimizer.hpp"
#include "ddnoise/pulses.hpp"

namespace ddnoise::cli {
namespace {

using nlohmann::json;

constexpr double kEchoTolerance = 1e-12;

Eigen::VectorXd parse_vector(const json& node, const std::string& field) {
  if (!node.is_array()) throw ValidationError("config field '" + field + "': expected an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) {
      throw ValidationError("config field '" + field + "[" + std::to_string(i) +
                            "]': expected a number");
    }
    out(static_cast<Eigen::Index>(i)) = node[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd parse_matrix(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) {
    throw ValidationError("config field '" + field + "': expected a non-empty array of rows");
  }
  const std::size_t rows = node.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    const Eigen::VectorXd row = parse_vector(node[r], row_field);
    if (static_cast<std::size_t>(row.size()) != rows) {
      throw ValidationError("config field '" + row_field + "': expected " +
                            std::to_string(rows) + " entries, got " +
                            std::to_string(row.size()));
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Writes to --out when given, else to the command's output stream.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  file << text;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

json report_json(const ExpansionReport& r) {
  json j;
  j["pulse_count"] = r.pulse_count;
  j["g_total"] = r.g_total;
  j["constant_part"] = r.constant_part;
  j["quadratic_part"] = r.quadratic_part;
  j["cubic_part"] = r.cubic_part;
  j["linear_part"] = r.linear_part;
  j["scalar_s"] = r.scalar_s ? json(*r.scalar_s) : json(nullptr);
  j["predicted_cubic"] = r.predicted_cubic ? json(*r.predicted_cubic) : json(nullptr);
  return j;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  // `pos:` specs contain commas themselves; a fragment that does not name a
  // sequence kind continues the previous `pos:` list.
  while (std::getline(in, item, ',')) {
    const bool continues = !out.empty() && out.back().rfind("pos:", 0) == 0 &&
                           item.find(':') == std::string::npos && item != "free" &&
                           item != "hahn";
    if (continues) {
      out.back() += "," + item;
    } else {
      out.push_back(item);
    }
  }
  return out;
}

void require_echo(const PulseSequence& seq, const std::string& spec) {
  const double residual = echo_residual(seq);
  if (std::abs(residual) > kEchoTolerance) {
    throw ValidationError("echo condition: sequence '" + spec + "' has echo residual " +
                          format_double(residual));
  }
}

int cmd_validate(const std::string& config, std::ostream& out) {
  const NoiseModel model = load_model(config);
  json j;
  j["valid"] = true;
  j["states"] = model.size();
  j["initial"] = std::vector<double>(model.initial_distribution().data(),
                                     model.initial_distribution().data() + model.size());
  j["scalar_s"] = third_order_scalar(model);
  j["absorbing_states"] = model.has_absorbing_state();
  out << j.dump(2) << "\n";
  return kSuccess;
}

int cmd_curve(const std::string& config, const std::string& spec, double t_max, int points,
              bool logarithmic, const std::string& path, std::ostream& out) {
  const NoiseModel model = load_model(config);
  const PulseSequence seq = parse_sequence(spec);
  const std::vector<double> grid = time_grid(t_max, points, logarithmic);
  std::ostringstream csv;
  csv << "t,re_x,im_x,abs_x\n";
  for (const DecoherenceSample& s : curve(model, seq, grid)) {
    csv << format_double(s.t) << ',' << format_double(s.value.real()) << ','
        << format_double(s.value.imag()) << ',' << format_double(s.magnitude) << '\n';
  }
  emit(csv.str(), path, out);
  return kSuccess;
}

int cmd_compare(const std::string& config, const std::string& list, std::optional<double> t,
                std::ostream& out) {
  const NoiseModel model = load_model(config);
  const double s = third_order_scalar(model);

  struct Row {
    std::string spec;
    PulseSequence seq;
    double residual;
    double g;
  };
  std::vector<Row> rows;
  for (const std::string& spec : split_list(list)) {
    PulseSequence seq = parse_sequence(spec);
    const double residual = echo_residual(seq);
    const double g = g3(seq);
    rows.push_back(Row{spec, std::move(seq), residual, g});
  }

  // Competition ranking by g_total among echo-satisfying sequences.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i].residual) <= kEchoTolerance) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].g < rows[b].g; });
  std::vector<int> rank(rows.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    const bool tie = r > 0 && rows[order[r]].g == rows[order[r - 1]].g;
    rank[order[r]] = tie ? rank[order[r - 1]] : static_cast<int>(r) + 1;
  }

  json j;
  j["scalar_s"] = s;
  j["ranked"] = s != 0.0;
  if (s == 0.0) j["note"] = "scalar_s = 0: the t^3 term vanishes for every sequence, no ranking";
  j["sequences"] = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    json item;
    item["sequence"] = row.spec;
    item["pulse_count"] = row.seq.size();
    item["echo_residual"] = row.residual;
    item["g_total"] = row.g;
    item["predicted_cubic"] = row.g * s;
    item["rank"] = (s != 0.0 && rank[i] > 0) ? json(rank[i]) : json(nullptr);
    if (t) {
      const DecoherenceSample sample = coherence(model, row.seq, *t);
      item["t"] = *t;
      item["re_x"] = sample.value.real();
      item["im_x"] = sample.value.imag();
      item["abs_x"] = sample.magnitude;
    }
    j["sequences"].push_back(std::move(item));
  }
  out << j.dump(2) << "\n";
  return kSuccess;
}

int cmd_expand(const std::string& config, const std::string& spec, int words,
               std::ostream& out) {
  const NoiseModel model = load_model(config);
  const PulseSequence seq = parse_sequence(spec);
  require_echo(seq, spec);
  json j = report_json(expansion_report(model, seq));
  j["sequence"] = spec;
  j["echo_residual"] = echo_residual(seq);
  if (words > 0) {
    json list = json::array();
    for (const auto& [word, term] : word_expansion(model, seq, words)) {
      list.push_back({{"word", word},
                      {"coefficient_re", term.coefficient.real()},
                      {"coefficient_im", term.coefficient.imag()},
                      {"contraction", term.contraction}});
    }
    j["words"] = std::move(list);
  }
  out << j.dump(2) << "\n";
  return kSuccess;
}

int cmd_optimize(int pulses, int starts, std::uint64_t seed, const std::string& path,
                 std::ostream& out) {
  const OptimizationResult r = minimize(pulses, starts, seed);
  json j;
  j["pulse_count"] = r.pulse_count;
  j["best_beta"] = r.best_beta;
  j["best_g"] = r.best_g;
  j["cpmg_g"] = 1.0 / (12.0 * pulses * pulses);
  j["starts"] = r.starts;
  j["converged_starts"] = r.converged_starts;
  j["gradient_norm_at_best"] = r.gradient_norm_at_best;
  j["seed"] = seed;
  emit(j.dump(2) + "\n", path, out);
  return kSuccess;
}

int cmd_mc(const std::string& config, const std::string& spec, double t, std::int64_t n,
           std::uint64_t seed, int threads, std::ostream& out) {
  const NoiseModel model = load_model(config);
  const PulseSequence seq = parse_sequence(spec);
  const MonteCarloEstimate est = mc_coherence(model, seq, t, n, seed, threads);
  const DecoherenceSample exact = coherence(model, seq, t);
  json j;
  j["mean"] = {{"re", est.mean.real()}, {"im", est.mean.imag()}};
  j["std_error"] = est.std_error;
  j["trajectories"] = est.trajectories;
  j["seed"] = est.seed;
  j["exact"] = {{"re", exact.value.real()}, {"im", exact.value.imag()}};
  out << j.dump(2) << "\n";
  return kSuccess;
}

}  // namespace

NoiseModel parse_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("malformed config: expected a JSON object");
  for (const char* key : {"levels", "generator"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("config field '") + key + "' is missing");
    }
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "levels" && key != "generator" && key != "initial") {
      throw ValidationError("config field '" + key + "' is not recognized");
    }
  }
  Eigen::VectorXd levels = parse_vector(doc["levels"], "levels");
  Eigen::MatrixXd generator = parse_matrix(doc["generator"], "generator");
  std::optional<Eigen::VectorXd> initial;
  if (doc.contains("initial") && !doc["initial"].is_null()) {
    initial = parse_vector(doc["initial"], "initial");
  }
  return NoiseModel::create(std::move(levels), std::move(generator), std::move(initial));
}

NoiseModel load_model(const std::string& path) { return parse_model(read_file(path)); }

std::vector<double> time_grid(double t_max, int points, bool logarithmic) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw DomainError("time grid: --t-max must be positive");
  }
  if (points < 1) throw DomainError("time grid: --points must be at least 1");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = t_max;
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    const double frac = static_cast<double>(i) / (points - 1);
    grid[i] = logarithmic ? t_max * std::pow(10.0, -3.0 * (1.0 - frac)) : t_max * frac;
  }
  grid.back() = t_max;
  return grid;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Qubit decoherence under dynamical decoupling in telegraph-like noise"};
  app.require_subcommand(1);

  std::string config;
  std::string sequence;
  std::string sequences;
  std::string out_path;
  double t_max = 1.0;
  int points = 101;
  bool logarithmic = false;
  double t = 1.0;
  std::optional<double> compare_t;
  int words = 0;
  int pulses = 1;
  int starts = 50;
  std::uint64_t seed = 1;
  std::int64_t trajectories = 100000;
  int threads = 0;

  auto* validate = app.add_subcommand("validate", "Check a noise model against its invariants");
  validate->add_option("--config", config, "Noise model JSON")->required();

  auto* curve_cmd = app.add_subcommand("curve", "Exact decoherence curve as CSV");
  curve_cmd->add_option("--config", config, "Noise model JSON")->required();
  curve_cmd->add_option("--sequence", sequence, "Pulse sequence spec")->required();
  curve_cmd->add_option("--t-max", t_max, "Largest time")->required();
  curve_cmd->add_option("--points", points, "Number of grid points")->required();
  curve_cmd->add_flag("--log", logarithmic, "Logarithmic grid over three decades");
  curve_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  auto* compare = app.add_subcommand("compare", "Rank sequences by third-order coefficient");
  compare->add_option("--config", config, "Noise model JSON")->required();
  compare->add_option("--sequences", sequences, "Comma-separated sequence specs")->required();
  compare->add_option("--t", compare_t, "Also evaluate the exact coherence at this time");

  auto* expand = app.add_subcommand("expand", "Short-time expansion report");
  expand->add_option("--config", config, "Noise model JSON")->required();
  expand->add_option("--sequence", sequence, "Pulse sequence spec")->required();
  expand->add_option("--words", words, "Also list word coefficients up to this order (<= 4)");

  auto* optimize = app.add_subcommand("optimize", "Minimize the third-order coefficient");
  optimize->add_option("--pulses", pulses, "Pulse count N")->required();
  optimize->add_option("--starts", starts, "Random starts");
  optimize->add_option("--seed", seed, "RNG seed");
  optimize->add_option("--out", out_path, "Output JSON (default stdout)");

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the coherence");
  mc->add_option("--config", config, "Noise model JSON")->required();
  mc->add_option("--sequence", sequence, "Pulse sequence spec")->required();
  mc->add_option("--t", t, "Time")->required();
  mc->add_option("--trajectories", trajectories, "Number of trajectories");
  mc->add_option("--seed", seed, "RNG seed");
  mc->add_option("--threads", threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  try {
    if (*validate) return cmd_validate(config, out);
    if (*curve_cmd) return cmd_curve(config, sequence, t_max, points, logarithmic, out_path, out);
    if (*compare) return cmd_compare(config, sequences, compare_t, out);
    if (*expand) return cmd_expand(config, sequence, words, out);
    if (*optimize) return cmd_optimize(pulses, starts, seed, out_path, out);
    if (*mc) return cmd_mc(config, sequence, t, trajectories, seed, threads, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace ddnoise::cli
