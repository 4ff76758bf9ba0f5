#include "betamix/cli.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "betamix/blocking.hpp"
#include "betamix/bounds.hpp"
#include "betamix/coupling.hpp"
#include "betamix/entropy.hpp"
#include "betamix/error.hpp"
#include "betamix/io.hpp"
#include "betamix/mixing.hpp"
#include "betamix/regression.hpp"
#include "betamix/simulate.hpp"

namespace betamix {
namespace {

struct Output {
  std::string text;
  int status = 0;
};

std::string pick_format(const CommandConfig& config, const char* fallback) {
  const std::string f = config.format.empty() ? fallback : config.format;
  if (f != "csv" && f != "json") throw MalformedInput("--format must be csv or json");
  return f;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::vector<std::size_t> m_values(const Json& doc) {
  std::vector<std::size_t> ms;
  if (doc.contains("m")) {
    for (const auto& v : doc["m"]) ms.push_back(v.get<std::size_t>());
  } else {
    const std::size_t top = doc.value("m_max", std::size_t{10});
    for (std::size_t m = 1; m <= top; ++m) ms.push_back(m);
  }
  if (ms.empty()) throw MalformedInput("beta: no m values");
  return ms;
}

Output run_beta(const CommandConfig& config, const Json& doc) {
  if (doc.contains("joint")) {
    const double beta = beta_coefficient(read_joint(doc["joint"]));
    return {dump(Json{{"beta", beta}})};
  }
  const std::string format = pick_format(config, "csv");
  const auto ms = m_values(doc);
  std::vector<std::pair<std::size_t, double>> rows;
  if (doc.contains("chain")) {
    const MarkovChainSpec chain = read_chain(doc["chain"]);
    const std::size_t horizon = doc.value("horizon", kDefaultMarkovHorizon);
    for (std::size_t m : ms) rows.emplace_back(m, markov_beta(chain, m, horizon).value);
  } else if (doc.contains("process")) {
    const Process process(read_joint(doc["process"]));
    for (std::size_t m : ms) rows.emplace_back(m, beta_max(process, m));
  } else {
    throw MalformedInput("beta: expected \"joint\", \"chain\" or \"process\"");
  }

  const std::string fit = doc.value("fit", std::string("subexponential"));
  std::optional<MixingRate> rate;
  if (fit != "none") {
    if (fit != "subexponential" && fit != "subpolynomial") {
      throw MalformedInput("beta: fit must be subexponential, subpolynomial or none");
    }
    RateFitOptions options;
    if (doc.contains("gamma")) options.gamma = doc["gamma"].get<double>();
    try {
      rate = fit_mixing_rate(rows, fit == "subexponential" ? RateModel::Subexponential
                                                           : RateModel::Subpolynomial,
                             options);
    } catch (const DegenerateFit&) {
      // Every beta is zero: no envelope column.
    }
  }

  if (format == "json") {
    Json j{{"rows", Json::array()}};
    for (const auto& [m, beta] : rows) {
      Json row{{"m", m}, {"beta", beta}};
      if (rate) row["envelope"] = rate->envelope(static_cast<double>(m));
      j["rows"].push_back(row);
    }
    if (rate) {
      j["fit"] = {{"model", fit}, {"a", rate->a}, {"gamma", rate->gamma}};
      if (rate->model == RateModel::Subexponential) j["fit"]["b"] = rate->b;
    }
    return {dump(j)};
  }
  std::ostringstream csv;
  csv << "m,beta,envelope\n";
  for (const auto& [m, beta] : rows) {
    csv << m << ',' << format_double(beta) << ',';
    if (rate) csv << format_double(rate->envelope(static_cast<double>(m)));
    csv << '\n';
  }
  return {csv.str()};
}

Output run_couple(const CommandConfig& config, const Json& doc) {
  const std::string format = pick_format(config, "json");
  JointPmf original = doc.contains("joint") ? read_joint(doc["joint"])
                      : doc.contains("process")
                          ? read_joint(doc["process"])
                          : throw MalformedInput("couple: expected \"joint\" or \"process\"");
  const CouplingResult result =
      doc.contains("joint") ? berbee_couple(original) : generalized_berbee(original);
  const CouplingReport report = verify_coupling(result, original);
  if (format == "json") return {dump(to_json(result, report))};
  std::ostringstream csv;
  csv << "axis,mismatch\n";
  for (std::size_t i = 0; i < result.mismatch_probs.size(); ++i) {
    csv << result.starred_of[i] << ',' << format_double(result.mismatch_probs[i]) << '\n';
  }
  return {csv.str()};
}

Output run_partition(const CommandConfig& config) {
  return {partition_string(m_steps_partition(config.n, config.m)) + "\n"};
}

std::vector<double> entropy_points(const Json& doc, const Json& family) {
  if (doc.contains("points")) return doc["points"].get<std::vector<double>>();
  if (family.value("kind", std::string("table")) == "table" && family.contains("points")) {
    std::vector<double> pts(family["points"].get<std::size_t>());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = static_cast<double>(i);
    return pts;
  }
  throw MalformedInput("entropy: the family needs evaluation \"points\"");
}

Output run_entropy(const CommandConfig& config, const Json& doc) {
  const std::string format = pick_format(config, "csv");
  if (!doc.contains("estimate")) throw MalformedInput("entropy: missing \"estimate\"");
  const EntropyEstimate estimate = read_entropy(doc["estimate"]);
  const auto radii = doc.at("radii").get<std::vector<double>>();
  std::optional<Matrix> values;
  if (doc.contains("family")) {
    const FunctionFamily family = read_family(doc["family"]);
    values = family.evaluate(entropy_points(doc, doc["family"]));
  }

  std::vector<double> lambdas;
  for (double r : radii) lambdas.push_back(estimate(0, r));
  if (format == "csv") {
    std::ostringstream csv;
    csv << "r,lambda,exp_lambda\n";
    for (std::size_t i = 0; i < radii.size(); ++i) {
      csv << format_double(radii[i]) << ',' << format_double(lambdas[i]) << ','
          << format_double(std::exp(lambdas[i])) << '\n';
    }
    return {csv.str()};
  }
  Json j{{"rows", Json::array()}};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    Json row{{"r", radii[i]}, {"lambda", lambdas[i]}, {"exp_lambda", std::exp(lambdas[i])}};
    if (values) {
      const bool exact = values->size() <= kExactCoverLimit;
      row["cover"] = exact ? covering_number_exact(*values, radii[i])
                           : covering_number_greedy(*values, radii[i]);
      row["cover_method"] = exact ? "exact" : "greedy";
    }
    j["rows"].push_back(row);
  }
  return {dump(j)};
}

double beta_for(const Json& doc, const BoundParams& params) {
  if (doc.contains("beta")) return doc["beta"].get<double>();
  if (params.mixing) return std::min(1.0, params.mixing->envelope(static_cast<double>(params.m)));
  throw MalformedInput("bound: supply \"beta\" or mixing parameters a, b, gamma_mix");
}

Output run_bound(const CommandConfig& config, const Json& doc) {
  const std::string kind = doc.value("kind", std::string("deviation"));
  const BoundParams params = read_params(doc.at("params"));
  if (kind == "deviation" || kind == "independent") {
    const std::string format = pick_format(config, "csv");
    const EntropyEstimate entropy =
        doc.contains("entropy") ? read_entropy(doc["entropy"]) : sauer_shelah_estimate(params.V, params.B);
    const auto ts = doc.at("t_grid").get<std::vector<double>>();
    std::vector<double> bounds;
    if (kind == "deviation") {
      const double beta = beta_for(doc, params);
      for (double t : ts) bounds.push_back(beta_deviation_bound(params, entropy, t, beta));
    } else {
      const std::size_t size = doc.value("size", params.n);
      for (double t : ts) bounds.push_back(indep_deviation_bound(params, entropy, size, t));
    }
    if (format == "json") {
      Json j{{"rows", Json::array()}};
      for (std::size_t i = 0; i < ts.size(); ++i) j["rows"].push_back({{"t", ts[i]}, {"bound", bounds[i]}});
      return {dump(j)};
    }
    std::ostringstream csv;
    csv << "t,bound\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
      csv << format_double(ts[i]) << ',' << format_double(bounds[i]) << '\n';
    }
    return {csv.str()};
  }
  if (kind == "weak_error") {
    const double bias = doc.value("bias", 0.0);
    return {dump(to_json(weak_error_bound(params, bias, beta_for(doc, params))))};
  }
  if (kind == "subexp_rate") return {dump(Json{{"rate", subexp_rate(params)}})};
  if (kind == "subpoly_rate") {
    Json j{{"rate", subpoly_rate(params)}};
    if (doc.contains("C_variance")) {
      const auto t = subpoly_tradeoff(params, doc["C_variance"].get<double>());
      j["tradeoff"] = {{"x", t.x}, {"variance_part", t.variance_part}, {"mixing_part", t.mixing_part}};
    }
    return {dump(j)};
  }
  if (kind == "error_curve") {
    const auto grid = doc.at("x_grid").get<std::vector<double>>();
    const auto curve = statistical_error_curve(params, grid, doc.at("C_variance").get<double>());
    return {dump(Json{{"grid_x", curve.grid_x},
                      {"grid_value", curve.grid_value},
                      {"analytic_x", curve.analytic_x},
                      {"analytic_value", curve.analytic_value},
                      {"closed_form", curve.closed_form}})};
  }
  throw MalformedInput("bound: unknown kind \"" + kind + "\"");
}

Output run_regress(const CommandConfig& config, const Json& doc) {
  pick_format(config, "json");
  GeneratorSpec generator = read_generator(doc.at("generator"));
  if (config.seed) generator.seed = *config.seed;
  const FunctionFamily family = read_family(doc.at("family"));
  const std::size_t n = doc.at("n").get<std::size_t>();
  const double B = doc.value("B", generator.response_bound);
  const Dataset data = generate(generator, n, doc.value("replication", std::size_t{0}));
  const RegressionResult fit = fit_least_squares(data, family, B);
  Json j{{"n", n},
         {"empirical_risk", fit.empirical_risk},
         {"weak_error", weak_error_of(data, fit.truncated)},
         {"bias", approximation_bias(data, family)},
         {"ridge_used", fit.ridge_used}};
  if (fit.member) j["member"] = *fit.member;
  if (!fit.coefficients.empty()) j["coefficients"] = fit.coefficients;
  return {dump(j)};
}

Output run_experiments(const CommandConfig& config, const Json& doc, bool verify) {
  const std::string format = pick_format(config, verify ? "json" : "csv");
  auto specs = read_experiments(doc);
  if (config.seed) {
    for (auto& s : specs) s.generator.seed = *config.seed;
  }
  std::vector<ExperimentReport> reports;
  bool ok = true;
  for (const auto& s : specs) {
    reports.push_back(run_experiment(s, config.threads));
    ok = ok && reports.back().all_dominant();
  }
  Output result;
  result.status = verify && !ok ? 1 : 0;
  if (format == "json") {
    Json j{{"all_dominant", ok}, {"experiments", Json::array()}};
    for (const auto& r : reports) j["experiments"].push_back(to_json(r));
    result.text = dump(j);
    return result;
  }
  bool has_dev = false;
  bool has_weak = false;
  for (const auto& r : reports) {
    has_dev = has_dev || !r.deviation.empty();
    has_weak = has_weak || !r.weak.empty();
  }
  if (has_dev) result.text += deviation_csv(reports);
  if (has_dev && has_weak) result.text += "\n";
  if (has_weak) result.text += weak_error_csv(reports);
  return result;
}

}  // namespace

int run(const CommandConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Output result;
    if (config.subcommand == "partition") {
      result = run_partition(config);
    } else {
      if (config.input_path.empty()) throw MalformedInput(config.subcommand + ": no input document");
      const Json doc = load_json(config.input_path);
      if (config.subcommand == "beta") {
        result = run_beta(config, doc);
      } else if (config.subcommand == "couple") {
        result = run_couple(config, doc);
      } else if (config.subcommand == "entropy") {
        result = run_entropy(config, doc);
      } else if (config.subcommand == "bound") {
        result = run_bound(config, doc);
      } else if (config.subcommand == "regress") {
        result = run_regress(config, doc);
      } else if (config.subcommand == "simulate") {
        result = run_experiments(config, doc, false);
      } else if (config.subcommand == "verify") {
        result = run_experiments(config, doc, true);
      } else {
        throw MalformedInput("unknown subcommand \"" + config.subcommand + "\"");
      }
    }
    if (config.output_path) {
      write_file(*config.output_path, result.text);
    } else {
      out << result.text;
    }
    if (result.status != 0) err << "betamix: verification failed: a dominance flag is false\n";
    return result.status;
  } catch (const IoError& e) {
    err << "betamix: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "betamix: " << e.what() << '\n';
    return 1;
  } catch (const Json::exception& e) {
    err << "betamix: malformed input: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace betamix
