#include "betamix/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "betamix/error.hpp"

namespace betamix {
namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw MalformedInput(what + ": expected a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.count(key)) throw MalformedInput(what + ": unknown key \"" + key + "\"");
  }
}

const Json& field(const Json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedInput(what + ": missing \"" + key + "\"");
  return *it;
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw MalformedInput(what + ": expected a number");
  return j.get<double>();
}

std::size_t count(const Json& j, const std::string& what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    throw MalformedInput(what + ": expected a nonnegative integer");
  }
  if (j.is_number_integer() && j.get<long long>() < 0) {
    throw MalformedInput(what + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) throw MalformedInput(what + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

Matrix matrix(const Json& j, const std::string& what) {
  if (!j.is_array()) throw MalformedInput(what + ": expected an array of arrays");
  Matrix out;
  for (const auto& row : j) out.push_back(numbers(row, what));
  return out;
}

std::string label(const Json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

std::vector<std::string> labels(const Json& j, const std::string& what) {
  if (!j.is_array()) throw MalformedInput(what + ": expected an array of labels");
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(label(v));
  return out;
}

std::optional<double> optional_number(const Json& j, const char* key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return number(*it, what + "." + key);
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw MalformedInput(path + ": invalid JSON: " + e.what());
  }
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out.flush()) throw IoError("failed writing " + path);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

JointPmf read_joint(const Json& j) {
  check_keys(j, {"axes", "probs"}, "joint");
  const Json& axes_json = field(j, "axes", "joint");
  if (!axes_json.is_array()) throw MalformedInput("joint.axes: expected an array of axes");
  std::vector<JointPmf::Axis> axes;
  for (const auto& axis : axes_json) axes.push_back(labels(axis, "joint.axes"));
  return JointPmf(std::move(axes), numbers(field(j, "probs", "joint"), "joint.probs"));
}

MarkovChainSpec read_chain(const Json& j) {
  check_keys(j, {"states", "transition", "initial"}, "chain");
  auto states = labels(field(j, "states", "chain"), "chain.states");
  auto transition = matrix(field(j, "transition", "chain"), "chain.transition");
  auto initial = numbers(field(j, "initial", "chain"), "chain.initial");
  MarkovChainSpec chain{states, std::move(transition), FinitePmf(states, std::move(initial))};
  chain.validate();
  return chain;
}

FunctionFamily read_family(const Json& j) {
  if (!j.is_object()) throw MalformedInput("family: expected a JSON object");
  const std::string kind = j.value("kind", std::string("table"));
  if (kind == "table") {
    check_keys(j, {"kind", "points", "values", "vc"}, "family");
    Matrix values = matrix(field(j, "values", "family"), "family.values");
    const std::size_t points = count(field(j, "points", "family"), "family.points");
    for (const auto& row : values) {
      if (row.size() != points) throw MalformedInput("family.values: rows must have `points` entries");
    }
    std::optional<std::size_t> vc;
    if (j.contains("vc")) vc = count(j["vc"], "family.vc");
    return explicit_table(std::move(values), vc);
  }
  if (kind == "threshold") {
    check_keys(j, {"kind", "thresholds", "B"}, "family");
    const auto thresholds = numbers(field(j, "thresholds", "family"), "family.thresholds");
    return threshold_family(thresholds, number(field(j, "B", "family"), "family.B"));
  }
  if (kind == "linear_span") {
    check_keys(j, {"kind", "dim", "B"}, "family");
    const std::size_t dim = count(field(j, "dim", "family"), "family.dim");
    if (dim == 0) throw MalformedInput("family.dim: must be positive");
    std::vector<FunctionFamily::Function> basis;
    for (std::size_t p = 0; p < dim; ++p) {
      basis.emplace_back([p](double x) { return std::pow(x, static_cast<double>(p)); });
    }
    return linear_span(std::move(basis), number(field(j, "B", "family"), "family.B"));
  }
  if (kind == "neural_net") {
    check_keys(j, {"kind", "networks", "B"}, "family");
    std::vector<NetworkParams> nets;
    const Json& list = field(j, "networks", "family");
    if (!list.is_array()) throw MalformedInput("family.networks: expected an array");
    for (const auto& net : list) {
      check_keys(net, {"bias", "weights", "slopes", "shifts"}, "family.networks[]");
      nets.push_back({number(field(net, "bias", "network"), "network.bias"),
                      numbers(field(net, "weights", "network"), "network.weights"),
                      numbers(field(net, "slopes", "network"), "network.slopes"),
                      numbers(field(net, "shifts", "network"), "network.shifts")});
    }
    return neural_net_family(nets, number(field(j, "B", "family"), "family.B"));
  }
  throw MalformedInput("family: unknown kind \"" + kind + "\"");
}

EntropyEstimate read_entropy(const Json& j) {
  if (!j.is_object()) throw MalformedInput("entropy: expected a JSON object");
  const std::string kind = j.value("kind", std::string());
  if (kind == "sauer_shelah") {
    check_keys(j, {"kind", "V", "B"}, "entropy");
    return sauer_shelah_estimate(count(field(j, "V", "entropy"), "entropy.V"),
                                 number(field(j, "B", "entropy"), "entropy.B"));
  }
  if (kind == "neural_net") {
    check_keys(j, {"kind", "N", "d", "B"}, "entropy");
    return neural_net_estimate(count(field(j, "N", "entropy"), "entropy.N"),
                               count(field(j, "d", "entropy"), "entropy.d"),
                               number(field(j, "B", "entropy"), "entropy.B"));
  }
  if (kind == "finite") {
    check_keys(j, {"kind", "members"}, "entropy");
    return finite_family_estimate(count(field(j, "members", "entropy"), "entropy.members"));
  }
  throw MalformedInput("entropy: unknown kind \"" + kind + "\"");
}

BoundParams read_params(const Json& j) {
  check_keys(j,
             {"epsilon", "c", "gamma", "gamma_prime", "lambda", "B", "V", "n", "m", "a", "b",
              "gamma_mix", "C"},
             "params");
  BoundParams p;
  const std::string w = "params";
  if (auto v = optional_number(j, "epsilon", w)) p.epsilon = *v;
  if (auto v = optional_number(j, "c", w)) p.c = *v;
  if (auto v = optional_number(j, "gamma", w)) p.gamma = *v;
  if (auto v = optional_number(j, "gamma_prime", w)) p.gamma_prime = *v;
  if (auto v = optional_number(j, "lambda", w)) p.lambda = *v;
  if (auto v = optional_number(j, "B", w)) p.B = *v;
  if (j.contains("V")) p.V = count(j["V"], "params.V");
  if (j.contains("n")) p.n = count(j["n"], "params.n");
  if (j.contains("m")) p.m = count(j["m"], "params.m");
  if (auto v = optional_number(j, "C", w)) p.C = *v;
  if (j.contains("a")) {
    MixingRate rate;
    rate.a = number(j["a"], "params.a");
    if (j.contains("b")) {
      rate.model = RateModel::Subexponential;
      rate.b = number(j["b"], "params.b");
      rate.gamma = optional_number(j, "gamma_mix", w).value_or(1.0);
    } else {
      rate.model = RateModel::Subpolynomial;
      rate.gamma = number(field(j, "gamma_mix", w), "params.gamma_mix");
    }
    p.mixing = rate;
  } else if (j.contains("b") || j.contains("gamma_mix")) {
    throw MalformedInput("params: mixing parameters need \"a\"");
  }
  return p;
}

GeneratorSpec read_generator(const Json& j) {
  check_keys(j,
             {"kind", "chain", "lag", "innovation", "law", "phi", "noise", "response_bound", "seed"},
             "generator");
  GeneratorSpec g;
  const std::string kind = field(j, "kind", "generator").get<std::string>();
  if (kind == "markov") {
    g.kind = GeneratorSpec::Kind::Markov;
    g.chain = read_chain(field(j, "chain", "generator"));
  } else if (kind == "m-dependent") {
    g.kind = GeneratorSpec::Kind::MDependent;
    g.dependence_lag = count(field(j, "lag", "generator"), "generator.lag");
    g.innovation = FinitePmf::over_indices(numbers(field(j, "innovation", "generator"), "generator.innovation"));
  } else if (kind == "iid") {
    g.kind = GeneratorSpec::Kind::Iid;
    g.law = FinitePmf::over_indices(numbers(field(j, "law", "generator"), "generator.law"));
  } else {
    throw MalformedInput("generator: unknown kind \"" + kind + "\"");
  }
  const Json& phi = field(j, "phi", "generator");
  if (phi.is_array() && !phi.empty() && phi.front().is_array()) {
    g.phi = matrix(phi, "generator.phi");
  } else {
    g.phi = {numbers(phi, "generator.phi")};
  }
  if (j.contains("noise")) {
    const Json& noise = j["noise"];
    check_keys(noise, {"values", "probs"}, "generator.noise");
    g.noise_values = numbers(field(noise, "values", "noise"), "noise.values");
    g.noise_probs = numbers(field(noise, "probs", "noise"), "noise.probs");
  }
  g.response_bound = number(field(j, "response_bound", "generator"), "generator.response_bound");
  if (j.contains("seed")) g.seed = j["seed"].get<std::uint64_t>();
  g.validate();
  return g;
}

ExperimentSpec read_experiment(const Json& j) {
  check_keys(j,
             {"name", "generator", "family", "params", "t_grid", "n_grid", "replications", "seed",
              "entropy", "beta"},
             "experiment");
  ExperimentSpec e;
  e.name = j.value("name", std::string());
  e.generator = read_generator(field(j, "generator", "experiment"));
  if (j.contains("seed")) e.generator.seed = j["seed"].get<std::uint64_t>();
  e.family = read_family(field(j, "family", "experiment"));
  e.params = read_params(field(j, "params", "experiment"));
  e.replications = count(field(j, "replications", "experiment"), "experiment.replications");
  if (e.replications == 0) throw MalformedInput("experiment.replications: must be positive");
  const bool t = j.contains("t_grid");
  const bool n = j.contains("n_grid");
  if (t == n) throw MalformedInput("experiment: give exactly one of t_grid and n_grid");
  if (t) {
    e.type = ExperimentSpec::Type::Deviation;
    e.t_grid = numbers(j["t_grid"], "experiment.t_grid");
    if (!e.family.is_finite()) throw MalformedInput("experiment: deviation runs need a finite family");
    e.params.validate_deviation();
  } else {
    e.type = ExperimentSpec::Type::WeakError;
    if (!j["n_grid"].is_array()) throw MalformedInput("experiment.n_grid: expected an array");
    for (const auto& v : j["n_grid"]) e.n_grid.push_back(count(v, "experiment.n_grid"));
  }
  if (j.contains("entropy")) e.entropy = read_entropy(j["entropy"]);
  if (j.contains("beta")) e.beta = number(j["beta"], "experiment.beta");
  return e;
}

std::vector<ExperimentSpec> read_experiments(const Json& j) {
  std::vector<ExperimentSpec> out;
  if (j.is_object() && j.contains("experiments")) {
    check_keys(j, {"experiments"}, "suite");
    if (!j["experiments"].is_array()) throw MalformedInput("suite.experiments: expected an array");
    for (const auto& e : j["experiments"]) out.push_back(read_experiment(e));
  } else {
    out.push_back(read_experiment(j));
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t threads) {
  ExperimentReport report;
  if (spec.type == ExperimentSpec::Type::Deviation) {
    std::vector<double> points(spec.generator.state_count());
    for (std::size_t s = 0; s < points.size(); ++s) points[s] = static_cast<double>(s);
    const Matrix values = spec.family.evaluate(points);
    report = deviation_experiment(spec.generator, values, spec.params, spec.t_grid,
                                  spec.replications, threads, spec.entropy, spec.beta);
  } else {
    report = weak_error_experiment(spec.generator, spec.family, spec.params, spec.n_grid,
                                   spec.replications, threads);
  }
  report.name = spec.name;
  return report;
}

Json to_json(const JointPmf& joint) {
  return Json{{"axes", joint.axes()}, {"probs", joint.probs()}};
}

Json to_json(const CouplingResult& result, const CouplingReport& report) {
  Json j = to_json(result.extended_joint);
  j["kind"] = result.kind == CouplingKind::Pair ? "pair" : "sequence";
  j["original_axes"] = result.original_axes;
  j["starred_of"] = result.starred_of;
  j["mismatch"] = result.mismatch_probs;
  j["report"] = {{"original_marginal_error", report.original_marginal_error},
                 {"starred_marginal_error", report.starred_marginal_error},
                 {"independence_error", report.independence_error},
                 {"mismatch_error", report.mismatch_error}};
  return j;
}

Json to_json(const WeakErrorBreakdown& b) {
  return Json{{"variance_term", b.variance_term},
              {"beta_error_term", b.beta_error_term},
              {"scaled_bias_term", b.scaled_bias_term},
              {"total", b.total}};
}

namespace {

Json params_json(const BoundParams& p) {
  Json j{{"epsilon", p.epsilon}, {"c", p.c},         {"gamma", p.gamma}, {"gamma_prime", p.gamma_prime},
         {"lambda", p.lambda},   {"B", p.B},         {"V", p.V},         {"n", p.n},
         {"m", p.m}};
  if (p.mixing) {
    j["a"] = p.mixing->a;
    if (p.mixing->model == RateModel::Subexponential) j["b"] = p.mixing->b;
    j["gamma_mix"] = p.mixing->gamma;
  }
  if (p.C) j["C"] = *p.C;
  return j;
}

}  // namespace

Json to_json(const ExperimentReport& r) {
  Json j{{"name", r.name},
         {"generator", r.generator},
         {"seed", r.seed},
         {"replications", r.replications},
         {"params", params_json(r.params)},
         {"all_dominant", r.all_dominant()}};
  if (!r.deviation.empty()) {
    Json rows = Json::array();
    for (const auto& d : r.deviation) {
      rows.push_back({{"n", d.n},
                      {"m", d.m},
                      {"t", d.t},
                      {"frequency", d.frequency},
                      {"stderr", d.std_error},
                      {"bound", d.bound},
                      {"dominant", d.dominant},
                      {"resolved", d.resolved},
                      {"vacuous", d.vacuous}});
    }
    j["deviation"] = rows;
  }
  if (!r.weak.empty()) {
    Json rows = Json::array();
    for (const auto& w : r.weak) {
      rows.push_back({{"n", w.n},
                      {"m", w.m},
                      {"replications", w.replications},
                      {"weak_error", w.weak_error},
                      {"stderr", w.std_error},
                      {"bias", w.bias},
                      {"bound_total", w.bound_total},
                      {"bound_variance", w.bound_variance},
                      {"bound_beta", w.bound_beta},
                      {"beta_at_m", w.beta_at_m},
                      {"dominant", w.dominant}});
    }
    j["weak"] = rows;
  }
  if (r.slope) j["slope"] = *r.slope;
  return j;
}

std::string partition_string(const Partition& partition) {
  std::string out = "[";
  for (std::size_t k = 0; k < partition.size(); ++k) {
    if (k > 0) out += ",";
    out += "[";
    const auto block = partition.block(k);
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (i > 0) out += ",";
      out += std::to_string(block[i]);
    }
    out += "]";
  }
  return out + "]";
}

std::string deviation_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "n,m,t,frequency,stderr,bound,dominant,resolved,vacuous\n";
  for (const auto& r : reports) {
    for (const auto& d : r.deviation) {
      out << d.n << ',' << d.m << ',' << format_double(d.t) << ',' << format_double(d.frequency)
          << ',' << format_double(d.std_error) << ',' << format_double(d.bound) << ','
          << (d.dominant ? "true" : "false") << ',' << (d.resolved ? "true" : "false") << ','
          << (d.vacuous ? "true" : "false") << '\n';
    }
  }
  return out.str();
}

std::string weak_error_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "n,m,replications,weak_error,stderr,bias,bound_total,bound_variance,bound_beta\n";
  for (const auto& r : reports) {
    for (const auto& w : r.weak) {
      out << w.n << ',' << w.m << ',' << w.replications << ',' << format_double(w.weak_error)
          << ',' << format_double(w.std_error) << ',' << format_double(w.bias) << ','
          << format_double(w.bound_total) << ',' << format_double(w.bound_variance) << ','
          << format_double(w.bound_beta) << '\n';
    }
  }
  return out.str();
}

}  // namespace betamix
