#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "betamix/blocking.hpp"
#include "betamix/bounds.hpp"
#include "betamix/coupling.hpp"
#include "betamix/entropy.hpp"
#include "betamix/mixing.hpp"
#include "betamix/pmf.hpp"
#include "betamix/simulate.hpp"

namespace betamix {

using Json = nlohmann::json;

// Throws IoError when the file cannot be read, MalformedInput on bad JSON.
Json load_json(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Shortest round-trip decimal ("%.17g" trimmed).
std::string format_double(double x);

JointPmf read_joint(const Json& j);
MarkovChainSpec read_chain(const Json& j);
FunctionFamily read_family(const Json& j);
EntropyEstimate read_entropy(const Json& j);
BoundParams read_params(const Json& j);
GeneratorSpec read_generator(const Json& j);

struct ExperimentSpec {
  enum class Type { Deviation, WeakError };

  std::string name;
  Type type = Type::Deviation;
  GeneratorSpec generator;
  FunctionFamily family;
  BoundParams params;
  std::vector<double> t_grid;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 0;
  std::optional<EntropyEstimate> entropy;
  std::optional<double> beta;
};
ExperimentSpec read_experiment(const Json& j);
// A suite {"experiments": [...]} or a single experiment document.
std::vector<ExperimentSpec> read_experiments(const Json& j);

ExperimentReport run_experiment(const ExperimentSpec& spec, std::size_t threads);

Json to_json(const JointPmf& joint);
Json to_json(const CouplingResult& result, const CouplingReport& report);
Json to_json(const WeakErrorBreakdown& breakdown);
Json to_json(const ExperimentReport& report);
std::string partition_string(const Partition& partition);

std::string deviation_csv(const std::vector<ExperimentReport>& reports);
std::string weak_error_csv(const std::vector<ExperimentReport>& reports);

}  // namespace betamix
