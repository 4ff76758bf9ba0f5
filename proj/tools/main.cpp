#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "betamix/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"beta-mixing coefficients, couplings and deviation bounds"};
  app.require_subcommand(1);
  app.fallthrough();

  betamix::CommandConfig config;
  std::string output;
  std::uint64_t seed = 0;
  app.add_option("-o,--output", output, "write the artifact to this file");
  app.add_option("-f,--format", config.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", seed, "override the document seed");
  app.add_option("--threads", config.threads, "worker cap for simulations")->check(CLI::PositiveNumber);

  auto with_input = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("input", config.input_path, "JSON document")->required();
    return sub;
  };
  with_input("beta", "beta coefficients of a joint, process or Markov chain");
  with_input("couple", "Berbee coupling of a joint or process");
  with_input("entropy", "entropy estimate curve and covering numbers");
  with_input("bound", "deviation and weak-error bounds");
  with_input("regress", "one least-squares fit on generated data");
  with_input("simulate", "run Monte Carlo experiments");
  with_input("verify", "run experiments and fail unless every bound dominates");
  auto* partition = app.add_subcommand("partition", "m-steps partition of 1..n");
  partition->add_option("n", config.n)->required();
  partition->add_option("m", config.m)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  config.subcommand = app.get_subcommands().front()->get_name();
  if (!output.empty()) config.output_path = output;
  if (seed_opt->count() > 0) config.seed = seed;
  return betamix::run(config, std::cout, std::cerr);
}
