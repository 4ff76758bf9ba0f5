#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace betamix {

struct CommandConfig {
  // beta | couple | partition | entropy | bound | regress | simulate | verify
  std::string subcommand;
  std::string input_path;
  std::optional<std::string> output_path;
  std::string format;  // csv | json; empty picks the subcommand default
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::size_t n = 0;  // partition only
  std::size_t m = 0;
};

// Exit status: 0 success, 1 domain / hypothesis / malformed input, 2 I/O.
// Output goes to config.output_path when set, else to `out`, and is written
// only after the whole artifact has been produced.
int run(const CommandConfig& config, std::ostream& out, std::ostream& err);

}  // namespace betamix
