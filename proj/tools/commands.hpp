#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "config.hpp"

namespace cli {

// A checked inequality failed inside a cell; nothing is written.
class CellAssertion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string out_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

void cmd_ids(const RunConfig& cfg, const RunOptions& opt);
void cmd_folner_audit(const RunConfig& cfg, const RunOptions& opt);
void cmd_percolation(const RunConfig& cfg, const RunOptions& opt);
void cmd_continuity(const RunConfig& cfg, const RunOptions& opt);

}  // namespace cli
