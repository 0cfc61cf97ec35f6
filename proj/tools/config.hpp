#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cli {

// Rejected configuration; `path` is a JSON pointer to the offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& msg) : std::runtime_error(msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Coordinate bound a * j + b.
struct Affine {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t at(int j) const { return a * j + b; }
};

struct VolumeSpec {
  enum class Kind { Folner, Ball, Box };
  std::string name;
  Kind kind = Kind::Folner;
  std::vector<Affine> lo, hi;  // Box only
};

struct ColouringSpec {
  std::string kind = "trivial";  // trivial | half_line_mod3 | percolation | periodic
  std::vector<std::string> alphabet;
  std::vector<std::uint64_t> weights;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> cutoff;
  int period_n = 1;
  std::vector<int> tile_colours;
};

struct OperatorSpec {
  std::string kind = "adjacency";  // adjacency | percolation | laplacian | zero | colour_table | periodic
  std::vector<int> retained;       // colour indices
  double edge_weight = 1.0;
  std::shared_ptr<OperatorSpec> base;
  std::vector<double> table;
  int k = 1;
  int range = 1;
  std::vector<std::vector<std::int64_t>> offsets;
  std::vector<std::vector<double>> blocks;  // row-major k x k per offset
};

struct FrequencySpec {
  std::string kind = "empirical";  // empirical | trivial | percolation
  std::string volume;              // empirical: reference sequence (default: first)
  std::optional<int> j;            // empirical: index (default: largest folner_j)
};

struct IdsOptions {
  bool unshrunk = false;  // also emit approximants on the unshrunk volumes
  bool clusters = false;  // emit eigenvalue clusters next to each approximant
  bool delta = false;     // measured delta against the frequency-side approximant
  bool frequency_side = false;
};

struct PercolationOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<std::vector<std::int64_t>>> domains;
  int volume_n = 100;
  double tolerance = 0.05;
};

struct ContinuityOptions {
  std::vector<double> eps;
  int volume_n = 20;
  double centre = 0.0;
  double width = 1.0;
  std::uint64_t table_seed = 1;
};

struct AuditOptions {
  std::vector<int> radii{1};
  int diameter_max_n = 8;
};

struct RunConfig {
  std::string group = "zd";
  int d = 1;
  std::vector<int> tile_n;
  std::vector<int> folner_j;
  std::vector<VolumeSpec> volumes;
  ColouringSpec colouring;
  OperatorSpec op;
  FrequencySpec freqs;
  double tau = 0.0;
  int workers = 1;
  IdsOptions ids;
  PercolationOptions percolation;
  ContinuityOptions continuity;
  AuditOptions audit;

  int rank() const { return group == "h3" ? 3 : d; }
  const VolumeSpec& volume(const std::string& name) const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

}  // namespace cli
