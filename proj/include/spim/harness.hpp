#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spim/anneal.hpp"
#include "spim/graph.hpp"
#include "spim/optics.hpp"

namespace spim {

/// Invalid configuration; the CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { generate, solve, sweep_density, sweep_noise, verify, bench };

std::string to_string(Task task);
Task parse_task(const std::string& text);

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "SPIM_OUTPUT_ROOT";

struct ExperimentConfig {
  Task task = Task::solve;

  // Instance source: a file (optionally with its encoding) or the generator.
  std::string instance_path;
  std::string encoding_path;
  std::size_t n = 64;
  double density = 1.0;
  int sign = 1;
  std::uint64_t seed = 1;
  std::size_t repetitions = 1;  // consecutive seeds seed, seed+1, ...

  std::vector<std::string> solvers{"euler-sim"};
  std::string reference;  // solver compared against in summaries; empty = none

  AnnealParams anneal;
  std::vector<double> densities{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> noise_levels{0.0, 0.02, 0.03, 0.05, 0.1};
  std::size_t sg_starts = 1;
  std::size_t random_samples = 1000;

  OpticalGeometry geometry;

  std::size_t bench_repeats = 20;
  std::size_t verify_cases = 200;

  std::string output;  // empty: $SPIM_OUTPUT_ROOT, else ./spim-out
  std::size_t workers = 0;  // 0: hardware concurrency
  bool traces = true;

  void validate() const;
};

/// Keys accepted in config files and as CLI flags, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Throws ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat "key = value" document; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig read_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Every key with its resolved value, one per line, in canonical order.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a over the canonical settings that affect results (output location and
/// worker count excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Directory that receives the artifacts of `config`: <root>/<task>-<hash>.
std::filesystem::path run_directory(const ExperimentConfig& config);

/// Fixed results columns.
inline constexpr const char* kResultsHeader =
    "solver,n,density,sign,noise_level,seed,best_cut,hamiltonian,iterations,wall_time_s";

struct RunOutcome {
  int status = kExitOk;
  std::filesystem::path directory;
};

/// Executes the task and writes its artifacts. Throws ConfigError for invalid
/// settings and std::exception for runtime failures.
RunOutcome run(const ExperimentConfig& config, std::ostream& log);

/// Exception-to-exit-status wrapper around run().
int run_main(const ExperimentConfig& config, std::ostream& log, std::ostream& err);

/// Mean and two-sided 95% interval of the mean (Student t).
struct MeanInterval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};
MeanInterval mean_interval(const std::vector<double>& values);

/// 100 (a - ref) / |ref|; 0 when ref is 0.
double improvement_pct(double value, double reference);

}  // namespace spim
