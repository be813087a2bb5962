#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwt/bnn.hpp"
#include "gwt/distributions.hpp"
#include "gwt/estimation.hpp"

namespace gwt::cli {

enum ExitStatus : int {
  kOk = 0,
  kCheckFailed = 1,
  kConfigError = 2,
  kOverflow = 3,
  kInsufficientData = 4,
};

inline constexpr std::size_t kDeskSamples = 100000;
inline constexpr std::size_t kFullSamples = 1000000;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Network section of a config document.
struct NetworkSection {
  std::size_t input_dim = 1;
  std::vector<std::size_t> widths;
  Activation activation = Activation::relu;
  std::vector<LayerPrior> priors;
  std::optional<std::uint64_t> input_seed;
  /// 1-based.
  std::size_t tracked_unit = 1;
  bool pool_units = false;
};

/// One schema for every command; unknown keys are rejected.
struct ExperimentConfig {
  std::optional<std::string> command;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  std::optional<NetworkSection> network;
  FitWindow fit_window;
  std::optional<std::string> suite;
  std::optional<std::string> out_dir;
  std::optional<DistributionSpec> distribution;
  Side side = Side::right;
};

/// Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

NetworkConfig to_network_config(const NetworkSection& net, std::uint64_t seed,
                                std::size_t n_samples);

/// Overrides applied on top of a config.
struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  bool full = false;
  std::optional<std::uint64_t> seed;
  /// Worker count; falls back to GWT_LAB_THREADS.
  std::optional<std::size_t> workers;
};

struct CurveRow {
  std::string label;
  double log_x = 0.0;
  double log_neg_log_survival = 0.0;
};

/// `label,log_x,log_neg_log_survival` with a header, 17 significant
/// digits and LF line endings.
std::string format_curves_csv(const std::vector<CurveRow>& rows);
std::vector<CurveRow> parse_curves_csv(std::string_view text);

/// Writes summary.json, curves.csv and run_info.json into `dir` through
/// temporary files renamed into place once every file is complete.
void write_bundle(const std::filesystem::path& dir, const nlohmann::json& summary,
                  const std::vector<CurveRow>& curves, const nlohmann::json& run_info);

/// Serialized summary text, as written to summary.json.
std::string dump_summary(const nlohmann::json& summary);

int cmd_bnn_experiment(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out,
                       std::ostream& err);

/// Samples come from `config.distribution` if present, else from `samples`.
int cmd_estimate_tail(const std::optional<ExperimentConfig>& config, std::istream* samples,
                      const RunOptions& opts, std::ostream& out, std::ostream& err);

int cmd_closure_suite(const ExperimentConfig& config, const RunOptions& opts, std::ostream& out,
                      std::ostream& err);

/// Entry point behind the gwt-lab executable.
int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace gwt::cli
