#pragma once

#include "rdpg/bayes.hpp"
#include "rdpg/gmm.hpp"
#include "rdpg/optimize.hpp"
#include "rdpg/surrogate.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdpg::cli {

/// Bad command line or config file; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  /// Set when --help was requested; holds the help text.
  std::optional<std::string> help;

  std::string spec = "curve51";
  Index n = 1000;
  Index d = 0;  ///< 0: the spec's dimension
  double rho = 1.0;
  std::uint64_t seed = 0;
  std::string method = "msle";
  std::string methods = "ase,ose,msle";
  int reps = 100;
  int k = 0;
  Index vertex = -1;
  double alpha = 0.05;
  std::string grid = "0:1:200";
  unsigned threads = 0;
  bool one_indexed = false;
  bool hollow = false;

  std::string graph;
  std::string truth;
  std::string estimate;
  std::string labels;
  std::string out;
  std::string out_graph;
  std::string out_truth;
  std::string out_labels;
  std::string out_chains;
  std::string out_json;
  std::string out_replicates;

  SgdConfig sgd;
  SgdConfig gd = gd_defaults();
  McmcConfig mcmc;
  SurrogateOptions surrogate;
  GmmConfig gmm;
};

/// Subcommand names in help order.
const std::vector<std::string>& subcommands();

/// Parses argv (argv[0] is the program name). Values from --config are
/// applied first and explicit flags override them. Throws UsageError.
RunConfig parse_args(int argc, const char* const* argv);

/// Applies a JSON config document (schema 1) to cfg. Unknown keys and
/// type mismatches throw UsageError.
void apply_config_json(const std::string& text, RunConfig& cfg);

/// Runs the subcommand, writes the declared outputs and prints a one-line
/// JSON summary to `out`. Returns 0 on success, 1 on computational failure,
/// 2 on usage errors found during the run (such as a missing input file).
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + dispatch with exit-code mapping.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rdpg::cli
