#pragma once

#include "rdpg/bayes.hpp"
#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"
#include "rdpg/models.hpp"
#include "rdpg/optimize.hpp"
#include "rdpg/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace rdpg {

/// min over orthogonal W of ||Xbar W - sqrt(rho) X0||_F^2
double sse(const Matrix& xbar, const LatentTruth& truth);

/// (1/n) sum_i tr(G0_i^-1), the limit of the estimator's SSE.
double asymptotic_sse(const LatentTruth& truth);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// |xhat| -/+ z_{1-alpha/2} / sqrt(n ghat). Requires ghat > 0 and
/// 0 < alpha <= 1.
Interval conf_interval_1d(double xhat, double ghat, Index n, double alpha);

/// {x : (x - center)^T shape (x - center) <= radius}; an infinite radius
/// covers everything. A region without `valid` marks a missing estimate.
struct Region {
  Vector center;
  Matrix shape;
  double radius = std::numeric_limits<double>::infinity();
  bool valid = false;

  bool covers(const Vector& x) const;
};

/// What a coverage method produces for one replicate: the point estimate
/// used for alignment and one region per vertex.
struct CoverageFit {
  Matrix estimate;
  std::vector<Region> regions;
};

using CoverageMethod = std::function<CoverageFit(const Replicate& rep, std::uint64_t seed)>;

/// Wald region around the surrogate estimate: the interval of
/// conf_interval_1d when d = 1, the ellipsoid with shape n G(xhat) and
/// chi-square radius otherwise.
CoverageMethod msle_ci_method(const SgdConfig& cfg, double alpha, SurrogateOptions opts = {});

/// Posterior credible sets from bayes_all.
CoverageMethod bayes_credible_method(const McmcConfig& cfg, double alpha, SurrogateOptions opts = {});

struct CoverageReport {
  std::vector<double> coverage;  ///< per vertex, over non-missing replicates
  std::vector<int> counted;      ///< non-missing replicates per vertex
  double nominal = 0.95;
  int reps = 0;
  long missing = 0;              ///< vertex-replicate pairs without a region
  int failed_reps = 0;           ///< replicates where the method threw

  double mean_coverage() const;
};

struct CoverageConfig {
  double nominal = 0.95;
  unsigned threads = 0;
};

/// Simulates `reps` data sets from `spec`, runs the method on each, aligns
/// the truth to the estimate (sign flip for d = 1, Procrustes otherwise,
/// target sqrt(rho) W x0_i) and records containment per vertex.
CoverageReport coverage_experiment(const ModelSpec& spec, const CoverageMethod& method, int reps,
                                   std::uint64_t seed, const CoverageConfig& cfg = {});

enum class Method { kAse, kOse, kMsle, kGd, kBayes };

Method parse_method(const std::string& name);
std::string method_name(Method m);
std::vector<Method> parse_methods(const std::string& list);

struct BenchmarkConfig {
  SgdConfig sgd;
  SgdConfig gd = gd_defaults();
  McmcConfig mcmc;
  SurrogateOptions surrogate;
  /// Replicates run concurrently; each replicate runs single-threaded.
  unsigned threads = 0;
};

/// Seeds for replicate `rep` of a run started from `seed`.
struct ReplicateSeeds {
  std::uint64_t data;
  std::uint64_t sgd;
  std::uint64_t mcmc;
};
ReplicateSeeds replicate_seeds(std::uint64_t seed, int rep);

/// Estimate from one method on one graph (ASE first, then the method).
/// OSE is applied without the feasibility check, as in the simulations.
Matrix run_method(Method m, const Graph& g, Index d, const BenchmarkConfig& cfg, const ReplicateSeeds& seeds);

struct MethodStats {
  Method method = Method::kAse;
  std::vector<double> sse;  ///< per replicate, NaN where the method failed
  std::vector<double> seconds;
  int failures = 0;
  double mean = 0.0;
  double se = 0.0;          ///< sample std / sqrt(successful replicates)
  double mean_seconds = 0.0;
  int successes() const;
};

struct BenchmarkReport {
  ModelSpec spec;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<MethodStats> methods;

  const MethodStats& at(Method m) const;
  /// Mean and standard error per method; stable key order.
  std::string to_json() const;
  /// method,mean_sse,se_sse,mean_seconds,replicates,failures
  std::string to_csv() const;
  /// rep,method,sse,seconds
  std::string replicates_csv() const;
};

BenchmarkReport mc_benchmark(const ModelSpec& spec, const std::vector<Method>& methods, int reps,
                             const BenchmarkConfig& cfg, std::uint64_t seed);

}  // namespace rdpg
