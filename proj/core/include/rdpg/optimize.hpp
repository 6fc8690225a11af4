#pragma once

#include "rdpg/common.hpp"
#include "rdpg/graph.hpp"
#include "rdpg/spectral.hpp"
#include "rdpg/surrogate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace rdpg {

/// Step-halving stochastic gradient ascent on (1/n) times the surrogate
/// log-likelihood, with steps alpha_t = a0 (b0 + sum_{l<t} ||g_l||^2)^-(eps + 1/2).
struct SgdConfig {
  double a0 = 0.01;
  double b0 = 1.0;
  double eps = 0.25;
  /// Batch size s; the effective size is min(batch, n).
  Index batch = 500;
  int max_iters = 2000;
  /// Stop when the full gradient of the averaged objective is this small.
  double grad_tol = 1e-8;
  /// Full-gradient check interval in stochastic mode (every iteration in
  /// full-batch mode).
  int check_every = 50;
  int max_halvings = 60;
  /// Stochastic mode: abort after this many consecutive rejected steps.
  int max_consecutive_rejects = 100;
  std::uint64_t seed = 0;
  /// Use every index as the batch (classical gradient ascent).
  bool full_batch = false;
  /// Also halve until the full objective gains at least half of the
  /// first-order prediction. Defaults to on in full-batch mode and off in
  /// stochastic mode.
  std::optional<bool> ascent_safeguard;
  /// Keep every accepted iterate and step size in the trace.
  bool record = false;

  /// Throws ModelError on invalid settings.
  void validate() const;
  Index effective_batch(Index n) const noexcept { return batch < n ? batch : n; }
  bool safeguard() const noexcept { return ascent_safeguard.value_or(full_batch); }
};

/// Full-batch defaults: a0 = 1, since the ascent safeguard already keeps
/// large steps stable.
SgdConfig gd_defaults();

struct SgdTrace {
  int iterations = 0;
  int halvings = 0;
  int rejected_steps = 0;
  bool converged = false;
  /// Full-batch mode only: a step was rejected, and since the iteration
  /// is deterministic no further progress is possible.
  bool stalled = false;
  double final_grad_norm = 0.0;
  /// Stationarity measure used by the stopping rule: the gradient norm, or
  /// its tangential part when the iterate sits on the unit sphere with the
  /// gradient pointing outward.
  double final_residual = 0.0;
  std::vector<double> step_sizes;
  std::vector<Vector> iterates;
};

/// Stationarity residual of gradient g at x for the problem restricted to
/// the closed unit ball.
double kkt_residual(const Vector& x, const Vector& g);

/// alpha_t from the squared norms of the batch gradients of iterations
/// 1..t-1.
double adaptive_step(double a0, double b0, double eps, std::span<const double> past_sq_norms);

struct VertexEstimate {
  Vector xhat;
  SgdTrace trace;
};

/// Maximum surrogate likelihood estimate for one vertex, started at the
/// vertex's embedding row. The batch stream is seeded from (cfg.seed,
/// vertex), so results do not depend on which thread runs the vertex.
VertexEstimate sgd_msle(const VertexContext& ctx, const SgdConfig& cfg);

/// Full-gradient variant: sgd_msle with full_batch forced on.
VertexEstimate gd_msle(const VertexContext& ctx, SgdConfig cfg);

struct MsleResult {
  Matrix X;
  std::vector<SgdTrace> traces;
};

struct MsleOptions {
  SurrogateOptions surrogate;
  unsigned threads = 0;
};

/// Runs sgd_msle (or gd_msle when cfg.full_batch) for every vertex. Vertex
/// failures are collected and rethrown together as VertexErrors.
MsleResult msle_all(const Graph& g, const Embedding& emb, const SgdConfig& cfg,
                    const MsleOptions& opts = {});

}  // namespace rdpg
