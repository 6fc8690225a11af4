#include "rdpg/optimize.hpp"

#include "rdpg/parallel.hpp"
#include "rdpg/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace rdpg {
namespace {

// Draws s indices with replacement and returns their averaged gradient;
// same result as filling `batch` and calling batch_gradient.
Vector sampled_gradient(const VertexContext& ctx, const Vector& x, Index s, Rng& rng,
                        std::vector<Index>& batch) {
  const auto n = static_cast<std::uint32_t>(ctx.n());
  if (ctx.d() == 1) {
    const double x0 = x(0);
    const double* col = ctx.xtilde().data();
    double acc = 0.0;
    for (Index k = 0; k < s; ++k) {
      const Index j = rng.index32(n);
      const double v = col[j];
      acc += ctx.term_d1_fast(j, x0 * v) * v;
    }
    return Vector::Constant(1, acc / static_cast<double>(s));
  }
  for (auto& j : batch) j = rng.index32(n);
  return batch_gradient(ctx, x, batch);
}

}  // namespace

void SgdConfig::validate() const {
  if (!(a0 > 0.0)) throw ModelError("sgd: a0 must be positive");
  if (!(b0 > 0.0)) throw ModelError("sgd: b0 must be positive");
  if (!(eps > 0.0 && eps <= 0.5)) throw ModelError("sgd: eps must lie in (0, 1/2]");
  if (batch < 1) throw ModelError("sgd: batch size must be at least 1");
  if (max_iters < 1) throw ModelError("sgd: max_iters must be at least 1");
  if (!(grad_tol >= 0.0)) throw ModelError("sgd: grad_tol must be nonnegative");
  if (check_every < 1) throw ModelError("sgd: check_every must be at least 1");
  if (max_halvings < 0) throw ModelError("sgd: max_halvings must be nonnegative");
  if (max_consecutive_rejects < 1) throw ModelError("sgd: max_consecutive_rejects must be at least 1");
}

double adaptive_step(double a0, double b0, double eps, std::span<const double> past_sq_norms) {
  const double total = std::accumulate(past_sq_norms.begin(), past_sq_norms.end(), b0);
  return a0 * std::pow(total, -(eps + 0.5));
}

SgdConfig gd_defaults() {
  SgdConfig cfg;
  cfg.a0 = 1.0;
  cfg.full_batch = true;
  return cfg;
}

double kkt_residual(const Vector& x, const Vector& g) {
  const double r = x.norm();
  const double outward = g.dot(x);
  if (r >= 1.0 - 1e-12 && outward > 0.0) {
    const Vector radial = x / r;
    return (g - g.dot(radial) * radial).norm();
  }
  return g.norm();
}

VertexEstimate sgd_msle(const VertexContext& ctx, const SgdConfig& cfg) {
  cfg.validate();
  const Index n = ctx.n();
  const Index s = cfg.effective_batch(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool full = cfg.full_batch;
  const bool safeguard = cfg.safeguard();
  const double exponent = -(cfg.eps + 0.5);

  auto full_gradient = [&](const Vector& x) -> Vector { return surrogate_grad(ctx, x) * inv_n; };

  VertexEstimate out;
  SgdTrace& trace = out.trace;

  Vector x = ctx.xtilde().row(ctx.vertex()).transpose();
  // An embedding row outside the unit ball cannot be repaired by step
  // halving; start from its radial projection instead.
  if (x.norm() > 1.0) x *= (1.0 - 1e-9) / x.norm();

  Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(ctx.vertex())}));
  std::vector<Index> batch(static_cast<std::size_t>(s));
  double sq_sum = 0.0;
  int consecutive_rejects = 0;
  if (cfg.record) trace.iterates.push_back(x);

  for (int t = 1; t <= cfg.max_iters; ++t) {
    Vector g;
    if (full) {
      g = full_gradient(x);
      if (g.allFinite() && kkt_residual(x, g) <= cfg.grad_tol) {
        trace.converged = true;
        break;
      }
    } else {
      if ((t - 1) % cfg.check_every == 0 && t > 1 && kkt_residual(x, full_gradient(x)) <= cfg.grad_tol) {
        trace.converged = true;
        break;
      }
      g = sampled_gradient(ctx, x, s, rng, batch);
    }
    if (!g.allFinite()) {
      throw NumericError("sgd: non-finite gradient at iteration " + std::to_string(t) + " for vertex " +
                         std::to_string(ctx.vertex()));
    }
    trace.iterations = t;

    const double alpha = cfg.a0 * std::pow(cfg.b0 + sq_sum, exponent);
    sq_sum += g.squaredNorm();

    Vector step = alpha * g;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      const Vector cand = x + step;
      if (cand.norm() <= 1.0) {
        if (!safeguard) {
          x = cand;
          accepted = true;
          break;
        }
        // Sufficient increase: half of the first-order gain.
        const double gain = surrogate_loglik_delta(ctx, x, cand) * inv_n;
        if (gain >= 0.5 * step.dot(g)) {
          x = cand;
          accepted = true;
          break;
        }
      }
      if (h < cfg.max_halvings) {
        step *= 0.5;
        ++trace.halvings;
      }
    }
    if (accepted) {
      consecutive_rejects = 0;
      if (cfg.record) {
        trace.iterates.push_back(x);
        trace.step_sizes.push_back(alpha);
      }
    } else {
      ++trace.rejected_steps;
      if (full) {
        trace.stalled = true;
        break;
      }
      if (++consecutive_rejects > cfg.max_consecutive_rejects) {
        throw NumericError("sgd: " + std::to_string(consecutive_rejects) +
                           " consecutive rejected steps at iteration " + std::to_string(t) +
                           " for vertex " + std::to_string(ctx.vertex()));
      }
    }
  }

  const Vector final_grad = full_gradient(x);
  trace.final_grad_norm = final_grad.norm();
  trace.final_residual = kkt_residual(x, final_grad);
  if (trace.final_residual <= cfg.grad_tol) trace.converged = true;
  out.xhat = std::move(x);
  return out;
}

VertexEstimate gd_msle(const VertexContext& ctx, SgdConfig cfg) {
  cfg.full_batch = true;
  return sgd_msle(ctx, cfg);
}

MsleResult msle_all(const Graph& g, const Embedding& emb, const SgdConfig& cfg, const MsleOptions& opts) {
  cfg.validate();
  const Index n = emb.n();
  if (g.n() != n) throw ModelError("msle: graph and embedding sizes differ");
  const auto shared = VertexContext::share(emb.Xtilde);

  MsleResult result;
  result.X.resize(n, emb.d());
  result.traces.resize(static_cast<std::size_t>(n));
  std::vector<std::optional<VertexFailure>> failures(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), opts.threads, [&](std::size_t k) {
    const auto i = static_cast<Index>(k);
    try {
      VertexContext ctx(g, shared, i, opts.surrogate);
      auto est = sgd_msle(ctx, cfg);
      result.X.row(i) = est.xhat.transpose();
      result.traces[k] = std::move(est.trace);
    } catch (const Error& e) {
      failures[k] = VertexFailure{i, e.what()};
    }
  });

  std::vector<VertexFailure> collected;
  for (auto& f : failures) {
    if (f) collected.push_back(std::move(*f));
  }
  if (!collected.empty()) throw VertexErrors(std::move(collected));
  return result;
}

}  // namespace rdpg
