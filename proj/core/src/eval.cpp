#include "rdpg/eval.hpp"

#include "rdpg/parallel.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/spectral.hpp"
#include "rdpg/stats.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace rdpg {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Neumaier summation keeps reductions independent of accumulation order
// effects at the precision that matters here.
double stable_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double sse(const Matrix& xbar, const LatentTruth& truth) {
  if (xbar.rows() != truth.n() || xbar.cols() != truth.d()) throw ModelError("sse: shape mismatch");
  return procrustes(xbar, std::sqrt(truth.rho) * truth.X0).residual;
}

double asymptotic_sse(const LatentTruth& truth) {
  truth.validate();
  const Index n = truth.n();
  std::vector<double> traces(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Matrix G = fisher_true(truth, i).G;
    traces[static_cast<std::size_t>(i)] = G.llt().solve(Matrix::Identity(truth.d(), truth.d())).trace();
  }
  return stable_sum(traces) / static_cast<double>(n);
}

Interval conf_interval_1d(double xhat, double ghat, Index n, double alpha) {
  if (!(ghat > 0.0)) throw DomainError("confidence interval: information must be positive");
  if (n < 1) throw DomainError("confidence interval: n must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("confidence interval: alpha must lie in (0, 1]");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double half = z / std::sqrt(static_cast<double>(n) * ghat);
  const double c = std::abs(xhat);
  return {c - half, c + half};
}

bool Region::covers(const Vector& x) const {
  if (!valid) return false;
  if (std::isinf(radius)) return true;
  const Vector delta = x - center;
  return delta.dot(shape * delta) <= radius;
}

CoverageMethod msle_ci_method(const SgdConfig& cfg, double alpha, SurrogateOptions opts) {
  return [cfg, alpha, opts](const Replicate& rep, std::uint64_t seed) {
    const Index d = rep.truth.d();
    const Index n = rep.graph.n();
    const Embedding emb = ase(rep.graph, d);
    SgdConfig c = cfg;
    c.seed = seed;
    const Matrix xhat = msle_all(rep.graph, emb, c, MsleOptions{opts, 1}).X;
    CoverageFit fit;
    fit.estimate = xhat;
    if (d == 1) fit.estimate = xhat.cwiseAbs();
    fit.regions.resize(static_cast<std::size_t>(n));
    const double radius_d = d == 1 ? 0.0 : chi2_quantile(alpha, static_cast<int>(d));
    for (Index i = 0; i < n; ++i) {
      Region& r = fit.regions[static_cast<std::size_t>(i)];
      try {
        const Matrix G = fisher_plugin(xhat, i).G;
        if (d == 1) {
          const Interval ci = conf_interval_1d(xhat(i, 0), G(0, 0), n, alpha);
          const double half = 0.5 * (ci.hi - ci.lo);
          r.center = Vector::Constant(1, 0.5 * (ci.lo + ci.hi));
          r.shape = Matrix::Identity(1, 1);
          r.radius = half * half;
        } else {
          r.center = xhat.row(i).transpose();
          r.shape = static_cast<double>(n) * G;
          r.radius = radius_d;
        }
        r.valid = true;
      } catch (const Error&) {
        r.valid = false;
      }
    }
    return fit;
  };
}

CoverageMethod bayes_credible_method(const McmcConfig& cfg, double alpha, SurrogateOptions opts) {
  return [cfg, alpha, opts](const Replicate& rep, std::uint64_t seed) {
    const Index d = rep.truth.d();
    const Index n = rep.graph.n();
    const Embedding emb = ase(rep.graph, d);
    McmcConfig c = cfg;
    c.seed = seed;
    const BayesResult res = bayes_all(rep.graph, emb, c, BayesOptions{opts, 1, false});
    CoverageFit fit;
    fit.estimate = res.Xstar;
    fit.regions.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      Region& r = fit.regions[static_cast<std::size_t>(i)];
      try {
        const CredibleSet set = credible_set(res.summaries[static_cast<std::size_t>(i)], alpha);
        r.center = set.center;
        r.shape = set.shape;
        r.radius = set.radius;
        r.valid = true;
      } catch (const Error&) {
        r.valid = false;
      }
    }
    return fit;
  };
}

double CoverageReport::mean_coverage() const {
  std::vector<double> finite;
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    if (counted[i] > 0) finite.push_back(coverage[i]);
  }
  return finite.empty() ? std::nan("") : stable_sum(finite) / static_cast<double>(finite.size());
}

CoverageReport coverage_experiment(const ModelSpec& spec, const CoverageMethod& method, int reps,
                                   std::uint64_t seed, const CoverageConfig& cfg) {
  if (reps < 1) throw ModelError("coverage: reps must be at least 1");
  const Index n = spec.n;
  // hits[rep][i]: 1 covered, 0 not covered, -1 missing
  std::vector<std::vector<signed char>> hits(static_cast<std::size_t>(reps));
  std::vector<char> failed(static_cast<std::size_t>(reps), 0);

  parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t r) {
    auto& row = hits[r];
    row.assign(static_cast<std::size_t>(n), -1);
    const ReplicateSeeds seeds = replicate_seeds(seed, static_cast<int>(r));
    const Replicate rep = draw_replicate(spec, seeds.data);
    CoverageFit fit;
    try {
      fit = method(rep, seeds.sgd);
    } catch (const Error&) {
      failed[r] = 1;
      return;
    }
    if (fit.estimate.rows() != n || fit.estimate.cols() != rep.truth.d() ||
        static_cast<Index>(fit.regions.size()) != n) {
      failed[r] = 1;
      return;
    }
    const double sr = std::sqrt(rep.truth.rho);
    Matrix W = Matrix::Identity(rep.truth.d(), rep.truth.d());
    if (fit.estimate.allFinite()) W = procrustes(fit.estimate, sr * rep.truth.X0).W;
    for (Index i = 0; i < n; ++i) {
      const Region& region = fit.regions[static_cast<std::size_t>(i)];
      if (!region.valid) continue;
      const Vector target = sr * W * rep.truth.X0.row(i).transpose();
      row[static_cast<std::size_t>(i)] = region.covers(target) ? 1 : 0;
    }
  });

  CoverageReport report;
  report.nominal = cfg.nominal;
  report.reps = reps;
  report.coverage.assign(static_cast<std::size_t>(n), 0.0);
  report.counted.assign(static_cast<std::size_t>(n), 0);
  for (int r = 0; r < reps; ++r) {
    if (failed[static_cast<std::size_t>(r)]) {
      ++report.failed_reps;
      continue;
    }
    for (Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const signed char h = hits[static_cast<std::size_t>(r)][k];
      if (h < 0) {
        ++report.missing;
        continue;
      }
      report.counted[k] += 1;
      report.coverage[k] += h;
    }
  }
  for (std::size_t k = 0; k < report.coverage.size(); ++k) {
    report.coverage[k] = report.counted[k] > 0 ? report.coverage[k] / report.counted[k] : std::nan("");
  }
  return report;
}

Method parse_method(const std::string& name) {
  if (name == "ase") return Method::kAse;
  if (name == "ose") return Method::kOse;
  if (name == "msle") return Method::kMsle;
  if (name == "gd") return Method::kGd;
  if (name == "bayes") return Method::kBayes;
  throw ModelError("unknown method '" + name + "' (expected ase, ose, msle, gd or bayes)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kAse: return "ase";
    case Method::kOse: return "ose";
    case Method::kMsle: return "msle";
    case Method::kGd: return "gd";
    case Method::kBayes: return "bayes";
  }
  return "unknown";
}

std::vector<Method> parse_methods(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw ModelError("no methods given");
  return out;
}

ReplicateSeeds replicate_seeds(std::uint64_t seed, int rep) {
  const auto r = static_cast<std::uint64_t>(rep);
  return {derive_seed(seed, {r, 1}), derive_seed(seed, {r, 2}), derive_seed(seed, {r, 3})};
}

Matrix run_method(Method m, const Graph& g, Index d, const BenchmarkConfig& cfg, const ReplicateSeeds& seeds) {
  const Embedding emb = ase(g, d);
  switch (m) {
    case Method::kAse:
      return emb.Xtilde;
    case Method::kOse:
      return one_step(emb, g, false);
    case Method::kMsle:
    case Method::kGd: {
      SgdConfig c = m == Method::kGd ? cfg.gd : cfg.sgd;
      c.seed = seeds.sgd;
      c.full_batch = m == Method::kGd;
      return msle_all(g, emb, c, MsleOptions{cfg.surrogate, 1}).X;
    }
    case Method::kBayes: {
      McmcConfig c = cfg.mcmc;
      c.seed = seeds.mcmc;
      return bayes_all(g, emb, c, BayesOptions{cfg.surrogate, 1, false}).Xstar;
    }
  }
  throw ModelError("unknown method");
}

int MethodStats::successes() const { return static_cast<int>(sse.size()) - failures; }

const MethodStats& BenchmarkReport::at(Method m) const {
  for (const auto& s : methods) {
    if (s.method == m) return s;
  }
  throw ModelError("benchmark report has no method " + method_name(m));
}

BenchmarkReport mc_benchmark(const ModelSpec& spec, const std::vector<Method>& methods, int reps,
                             const BenchmarkConfig& cfg, std::uint64_t seed) {
  if (reps < 1) throw ModelError("benchmark: reps must be at least 1");
  if (methods.empty()) throw ModelError("benchmark: no methods given");
  const std::size_t nm = methods.size();
  const auto nr = static_cast<std::size_t>(reps);
  std::vector<std::vector<double>> sse_table(nm, std::vector<double>(nr, std::nan("")));
  std::vector<std::vector<double>> time_table(nm, std::vector<double>(nr, 0.0));

  parallel_for(nr, cfg.threads, [&](std::size_t r) {
    const ReplicateSeeds seeds = replicate_seeds(seed, static_cast<int>(r));
    const Replicate rep = draw_replicate(spec, seeds.data);
    for (std::size_t k = 0; k < nm; ++k) {
      const auto start = std::chrono::steady_clock::now();
      try {
        const Matrix est = run_method(methods[k], rep.graph, rep.truth.d(), cfg, seeds);
        if (est.allFinite()) sse_table[k][r] = sse(est, rep.truth);
      } catch (const Error&) {
        // recorded as NaN
      }
      time_table[k][r] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  BenchmarkReport report;
  report.spec = spec;
  report.reps = reps;
  report.seed = seed;
  for (std::size_t k = 0; k < nm; ++k) {
    MethodStats st;
    st.method = methods[k];
    st.sse = sse_table[k];
    st.seconds = time_table[k];
    std::vector<double> ok;
    for (double v : st.sse) {
      if (std::isfinite(v)) {
        ok.push_back(v);
      } else {
        ++st.failures;
      }
    }
    if (!ok.empty()) {
      st.mean = stable_sum(ok) / static_cast<double>(ok.size());
      std::vector<double> sq;
      for (double v : ok) sq.push_back((v - st.mean) * (v - st.mean));
      const double var = ok.size() > 1 ? stable_sum(sq) / static_cast<double>(ok.size() - 1) : 0.0;
      st.se = std::sqrt(var / static_cast<double>(ok.size()));
    } else {
      st.mean = std::nan("");
      st.se = std::nan("");
    }
    st.mean_seconds = stable_sum(st.seconds) / static_cast<double>(nr);
    report.methods.push_back(std::move(st));
  }
  return report;
}

std::string BenchmarkReport::to_json() const {
  nlohmann::ordered_json j;
  j["spec"] = spec_name(spec.kind);
  j["n"] = spec.n;
  j["rho"] = spec.rho;
  j["reps"] = reps;
  j["seed"] = seed;
  auto& ms = j["methods"];
  ms = nlohmann::ordered_json::array();
  for (const auto& s : methods) {
    nlohmann::ordered_json m;
    m["method"] = method_name(s.method);
    m["mean_sse"] = std::isfinite(s.mean) ? nlohmann::ordered_json(s.mean) : nlohmann::ordered_json(nullptr);
    m["se_sse"] = std::isfinite(s.se) ? nlohmann::ordered_json(s.se) : nlohmann::ordered_json(nullptr);
    m["mean_seconds"] = s.mean_seconds;
    m["replicates"] = s.successes();
    m["failures"] = s.failures;
    ms.push_back(std::move(m));
  }
  return j.dump(2);
}

std::string BenchmarkReport::to_csv() const {
  std::string out = "method,mean_sse,se_sse,mean_seconds,replicates,failures\n";
  for (const auto& s : methods) {
    out += method_name(s.method) + "," + fmt(s.mean) + "," + fmt(s.se) + "," + fmt(s.mean_seconds) + "," +
           std::to_string(s.successes()) + "," + std::to_string(s.failures) + "\n";
  }
  return out;
}

std::string BenchmarkReport::replicates_csv() const {
  std::string out = "rep,method,sse,seconds\n";
  for (int r = 0; r < reps; ++r) {
    for (const auto& s : methods) {
      const auto k = static_cast<std::size_t>(r);
      out += std::to_string(r) + "," + method_name(s.method) + "," + fmt(s.sse[k]) + "," + fmt(s.seconds[k]) + "\n";
    }
  }
  return out;
}

}  // namespace rdpg
