#include "rdpg/eval.hpp"
#include "rdpg/gmm.hpp"
#include "rdpg/graph_io.hpp"
#include "rdpg/models.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/spectral.hpp"
#include "rdpg_cli/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace rdpg::cli {
namespace {

using nlohmann::ordered_json;

constexpr std::uint64_t kGraphStream = 0x9a7b;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw FormatError("write failed for '" + path + "'");
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

Graph load_graph(const RunConfig& cfg) {
  EdgeListOptions opts;
  opts.one_indexed = cfg.one_indexed;
  return read_edge_list(cfg.graph, opts);
}

ModelSpec model_spec(const RunConfig& cfg) { return {parse_spec_kind(cfg.spec), cfg.n, cfg.rho}; }

Matrix estimate_positions(const RunConfig& cfg, Method method, const Graph& g, Index d, ordered_json& summary) {
  const Embedding emb = ase(g, d);
  switch (method) {
    case Method::kAse:
      return emb.Xtilde;
    case Method::kOse:
      return one_step(emb, g, false);
    case Method::kMsle:
    case Method::kGd: {
      SgdConfig sc = method == Method::kGd ? cfg.gd : cfg.sgd;
      sc.seed = cfg.seed;
      const MsleResult r = msle_all(g, emb, sc, {cfg.surrogate, cfg.threads});
      int converged = 0;
      for (const auto& t : r.traces) converged += t.converged ? 1 : 0;
      summary["converged"] = converged;
      return r.X;
    }
    case Method::kBayes: {
      McmcConfig mc = cfg.mcmc;
      mc.seed = cfg.seed;
      const BayesResult r = bayes_all(g, emb, mc, {cfg.surrogate, cfg.threads, false});
      double rate = 0.0;
      for (double a : r.accept_rates) rate += a;
      summary["mean_accept_rate"] = rate / static_cast<double>(r.accept_rates.size());
      return r.Xstar;
    }
  }
  throw ModelError("unknown method");
}

int cmd_simulate(const RunConfig& cfg, ordered_json& summary) {
  const ModelSpec spec = model_spec(cfg);
  Replicate rep = draw_replicate(spec, cfg.seed);
  if (cfg.hollow) rep.graph = sample_rdpg(rep.truth, derive_seed(cfg.seed, {kGraphStream}), true);
  write_edge_list(cfg.out_graph, rep.graph);
  if (!cfg.out_truth.empty()) write_matrix_csv(cfg.out_truth, rep.truth.X0);
  if (!cfg.out_labels.empty()) {
    if (rep.labels.empty()) throw UsageError("--out-labels needs a block design");
    write_labels(cfg.out_labels, rep.labels);
  }
  summary["spec"] = cfg.spec;
  summary["n"] = rep.graph.n();
  summary["d"] = rep.truth.d();
  summary["rho"] = rep.truth.rho;
  summary["edges"] = rep.graph.upper_edge_count();
  return 0;
}

int cmd_embed(const RunConfig& cfg, ordered_json& summary) {
  const Graph g = load_graph(cfg);
  const Embedding e = ase(g, cfg.d);
  write_matrix_csv(cfg.out, e.Xtilde);
  summary["n"] = g.n();
  summary["d"] = cfg.d;
  summary["eigenvalues"] = std::vector<double>(e.eigvals.data(), e.eigvals.data() + e.eigvals.size());
  return 0;
}

int cmd_estimate(const RunConfig& cfg, ordered_json& summary) {
  const Graph g = load_graph(cfg);
  const Method m = parse_method(cfg.method);
  summary["method"] = cfg.method;
  const Matrix x = estimate_positions(cfg, m, g, cfg.d, summary);
  write_matrix_csv(cfg.out, x);
  summary["n"] = g.n();
  summary["d"] = cfg.d;
  return 0;
}

int cmd_sample(const RunConfig& cfg, ordered_json& summary) {
  const Graph g = load_graph(cfg);
  const Embedding emb = ase(g, cfg.d);
  McmcConfig mc = cfg.mcmc;
  mc.seed = cfg.seed;
  std::vector<Chain> chains;
  if (cfg.vertex >= 0) {
    if (cfg.vertex >= g.n()) throw UsageError("--vertex is out of range (vertices are numbered from 0)");
    const VertexContext ctx(g, VertexContext::share(emb.Xtilde), cfg.vertex, cfg.surrogate);
    chains.push_back(mh_chain(ctx, mc));
  } else {
    chains = bayes_all(g, emb, mc, {cfg.surrogate, cfg.threads, true}).chains;
  }

  const Index d = cfg.d;
  if (!cfg.out_chains.empty()) {
    std::string text = "vertex,draw";
    for (Index k = 0; k < d; ++k) text += ",x" + std::to_string(k + 1);
    text += "\n";
    for (const Chain& c : chains) {
      for (Index r = 0; r < c.draws.rows(); ++r) {
        text += std::to_string(c.vertex) + "," + std::to_string(r);
        for (Index k = 0; k < d; ++k) text += "," + num(c.draws(r, k));
        text += "\n";
      }
    }
    write_text(cfg.out_chains, text);
  }
  ordered_json per_vertex = ordered_json::array();
  Matrix means(static_cast<Index>(chains.size()), d);
  double rate = 0.0;
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const PosteriorSummary s = posterior_summary(chains[k]);
    means.row(static_cast<Index>(k)) = s.mean.transpose();
    rate += chains[k].accept_rate;
    ordered_json v;
    v["vertex"] = chains[k].vertex;
    v["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + d);
    ordered_json cov = ordered_json::array();
    for (Index r = 0; r < d; ++r) {
      std::vector<double> row;
      for (Index c = 0; c < d; ++c) row.push_back(s.cov(r, c));
      cov.push_back(row);
    }
    v["cov"] = cov;
    v["accept_rate"] = chains[k].accept_rate;
    std::vector<double> first;
    for (Index r = 0; r < chains[k].draws.rows(); ++r) first.push_back(chains[k].draws(r, 0));
    const int lag = std::min<int>(10, static_cast<int>(first.size()) - 1);
    v["acf_x1"] = acf(first, lag).values;
    per_vertex.push_back(v);
  }
  if (!cfg.out_json.empty()) write_text(cfg.out_json, per_vertex.dump(2) + "\n");
  if (!cfg.out.empty()) write_matrix_csv(cfg.out, means);
  summary["chains"] = chains.size();
  summary["mean_accept_rate"] = rate / static_cast<double>(chains.size());
  if (chains.size() == 1) summary["posterior"] = per_vertex.front();
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, ordered_json& summary) {
  LatentTruth truth;
  truth.X0 = read_matrix_csv(cfg.truth);
  truth.rho = cfg.rho;
  const Matrix xhat = read_matrix_csv(cfg.estimate);
  if (xhat.rows() != truth.n() || xhat.cols() != truth.d()) {
    throw UsageError("estimate and truth have different shapes");
  }
  summary["n"] = truth.n();
  summary["d"] = truth.d();
  summary["sse"] = finite_or_null(sse(xhat, truth));
  try {
    truth.validate();
    summary["asymptotic_sse"] = asymptotic_sse(truth);
  } catch (const ModelError&) {
    summary["asymptotic_sse"] = nullptr;
  }
  return 0;
}

BenchmarkConfig benchmark_config(const RunConfig& cfg) {
  BenchmarkConfig bc;
  bc.sgd = cfg.sgd;
  bc.gd = cfg.gd;
  bc.mcmc = cfg.mcmc;
  bc.surrogate = cfg.surrogate;
  bc.threads = cfg.threads;
  return bc;
}

int cmd_benchmark(const RunConfig& cfg, ordered_json& summary) {
  const BenchmarkReport report =
      mc_benchmark(model_spec(cfg), parse_methods(cfg.methods), cfg.reps, benchmark_config(cfg), cfg.seed);
  if (!cfg.out.empty()) write_text(cfg.out, report.to_csv());
  if (!cfg.out_json.empty()) write_text(cfg.out_json, report.to_json() + "\n");
  if (!cfg.out_replicates.empty()) write_text(cfg.out_replicates, report.replicates_csv());
  summary["spec"] = cfg.spec;
  summary["n"] = cfg.n;
  summary["reps"] = cfg.reps;
  ordered_json methods = ordered_json::object();
  for (const MethodStats& s : report.methods) {
    methods[method_name(s.method)] = {{"mean_sse", finite_or_null(s.mean)},
                                      {"se_sse", finite_or_null(s.se)},
                                      {"failures", s.failures}};
  }
  summary["methods"] = methods;
  return report.methods.empty() ? 1 : 0;
}

int cmd_coverage(const RunConfig& cfg, ordered_json& summary) {
  const CoverageMethod method = cfg.method == "bayes" ? bayes_credible_method(cfg.mcmc, cfg.alpha, cfg.surrogate)
                                                      : msle_ci_method(cfg.sgd, cfg.alpha, cfg.surrogate);
  const CoverageReport rep =
      coverage_experiment(model_spec(cfg), method, cfg.reps, cfg.seed, {1.0 - cfg.alpha, cfg.threads});
  if (!cfg.out.empty()) {
    std::string text = "vertex,coverage,counted\n";
    for (std::size_t i = 0; i < rep.coverage.size(); ++i) {
      text += std::to_string(i) + "," + num(rep.coverage[i]) + "," + std::to_string(rep.counted[i]) + "\n";
    }
    write_text(cfg.out, text);
  }
  summary["method"] = cfg.method;
  summary["nominal"] = rep.nominal;
  summary["reps"] = rep.reps;
  summary["mean_coverage"] = finite_or_null(rep.mean_coverage());
  summary["missing"] = rep.missing;
  summary["failed_reps"] = rep.failed_reps;
  if (!cfg.out_json.empty()) {
    ordered_json full = summary;
    full["coverage"] = rep.coverage;
    full["counted"] = rep.counted;
    write_text(cfg.out_json, full.dump(2) + "\n");
  }
  return 0;
}

int cmd_cluster(const RunConfig& cfg, ordered_json& summary) {
  Matrix x;
  if (!cfg.estimate.empty()) {
    x = read_matrix_csv(cfg.estimate);
  } else {
    const Graph g = load_graph(cfg);
    summary["method"] = cfg.method;
    x = estimate_positions(cfg, parse_method(cfg.method), g, cfg.d, summary);
  }
  GmmConfig gc = cfg.gmm;
  gc.seed = cfg.seed;
  const GmmResult fit = gmm_em(x, cfg.k, gc);
  std::vector<int> labels(fit.labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = fit.labels[i] + 1;
  if (!cfg.out.empty()) write_labels(cfg.out, labels);
  summary["k"] = cfg.k;
  summary["loglik"] = fit.loglik;
  summary["empty_component"] = fit.empty_component;
  if (!cfg.labels.empty()) {
    const std::vector<int> ref = read_labels(cfg.labels);
    if (ref.size() != labels.size()) throw UsageError("--labels has a different number of vertices");
    summary["rand_index"] = rand_index(labels, ref);
  }
  return 0;
}

struct Grid {
  double lo;
  double hi;
  int count;
};

Grid parse_grid(const std::string& text) {
  Grid g{};
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.count, &tail) != 3 || g.count < 2 || !(g.lo < g.hi)) {
    throw UsageError("--grid must be lo:hi:count with lo < hi and count >= 2");
  }
  return g;
}

int cmd_compare(const RunConfig& cfg, ordered_json& summary) {
  const Grid grid = parse_grid(cfg.grid);
  Replicate rep;
  if (cfg.spec == "file") {
    rep.graph = load_graph(cfg);
    rep.truth.X0 = read_matrix_csv(cfg.truth);
    rep.truth.rho = cfg.rho;
  } else {
    rep = draw_replicate(model_spec(cfg), cfg.seed);
  }
  if (rep.truth.d() != 1) throw UsageError("compare-loglik needs a one-dimensional design");
  if (rep.truth.n() != rep.graph.n()) throw UsageError("graph and truth sizes differ");
  const Index i = cfg.vertex;
  if (i < 0 || i >= rep.graph.n()) throw UsageError("--vertex is out of range (vertices are numbered from 0)");

  Embedding emb = ase(rep.graph, 1);
  if (procrustes(emb.Xtilde, rep.truth.X0).W(0, 0) < 0.0) emb.Xtilde = -emb.Xtilde;
  const auto shared = VertexContext::share(emb.Xtilde);
  const VertexContext ctx(rep.graph, shared, i, cfg.surrogate);
  const VertexContext raw(rep.graph, shared, i, {cfg.surrogate.tau, false});

  const auto count = static_cast<std::size_t>(grid.count);
  std::vector<double> xs(count);
  std::vector<std::vector<double>> curves(3, std::vector<double>(count));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < count; ++k) {
    const double x = grid.lo + (grid.hi - grid.lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    xs[k] = x;
    const Vector v = Vector::Constant(1, x);
    auto guarded = [&](auto&& f) {
      try {
        const double r = f();
        return std::isfinite(r) ? r : nan;
      } catch (const Error&) {
        return nan;
      }
    };
    curves[0][k] = guarded([&] { return oracle_loglik(i, v, rep.truth, rep.graph); });
    curves[1][k] = guarded([&] { return surrogate_loglik(ctx, v); });
    curves[2][k] = guarded([&] { return ose_objective(raw, v); });
  }
  const char* names[3] = {"oracle", "surrogate", "ose_objective"};
  ordered_json argmax;
  for (int c = 0; c < 3; ++c) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    for (std::size_t k = 0; k < count; ++k) {
      if (std::isfinite(curves[c][k]) && curves[c][k] > best) {
        best = curves[c][k];
        at = k;
      }
    }
    if (std::isfinite(best)) {
      for (double& y : curves[c]) y -= best;
      argmax[names[c]] = xs[at];
    } else {
      argmax[names[c]] = nullptr;
    }
  }
  std::string text = "x,oracle,surrogate,ose_objective\n";
  for (std::size_t k = 0; k < count; ++k) {
    text += num(xs[k]);
    for (int c = 0; c < 3; ++c) text += "," + (std::isfinite(curves[c][k]) ? num(curves[c][k]) : std::string());
    text += "\n";
  }
  write_text(cfg.out, text);
  summary["vertex"] = i;
  summary["truth"] = rep.truth.X0(i, 0) * std::sqrt(rep.truth.rho);
  summary["ase"] = emb.Xtilde(i, 0);
  summary["argmax"] = argmax;
  return 0;
}

}  // namespace

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ordered_json summary;
  summary["command"] = cfg.command;
  int code = 0;
  try {
    if (cfg.command == "simulate") code = cmd_simulate(cfg, summary);
    else if (cfg.command == "embed") code = cmd_embed(cfg, summary);
    else if (cfg.command == "estimate") code = cmd_estimate(cfg, summary);
    else if (cfg.command == "sample") code = cmd_sample(cfg, summary);
    else if (cfg.command == "evaluate") code = cmd_evaluate(cfg, summary);
    else if (cfg.command == "benchmark") code = cmd_benchmark(cfg, summary);
    else if (cfg.command == "coverage") code = cmd_coverage(cfg, summary);
    else if (cfg.command == "cluster") code = cmd_cluster(cfg, summary);
    else if (cfg.command == "compare-loglik") code = cmd_compare(cfg, summary);
    else throw UsageError("unknown subcommand '" + cfg.command + "'");
  } catch (const UsageError& e) {
    err << "rdpg " << cfg.command << ": " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "rdpg " << cfg.command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "rdpg " << cfg.command << ": " << e.what() << "\n";
    return 1;
  }
  summary["status"] = code == 0 ? "ok" : "failed";
  out << summary.dump() << "\n";
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << "rdpg: " << e.what() << "\n";
    return 2;
  }
  if (cfg.help) {
    out << *cfg.help;
    return 0;
  }
  return dispatch(cfg, out, err);
}

}  // namespace rdpg::cli
