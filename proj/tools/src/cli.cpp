#include "rdpg_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rdpg::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kCommands = {"simulate", "embed",   "estimate", "sample",        "evaluate",
                                            "benchmark", "coverage", "cluster", "compare-loglik"};

template <typename T>
void take(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("config: '" + where + "." + key + "' has the wrong type");
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError("config: unknown key '" + where + "." + key + "'");
  }
}

void apply_sgd(const json& obj, SgdConfig& s, const std::string& where) {
  reject_unknown(obj, {"a0", "b0", "eps", "batch", "max_iters", "grad_tol", "check_every", "max_halvings"}, where);
  take(obj, "a0", s.a0, where);
  take(obj, "b0", s.b0, where);
  take(obj, "eps", s.eps, where);
  take(obj, "batch", s.batch, where);
  take(obj, "max_iters", s.max_iters, where);
  take(obj, "grad_tol", s.grad_tol, where);
  take(obj, "check_every", s.check_every, where);
  take(obj, "max_halvings", s.max_halvings, where);
}

// Finds --config before the real parse so that flags can override it.
std::optional<std::string> config_path(int argc, const char* const* argv) {
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--config") {
      if (k + 1 >= argc) throw UsageError("--config needs a path");
      return std::string(argv[k + 1]);
    }
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

}  // namespace

const std::vector<std::string>& subcommands() { return kCommands; }

void apply_config_json(const std::string& text, RunConfig& cfg) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(doc, {"schema", "seed", "threads", "sgd", "gd", "mcmc", "surrogate", "gmm"}, "config");
  if (!doc.contains("schema") || doc.at("schema") != 1) throw UsageError("config: expected \"schema\": 1");
  take(doc, "seed", cfg.seed, "config");
  take(doc, "threads", cfg.threads, "config");
  if (doc.contains("sgd")) apply_sgd(doc.at("sgd"), cfg.sgd, "sgd");
  if (doc.contains("gd")) apply_sgd(doc.at("gd"), cfg.gd, "gd");
  if (doc.contains("mcmc")) {
    const json& m = doc.at("mcmc");
    reject_unknown(m, {"sigma", "burn_in", "keep", "thin", "max_resamples"}, "mcmc");
    take(m, "sigma", cfg.mcmc.sigma, "mcmc");
    take(m, "burn_in", cfg.mcmc.burn_in, "mcmc");
    take(m, "keep", cfg.mcmc.keep, "mcmc");
    take(m, "thin", cfg.mcmc.thin, "mcmc");
    take(m, "max_resamples", cfg.mcmc.max_resamples, "mcmc");
  }
  if (doc.contains("surrogate")) {
    const json& s = doc.at("surrogate");
    reject_unknown(s, {"tau", "concat"}, "surrogate");
    take(s, "tau", cfg.surrogate.tau, "surrogate");
    take(s, "concat", cfg.surrogate.concat, "surrogate");
  }
  if (doc.contains("gmm")) {
    const json& g = doc.at("gmm");
    reject_unknown(g, {"restarts", "max_iters", "tol", "reg"}, "gmm");
    take(g, "restarts", cfg.gmm.restarts, "gmm");
    take(g, "max_iters", cfg.gmm.max_iters, "gmm");
    take(g, "tol", cfg.gmm.tol, "gmm");
    take(g, "reg", cfg.gmm.reg, "gmm");
  }
}

RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig cfg;
  if (const auto path = config_path(argc, argv)) {
    std::ifstream in(*path);
    if (!in) throw UsageError("cannot read config file '" + *path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_json(buf.str(), cfg);
  }

  CLI::App app{"Latent position estimation for random dot product graphs", "rdpg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  std::string config_file;
  app.add_option("--config", config_file, "JSON config (schema 1); flags override its values");

  auto* simulate = app.add_subcommand("simulate", "Sample a graph from a simulation design");
  auto* embed = app.add_subcommand("embed", "Adjacency spectral embedding of a graph");
  auto* estimate = app.add_subcommand("estimate", "Estimate latent positions of a graph");
  auto* sample = app.add_subcommand("sample", "Posterior chains for one vertex or all vertices");
  auto* evaluate = app.add_subcommand("evaluate", "SSE of an estimate against the truth");
  auto* benchmark = app.add_subcommand("benchmark", "Monte Carlo SSE comparison of estimators");
  auto* coverage = app.add_subcommand("coverage", "Empirical coverage of interval estimates");
  auto* cluster = app.add_subcommand("cluster", "Gaussian mixture clustering of estimated positions");
  auto* compare = app.add_subcommand("compare-loglik", "Oracle, surrogate and one-step curves for one vertex");

  const std::vector<std::string> spec_names{"curve51", "curve23", "sbm52", "file"};
  const std::vector<std::string> method_names{"ase", "ose", "msle", "gd", "bayes"};

  auto add_design = [&](CLI::App* s) {
    s->add_option("--spec", cfg.spec, "Simulation design")->check(CLI::IsMember(spec_names))->capture_default_str();
    s->add_option("--n", cfg.n, "Number of vertices")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--rho", cfg.rho, "Sparsity factor in (0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  };
  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", cfg.seed, "Random seed")->capture_default_str(); };
  auto add_threads = [&](CLI::App* s) {
    s->add_option("--threads", cfg.threads, "Worker threads (0: all cores); results do not depend on it")
        ->capture_default_str();
  };
  auto add_graph = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--graph", cfg.graph, "Edge list (zero-based unless --one-indexed)");
    if (required) o->required();
    s->add_flag("--one-indexed", cfg.one_indexed, "Vertex ids in the edge list start at 1");
  };
  auto add_d = [&](CLI::App* s, bool required) {
    auto* o = s->add_option("--d", cfg.d, "Embedding dimension")->check(CLI::PositiveNumber);
    if (required) o->required();
  };
  auto add_tau = [&](CLI::App* s) {
    s->add_option("--tau", cfg.surrogate.tau, "Concatenation threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  };
  auto add_sgd = [&](CLI::App* s) {
    s->add_option("--batch", cfg.sgd.batch, "SGD batch size (capped at n)")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--a0", cfg.sgd.a0, "SGD step scale")->capture_default_str();
    s->add_option("--max-iters", cfg.sgd.max_iters, "SGD iterations")->capture_default_str();
  };
  auto add_mcmc = [&](CLI::App* s) {
    s->add_option("--burnin", cfg.mcmc.burn_in, "Burn-in iterations")->capture_default_str();
    s->add_option("--keep", cfg.mcmc.keep, "Kept draws")->capture_default_str();
    s->add_option("--thin", cfg.mcmc.thin, "Thinning interval")->capture_default_str();
    s->add_option("--sigma", cfg.mcmc.sigma, "Proposal scale (0: 2.38/sqrt(d))")->capture_default_str();
  };
  auto add_method = [&](CLI::App* s) {
    s->add_option("--method", cfg.method, "Estimator")->check(CLI::IsMember(method_names))->capture_default_str();
  };

  add_design(simulate);
  add_seed(simulate);
  simulate->add_option("--out-graph", cfg.out_graph, "Edge list output")->required();
  simulate->add_option("--out-truth", cfg.out_truth, "Latent positions CSV output");
  simulate->add_option("--out-labels", cfg.out_labels, "Block labels output (block designs)");
  simulate->add_flag("--hollow", cfg.hollow, "Leave the diagonal empty instead of sampling self loops");

  add_graph(embed, true);
  add_d(embed, true);
  embed->add_option("--out", cfg.out, "Embedding CSV output")->required();

  add_graph(estimate, true);
  add_d(estimate, true);
  add_method(estimate);
  estimate->add_option("--out", cfg.out, "Estimate CSV output")->required();
  add_seed(estimate);
  add_threads(estimate);
  add_sgd(estimate);
  add_mcmc(estimate);
  add_tau(estimate);

  add_graph(sample, true);
  add_d(sample, true);
  sample->add_option("--vertex", cfg.vertex, "Zero-based vertex; all vertices when omitted");
  sample->add_option("--out-chains", cfg.out_chains, "Chains CSV (vertex,draw,x1..xd)");
  sample->add_option("--out-json", cfg.out_json, "Per-vertex posterior summaries");
  sample->add_option("--out", cfg.out, "Posterior means CSV");
  add_seed(sample);
  add_threads(sample);
  add_mcmc(sample);
  add_tau(sample);

  evaluate->add_option("--estimate", cfg.estimate, "Estimate CSV")->required();
  evaluate->add_option("--truth", cfg.truth, "Latent positions CSV")->required();
  evaluate->add_option("--rho", cfg.rho, "Sparsity factor of the truth")->capture_default_str();

  add_design(benchmark);
  benchmark->add_option("--reps", cfg.reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
  benchmark->add_option("--methods", cfg.methods, "Comma-separated estimators")->capture_default_str();
  benchmark->add_option("--out", cfg.out, "Summary CSV (one row per method)");
  benchmark->add_option("--out-json", cfg.out_json, "Summary JSON");
  benchmark->add_option("--out-replicates", cfg.out_replicates, "Per-replicate CSV");
  add_seed(benchmark);
  add_threads(benchmark);
  add_sgd(benchmark);
  add_mcmc(benchmark);
  add_tau(benchmark);

  add_design(coverage);
  coverage->add_option("--reps", cfg.reps, "Replicates")->check(CLI::PositiveNumber)->capture_default_str();
  coverage->add_option("--method", cfg.method, "msle (Wald intervals) or bayes (credible sets)")
      ->check(CLI::IsMember({"msle", "bayes"}))
      ->capture_default_str();
  coverage->add_option("--alpha", cfg.alpha, "One minus the nominal level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  coverage->add_option("--out", cfg.out, "Per-vertex coverage CSV");
  coverage->add_option("--out-json", cfg.out_json, "Coverage summary JSON");
  add_seed(coverage);
  add_threads(coverage);
  add_sgd(coverage);
  add_mcmc(coverage);
  add_tau(coverage);

  add_graph(cluster, false);
  cluster->add_option("--estimate", cfg.estimate, "Cluster these positions instead of estimating from --graph");
  add_d(cluster, false);
  cluster->add_option("--k", cfg.k, "Number of mixture components")->required()->check(CLI::PositiveNumber);
  add_method(cluster);
  cluster->add_option("--labels", cfg.labels, "Reference labels; reports the Rand index");
  cluster->add_option("--out", cfg.out, "Cluster labels output (one per line, 1-based)");
  add_seed(cluster);
  add_threads(cluster);
  add_sgd(cluster);
  add_mcmc(cluster);
  add_tau(cluster);

  compare->add_option("--spec", cfg.spec, "Design, or 'file' with --graph and --truth")
      ->check(CLI::IsMember(spec_names))
      ->capture_default_str();
  compare->add_option("--n", cfg.n, "Number of vertices")->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--rho", cfg.rho, "Sparsity factor")->capture_default_str();
  add_graph(compare, false);
  compare->add_option("--truth", cfg.truth, "Latent positions CSV (with --spec file)");
  compare->add_option("--vertex", cfg.vertex, "Zero-based vertex")->required();
  compare->add_option("--grid", cfg.grid, "lo:hi:count")->capture_default_str();
  compare->add_option("--out", cfg.out, "CSV output (x,oracle,surrogate,ose_objective)")->required();
  add_seed(compare);
  add_tau(compare);

  std::vector<std::string> args;
  for (int k = argc - 1; k > 0; --k) args.emplace_back(argv[k]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    RunConfig h;
    h.help = app.help();
    return h;
  } catch (const CLI::CallForAllHelp&) {
    RunConfig h;
    h.help = app.help("", CLI::AppFormatMode::All);
    return h;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    if (const auto subs = app.get_subcommands(); !subs.empty()) msg += " (see 'rdpg " + subs.front()->get_name() + " --help')";
    throw UsageError(msg);
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    cfg.sgd.validate();
    cfg.gd.validate();
    cfg.mcmc.validate();
  } catch (const ModelError& e) {
    throw UsageError(e.what());
  }
  if (!(cfg.surrogate.tau > 0.0 && cfg.surrogate.tau < 1.0)) throw UsageError("--tau must lie in (0, 1)");
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) throw UsageError("--rho must lie in (0, 1]");
  if ((cfg.command == "benchmark" || cfg.command == "coverage" || cfg.command == "simulate") && cfg.spec == "file") {
    throw UsageError("--spec file is only meaningful for compare-loglik");
  }
  if (cfg.command == "cluster" && cfg.graph.empty() && cfg.estimate.empty()) {
    throw UsageError("cluster needs --graph or --estimate");
  }
  if (cfg.command == "cluster" && !cfg.graph.empty() && cfg.d < 1) throw UsageError("cluster with --graph needs --d");
  if (cfg.command == "compare-loglik" && cfg.spec == "file" && (cfg.graph.empty() || cfg.truth.empty())) {
    throw UsageError("compare-loglik --spec file needs --graph and --truth");
  }
  return cfg;
}

}  // namespace rdpg::cli
