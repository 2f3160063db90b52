#include "cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gkf/errors.hpp"
#include "gkf/evaluate.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/io.hpp"
#include "gkf/replica.hpp"
#include "gkf/report.hpp"
#include "gkf/stgnn.hpp"
#include "gkf/training.hpp"

namespace gkf::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("GKF_SEED");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') {
    throw UsageError(std::string("GKF_SEED is not an unsigned integer: '") + env + "'");
  }
  return v;
}

bool is_preset(const std::string& name) { return name == "lingss" || name == "nonlingss"; }

// A directory written by `generate`, or a preset name generated in memory.
Episode load_episode(const std::string& data, std::uint64_t data_seed) {
  if (fs::is_directory(data)) return read_episode_dir(data);
  if (is_preset(data)) return generate_episode(GeneratorConfig::preset(data, data_seed));
  throw DataError("'" + data + "' is neither an episode directory nor a preset (lingss, nonlingss)");
}

std::string model_tag(const GssModel& model) {
  if (model.family() == "replica") return "Replica";
  if (model.family() == "stgnn") return "STGNN";
  return model.family();
}

ReplicaParams truth_params(const GeneratorConfig& c) {
  return {c.theta_tm, c.theta_sp, c.psi0, c.psi1, c.rho_st, c.rho_ro};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// --- generate ---------------------------------------------------------------

struct GenerateOpts {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<Index> nodes;
  std::optional<Index> steps;
  std::string out;
};

int cmd_generate(const GenerateOpts& o, std::ostream& out) {
  if (o.preset.empty() == o.config.empty()) {
    throw UsageError("generate needs exactly one of --preset or --config");
  }
  const std::uint64_t seed = o.seed ? *o.seed : default_seed();
  GeneratorConfig cfg;
  if (!o.preset.empty()) {
    if (!is_preset(o.preset)) throw UsageError("unknown preset '" + o.preset + "'");
    cfg = GeneratorConfig::preset(o.preset, seed);
  } else {
    cfg = load_generator_config(o.config);
    if (o.seed || std::getenv("GKF_SEED") != nullptr) cfg.seed = seed;
  }
  if (o.nodes) cfg.n_nodes = *o.nodes;
  if (o.steps) cfg.steps = *o.steps;
  cfg.validate();

  const Episode ep = generate_episode(cfg);
  write_episode_dir(ep, o.out);

  const double ones = ep.inputs.mean();
  const double s_mean = ep.states.mean();
  const double s_var = (ep.states.array() - s_mean).square().mean();
  out << "episode " << cfg.name << " -> " << o.out << "\n"
      << "  nodes          " << cfg.n_nodes << " (" << ep.topology.edges().size() / 2
      << " undirected edges)\n"
      << "  steps          " << cfg.steps << "\n"
      << "  seed           " << cfg.seed << "\n"
      << "  ones fraction  " << fmt("%.4f", ones) << " (renewal ratio "
      << fmt("%.4f", expected_ones_fraction(cfg.lambda0, cfg.lambda1)) << ")\n"
      << "  state variance " << fmt("%.4f", s_var) << "\n";
  return kOk;
}

// --- train ------------------------------------------------------------------

struct TrainOpts {
  std::string model = "replica";
  std::string data;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::optional<Index> epochs;
  std::optional<double> lr;
  std::optional<Index> batch_size;
  std::optional<Index> window;
  std::optional<Index> patience;
  std::string window_start;
  std::string init = "random";
  Index runs = 1;
  std::string out;
  bool no_timing = false;
};

std::unique_ptr<GssModel> initial_model(const TrainOpts& o, const Episode& ep,
                                        std::uint64_t seed) {
  if (o.model == "replica") {
    const ReplicaParams truth = truth_params(ep.config);
    if (o.init == "truth") return std::make_unique<ReplicaModel>(ep.topology, truth);
    auto m = std::make_unique<ReplicaModel>(
        ReplicaModel::random_init(ep.topology, truth.rho_st, truth.rho_ro, seed));
    align_readout_sign(*m, ep);
    return m;
  }
  if (o.init == "truth") throw UsageError("--init truth is only defined for the replica model");
  return std::make_unique<StgnnModel>(StgnnModel::random_init(ep.topology, seed));
}

int cmd_train(const TrainOpts& o, std::ostream& out) {
  if (o.runs < 1) throw UsageError("--runs must be at least 1");
  const std::uint64_t seed = o.seed ? *o.seed : default_seed();
  const Episode ep = load_episode(o.data, o.data_seed ? *o.data_seed : seed);
  TrainConfig base;
  if (!o.config.empty()) base = train_config_from_json(read_text_file(o.config));
  if (o.epochs) base.epochs = *o.epochs;
  if (o.lr) base.lr = *o.lr;
  if (o.batch_size) base.batch_size = *o.batch_size;
  if (o.window) base.window = *o.window;
  if (o.patience) base.patience = *o.patience;
  base.validate();

  ensure_dir(o.out);
  std::vector<Evaluation> evals;
  for (Index run = 0; run < o.runs; ++run) {
    const std::uint64_t run_seed = seed + static_cast<std::uint64_t>(run);
    auto model = initial_model(o, ep, run_seed);
    TrainConfig cfg = base;
    cfg.seed = run_seed;
    cfg.window_start =
        o.window_start.empty() ? default_window_start(*model) : parse_window_start(o.window_start);

    const TrainReport rep = train(*model, ep, cfg);
    EvalOptions eo;
    eo.split = cfg.split;
    Evaluation ev = evaluate(*model, ep, eo, model_tag(*model));
    if (o.no_timing) ev.row.runtime_s = 0.0;

    char name[32];
    std::snprintf(name, sizeof name, "run-%02lld", static_cast<long long>(run + 1));
    const fs::path dir = o.runs == 1 ? fs::path(o.out) : fs::path(o.out) / name;
    ensure_dir(dir);
    save_checkpoint(dir / "checkpoint.json", *model, &cfg, run_seed, ep.config.name);
    write_train_metrics_csv(dir / "metrics.csv", rep);
    write_report_rows(dir / "report.json", {ev.row});

    out << "run " << run + 1 << "/" << o.runs << " seed " << run_seed << ": best epoch "
        << rep.best_epoch << (rep.stopped_early ? " (early stop)" : "") << ", val "
        << fmt("%.4f", rep.best_val_mse) << ", test " << fmt("%.4f", rep.test_mse)
        << " | w/o KFR " << fmt("%.4f", ev.row.mse_prior) << ", w/ KFR "
        << fmt("%.4f", ev.row.mse_post) << ", RPI " << fmt("%.1f%%", 100.0 * ev.row.rpi_mean)
        << "\n";
    if (const auto* r = dynamic_cast<const ReplicaModel*>(model.get())) {
      const ReplicaParams& p = r->replica_params();
      out << "  theta_tm " << fmt("%.4f", p.theta_tm) << "  theta_sp " << fmt("%.4f", p.theta_sp)
          << "  psi0 " << fmt("%.4f", p.psi0) << "  psi1 " << fmt("%.4f", p.psi1) << "\n";
    }
    evals.push_back(std::move(ev));
  }
  const ReportRow row = aggregate(evals);
  write_report_rows(fs::path(o.out) / "report.json", {row});
  out << "\n" << format_table({row});
  return kOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateOpts {
  std::string checkpoint;
  bool truth = false;
  std::string data;
  std::optional<std::uint64_t> data_seed;
  std::string kfr = "both";
  std::string oracle = "none";
  Index warmup = 0;
  Index batch_size = 32;
  std::string tag;
  std::string out;
  bool no_timing = false;
};

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  if (o.checkpoint.empty() == !o.truth) {
    throw UsageError("evaluate needs exactly one of --checkpoint or --truth");
  }
  EvalOptions eo;
  try {
    eo.kfr = parse_kfr_mode(o.kfr);
    eo.oracle = parse_oracle(o.oracle);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  eo.warmup = o.warmup;
  eo.batch_size = o.batch_size;

  const Episode ep = load_episode(o.data, o.data_seed ? *o.data_seed : default_seed());
  std::unique_ptr<GssModel> model;
  if (o.truth) {
    model = std::make_unique<ReplicaModel>(ep.topology, truth_params(ep.config));
  } else {
    Checkpoint ck = load_checkpoint(o.checkpoint);
    if (ck.train_config) eo.split = ck.train_config->split;
    model = std::move(ck.model);
  }
  if (model->n_nodes() != ep.topology.n_nodes()) {
    throw DataError("checkpoint has " + std::to_string(model->n_nodes()) +
                    " nodes but the episode has " + std::to_string(ep.topology.n_nodes()));
  }
  std::string tag = o.tag;
  if (tag.empty()) {
    tag = model_tag(*model);
    if (eo.oracle == Oracle::kExp) tag += " Exp";
    if (eo.oracle == Oracle::kGt) tag += " GT";
  }
  Evaluation ev = evaluate(*model, ep, eo, tag);
  if (o.no_timing) ev.row.runtime_s = 0.0;

  if (!o.out.empty()) {
    ensure_dir(o.out);
    write_report_rows(fs::path(o.out) / "report.json", {ev.row});
    std::ostringstream trace;
    write_trace_csv(trace, ev.trace,
                    ep.outputs.middleRows(ev.trace_begin, static_cast<Index>(ev.trace.steps.size())),
                    ev.trace_begin);
    write_text_file(fs::path(o.out) / "trace.csv", trace.str());
  }
  out << format_table({ev.row});
  out << "test steps [" << ev.t_begin << ", " << ev.t_end << "), " << ev.row.n_batches
      << " RPI batches, " << fmt("%.3f", ev.row.runtime_s) << " s\n";
  return kOk;
}

// --- report -----------------------------------------------------------------

struct ReportOpts {
  std::vector<std::string> rows;
  std::string csv;
  std::string table;
  std::string traces;
  std::optional<std::uint64_t> data_seed;
  std::vector<Index> trace_nodes = {0, 1, 2};
  std::string trace_out;
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
  if (o.rows.empty() && o.traces.empty()) throw UsageError("report needs row files or --traces");
  std::vector<ReportRow> rows;
  for (const std::string& path : o.rows) {
    const std::vector<ReportRow> part = read_report_rows(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (!rows.empty()) {
    const std::string table = format_table(rows);
    if (o.table.empty()) {
      out << table;
    } else {
      write_text_file(o.table, table);
    }
    if (!o.csv.empty()) {
      std::ostringstream csv;
      write_report_csv(csv, rows);
      write_text_file(o.csv, csv.str());
    }
  }
  if (!o.traces.empty()) {
    if (o.trace_out.empty()) throw UsageError("--traces needs --trace-out");
    const Episode ep = load_episode(o.traces, o.data_seed ? *o.data_seed : default_seed());
    std::ostringstream csv;
    write_node_traces(csv, ep, o.trace_nodes);
    write_text_file(o.trace_out, csv.str());
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph Kalman filter experiments"};
  app.name("gkf");
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic episode directory");
  g->add_option("--preset", gen.preset, "Built-in configuration: lingss or nonlingss");
  g->add_option("--config", gen.config, "Generator configuration JSON")->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Seed (default: GKF_SEED or 0)");
  g->add_option("--nodes", gen.nodes, "Override the node count");
  g->add_option("--steps", gen.steps, "Override the episode length");
  g->add_option("-o,--out", gen.out, "Output directory")->required();

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "Train a model and evaluate it on the test segment");
  t->add_option("--model", tr.model, "replica or stgnn")
      ->check(CLI::IsMember({"replica", "stgnn"}));
  t->add_option("--data", tr.data, "Episode directory or preset name")->required();
  t->add_option("--data-seed", tr.data_seed, "Seed for preset data (default: --seed)");
  t->add_option("--seed", tr.seed, "Base seed for init and shuffling (default: GKF_SEED or 0)");
  t->add_option("--config", tr.config, "Training configuration JSON")->check(CLI::ExistingFile);
  t->add_option("--epochs", tr.epochs, "Number of epochs");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--batch-size", tr.batch_size, "Windows per mini-batch");
  t->add_option("--window", tr.window, "Window length");
  t->add_option("--patience", tr.patience, "Early-stopping patience in epochs");
  t->add_option("--window-start", tr.window_start, "filtered, carried or prior")
      ->check(CLI::IsMember({"filtered", "carried", "prior"}));
  t->add_option("--init", tr.init, "random or truth (replica only)")
      ->check(CLI::IsMember({"random", "truth"}));
  t->add_option("--runs", tr.runs, "Independent runs with seeds seed, seed+1, ...");
  t->add_option("-o,--out", tr.out, "Output directory")->required();
  t->add_flag("--no-timing", tr.no_timing, "Write zero runtimes (byte-stable outputs)");

  EvaluateOpts ev;
  auto* e = app.add_subcommand("evaluate", "Run the filter over the test segment");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint JSON")->check(CLI::ExistingFile);
  e->add_flag("--truth", ev.truth, "Use a Replica model with the generator's parameters");
  e->add_option("--data", ev.data, "Episode directory or preset name")->required();
  e->add_option("--data-seed", ev.data_seed, "Seed for preset data (default: GKF_SEED or 0)");
  e->add_option("--kfr", ev.kfr, "on, off or both");
  e->add_option("--oracle", ev.oracle, "exp or gt (needs recorded states)");
  e->add_option("--warmup", ev.warmup, "Unscored filter steps before the test segment");
  e->add_option("--batch-size", ev.batch_size, "Steps per RPI mini-batch");
  e->add_option("--tag", ev.tag, "Model tag in the report row");
  e->add_option("-o,--out", ev.out, "Output directory for report.json and trace.csv");
  e->add_flag("--no-timing", ev.no_timing, "Write zero runtimes (byte-stable outputs)");

  ReportOpts rp;
  auto* r = app.add_subcommand("report", "Render report rows as a table and CSV");
  r->add_option("rows", rp.rows, "report.json files");
  r->add_option("--csv", rp.csv, "Write the rows as CSV");
  r->add_option("--table", rp.table, "Write the table to a file instead of stdout");
  r->add_option("--traces", rp.traces, "Episode directory or preset for per-node traces");
  r->add_option("--data-seed", rp.data_seed, "Seed for preset data (default: GKF_SEED or 0)");
  r->add_option("--nodes", rp.trace_nodes, "Nodes to export")->delimiter(',');
  r->add_option("--trace-out", rp.trace_out, "Trace CSV path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*t) return cmd_train(tr, out);
    if (*e) return cmd_evaluate(ev, out);
    if (*r) return cmd_report(rp, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return kUsage;
  } catch (const NumericalError& ex) {
    err << "numerical error: " << ex.what() << "\n";
    return kNumerical;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << "\n";
    return kData;
  } catch (const DimensionError& ex) {
    err << "data error: " << ex.what() << "\n";
    return kData;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace gkf::cli
