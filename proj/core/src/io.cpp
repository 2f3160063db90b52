#include "gkf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "gkf/errors.hpp"
#include "gkf/replica.hpp"
#include "gkf/stgnn.hpp"

namespace gkf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(what + ": invalid JSON: " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw DataError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw DataError(what + ": unknown key '" + key + "'");
  }
}

void check_version(const json& j, const std::string& what) {
  if (!j.contains("format_version")) return;
  const int v = j.at("format_version").get<int>();
  if (v < 1 || v > kFormatVersion) {
    throw DataError(what + ": unsupported format_version " + std::to_string(v));
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out, const std::string& what) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(what + ": bad value for '" + key + "': " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json generator_json(const GeneratorConfig& c) {
  return {{"name", c.name},           {"lambda0", c.lambda0},
          {"lambda1", c.lambda1},     {"theta_tm", c.theta_tm},
          {"theta_sp", c.theta_sp},   {"psi0", c.psi0},
          {"psi1", c.psi1},           {"sigma_eta", c.sigma_eta},
          {"sigma_nu", c.sigma_nu},   {"rho_st", std::string(to_string(c.rho_st))},
          {"rho_ro", std::string(to_string(c.rho_ro))}, {"n_nodes", c.n_nodes},
          {"steps", c.steps},         {"seed", c.seed}};
}

GeneratorConfig generator_from(const json& j, GeneratorConfig c) {
  const std::string what = "generator config";
  check_keys(j,
             {"format_version", "preset", "name", "lambda0", "lambda1", "theta_tm", "theta_sp",
              "psi0", "psi1", "sigma_eta", "sigma_nu", "rho_st", "rho_ro", "n_nodes", "steps",
              "seed"},
             what);
  check_version(j, what);
  if (j.contains("preset")) c = GeneratorConfig::preset(j.at("preset").get<std::string>(), c.seed);
  read_opt(j, "name", c.name, what);
  read_opt(j, "lambda0", c.lambda0, what);
  read_opt(j, "lambda1", c.lambda1, what);
  read_opt(j, "theta_tm", c.theta_tm, what);
  read_opt(j, "theta_sp", c.theta_sp, what);
  read_opt(j, "psi0", c.psi0, what);
  read_opt(j, "psi1", c.psi1, what);
  read_opt(j, "sigma_eta", c.sigma_eta, what);
  read_opt(j, "sigma_nu", c.sigma_nu, what);
  read_opt(j, "n_nodes", c.n_nodes, what);
  read_opt(j, "steps", c.steps, what);
  read_opt(j, "seed", c.seed, what);
  std::string rho;
  if (j.contains("rho_st")) {
    read_opt(j, "rho_st", rho, what);
    c.rho_st = parse_nonlinearity(rho);
  }
  if (j.contains("rho_ro")) {
    read_opt(j, "rho_ro", rho, what);
    c.rho_ro = parse_nonlinearity(rho);
  }
  c.validate();
  return c;
}

json train_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"lr", c.lr},
          {"batch_size", c.batch_size},
          {"window", c.window},
          {"patience", c.patience},
          {"split", {c.split.train, c.split.val, c.split.test}},
          {"seed", c.seed},
          {"window_start", std::string(to_string(c.window_start))}};
}

TrainConfig train_from(const json& j, TrainConfig c) {
  const std::string what = "train config";
  check_keys(j,
             {"format_version", "epochs", "lr", "batch_size", "window", "patience", "split", "seed",
              "window_start"},
             what);
  check_version(j, what);
  read_opt(j, "epochs", c.epochs, what);
  read_opt(j, "lr", c.lr, what);
  read_opt(j, "batch_size", c.batch_size, what);
  read_opt(j, "window", c.window, what);
  read_opt(j, "patience", c.patience, what);
  read_opt(j, "seed", c.seed, what);
  if (j.contains("split")) {
    std::vector<double> s;
    read_opt(j, "split", s, what);
    if (s.size() != 3) throw DataError(what + ": split needs three fractions");
    c.split = {s[0], s[1], s[2]};
  }
  if (j.contains("window_start")) {
    std::string tag;
    read_opt(j, "window_start", tag, what);
    c.window_start = parse_window_start(tag);
  }
  c.validate();
  return c;
}

json edges_json(const GraphTopology& topo) {
  json edges = json::array();
  for (const Edge& e : topo.edges()) edges.push_back({e.from, e.to, e.weight});
  return edges;
}

GraphTopology topology_from(Index n_nodes, const json& edges, const std::string& what) {
  std::vector<Edge> list;
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 3) throw DataError(what + ": edges are [from, to, weight]");
    list.push_back({e[0].get<Index>(), e[1].get<Index>(), e[2].get<double>()});
  }
  return GraphTopology::from_edges(n_nodes, list);
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::string text = std::string(kCsvVersionLine) + "t,node,value\n";
  text.reserve(static_cast<std::size_t>(m.size()) * 32);
  char buf[96];
  for (Index t = 0; t < m.rows(); ++t) {
    for (Index v = 0; v < m.cols(); ++v) {
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g\n", static_cast<long long>(t),
                    static_cast<long long>(v), m(t, v));
      text += buf;
    }
  }
  write_text_file(path, text);
}

template <class T>
T parse_field(std::string_view field, const std::string& where) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(where + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

Matrix read_matrix_csv(const fs::path& path, Index rows, Index cols) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  Index line_no = 1;
  bool have_line = static_cast<bool>(std::getline(in, line));
  if (have_line && line.rfind("# format_version:", 0) == 0) {
    std::string_view field = std::string_view(line).substr(17);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    const auto v = parse_field<int>(field, path.string() + ":1");
    if (v < 1 || v > kFormatVersion) {
      throw DataError(path.string() + ": unsupported format_version " + std::to_string(v));
    }
    have_line = static_cast<bool>(std::getline(in, line));
    ++line_no;
  }
  if (!have_line || line != "t,node,value") {
    throw DataError(path.string() + ": expected header t,node,value");
  }
  Matrix m(rows, cols);
  std::vector<char> seen(static_cast<std::size_t>(rows * cols), 0);
  Index count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw DataError(where + ": expected three fields");
    const std::string_view sv(line);
    const auto t = parse_field<long long>(sv.substr(0, c1), where);
    const auto v = parse_field<long long>(sv.substr(c1 + 1, c2 - c1 - 1), where);
    const auto value = parse_field<double>(sv.substr(c2 + 1), where);
    if (t < 0 || t >= rows || v < 0 || v >= cols) throw DataError(where + ": index out of range");
    char& flag = seen[static_cast<std::size_t>(t * cols + v)];
    if (flag) throw DataError(where + ": duplicate entry");
    flag = 1;
    m(t, v) = value;
    ++count;
  }
  if (count != rows * cols) {
    throw DataError(path.string() + ": expected " + std::to_string(rows * cols) + " rows, found " +
                    std::to_string(count));
  }
  return m;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

json report_row_json(const ReportRow& r) {
  return {{"model", r.model},
          {"dataset", r.dataset},
          {"mse_wo_kfr", number_or_null(r.mse_prior)},
          {"mse_wo_kfr_std", number_or_null(r.mse_prior_std)},
          {"mse_w_kfr", number_or_null(r.mse_post)},
          {"mse_w_kfr_std", number_or_null(r.mse_post_std)},
          {"rpi_mean", number_or_null(r.rpi_mean)},
          {"rpi_std", number_or_null(r.rpi_std)},
          {"n_batches", r.n_batches},
          {"n_runs", r.n_runs},
          {"runtime_s", r.runtime_s}};
}

ReportRow report_row_from(const json& j) {
  ReportRow r;
  try {
    r.model = j.at("model").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.mse_prior = number_from(j.at("mse_wo_kfr"));
    r.mse_prior_std = number_from(j.at("mse_wo_kfr_std"));
    r.mse_post = number_from(j.at("mse_w_kfr"));
    r.mse_post_std = number_from(j.at("mse_w_kfr_std"));
    r.rpi_mean = number_from(j.at("rpi_mean"));
    r.rpi_std = number_from(j.at("rpi_std"));
    r.n_batches = j.at("n_batches").get<Index>();
    r.n_runs = j.at("n_runs").get<Index>();
    r.runtime_s = j.at("runtime_s").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("report row: ") + e.what());
  }
  return r;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::string generator_config_to_json(const GeneratorConfig& cfg) {
  json j = generator_json(cfg);
  j["format_version"] = kFormatVersion;
  return j.dump(2) + "\n";
}

GeneratorConfig generator_config_from_json(const std::string& text, GeneratorConfig base) {
  return generator_from(parse_json(text, "generator config"), std::move(base));
}

GeneratorConfig load_generator_config(const fs::path& path) {
  return generator_config_from_json(read_text_file(path));
}

std::string train_config_to_json(const TrainConfig& cfg) {
  json j = train_json(cfg);
  j["format_version"] = kFormatVersion;
  return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(const std::string& text, TrainConfig base) {
  return train_from(parse_json(text, "train config"), base);
}

void write_episode_dir(const Episode& episode, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  json meta = {{"format_version", kFormatVersion},
               {"kind", "episode"},
               {"generator", generator_json(episode.config)},
               {"seed", episode.config.seed},
               {"n_nodes", episode.topology.n_nodes()},
               {"steps", episode.steps()},
               {"edges", edges_json(episode.topology)},
               {"files", {{"inputs", "inputs.csv"}, {"states", "states.csv"}, {"outputs", "outputs.csv"}}}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
  write_matrix_csv(dir / "inputs.csv", episode.inputs);
  if (episode.states.size() > 0) write_matrix_csv(dir / "states.csv", episode.states);
  write_matrix_csv(dir / "outputs.csv", episode.outputs);
}

Episode read_episode_dir(const fs::path& dir) {
  const std::string what = (dir / "meta.json").string();
  const json meta = parse_json(read_text_file(dir / "meta.json"), what);
  check_version(meta, what);
  Episode ep;
  try {
    ep.config = generator_from(meta.at("generator"), {});
    const auto n = meta.at("n_nodes").get<Index>();
    const auto steps = meta.at("steps").get<Index>();
    if (n != ep.config.n_nodes || steps != ep.config.steps) {
      throw DataError(what + ": node count or length disagrees with the generator config");
    }
    ep.topology = topology_from(n, meta.at("edges"), what);
  } catch (const json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
  const Index T = ep.config.steps;
  const Index n = ep.config.n_nodes;
  ep.inputs = read_matrix_csv(dir / "inputs.csv", T, n);
  ep.outputs = read_matrix_csv(dir / "outputs.csv", T, n);
  if (fs::exists(dir / "states.csv")) ep.states = read_matrix_csv(dir / "states.csv", T, n);
  return ep;
}

void save_checkpoint(const fs::path& path, const GssModel& model, const TrainConfig* train_config,
                     std::uint64_t seed, const std::string& dataset) {
  const ParamLayout layout = model.param_layout();
  const Vector p = model.params();
  json j = {{"format_version", kFormatVersion},
            {"kind", "checkpoint"},
            {"family", model.family()},
            {"dims",
             {{"n_nodes", model.n_nodes()},
              {"input", model.input_features()},
              {"state", model.state_features()},
              {"output", model.output_features()}}},
            {"topology", {{"n_nodes", model.n_nodes()}, {"edges", edges_json(model.topology())}}},
            {"params",
             {{"encoder", to_std(p.segment(0, layout.encoder))},
              {"transition", to_std(p.segment(layout.encoder, layout.transition))},
              {"readout", to_std(p.segment(layout.encoder + layout.transition, layout.readout))}}},
            {"train_config", train_config ? train_json(*train_config) : json(nullptr)},
            {"seed", seed},
            {"dataset", dataset}};
  if (const auto* replica = dynamic_cast<const ReplicaModel*>(&model)) {
    j["nonlinearity"] = {{"state", std::string(to_string(replica->replica_params().rho_st))},
                         {"readout", std::string(to_string(replica->replica_params().rho_ro))}};
  } else if (const auto* stgnn = dynamic_cast<const StgnnModel*>(&model)) {
    j["dims"]["hidden"] = stgnn->stgnn_params().dims().hidden;
  } else {
    throw DataError("checkpoints support the replica and stgnn families, not " + model.family());
  }
  write_text_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& path) {
  const std::string what = path.string();
  const json j = parse_json(read_text_file(path), what);
  check_version(j, what);
  Checkpoint ck;
  try {
    const std::string family = j.at("family").get<std::string>();
    const json& dims = j.at("dims");
    const auto n = j.at("topology").at("n_nodes").get<Index>();
    GraphTopology topo = topology_from(n, j.at("topology").at("edges"), what);
    std::vector<double> flat;
    for (const char* part : {"encoder", "transition", "readout"}) {
      const auto chunk = j.at("params").at(part).get<std::vector<double>>();
      flat.insert(flat.end(), chunk.begin(), chunk.end());
    }
    if (family == "replica") {
      ReplicaParams rp;
      rp.rho_st = parse_nonlinearity(j.at("nonlinearity").at("state").get<std::string>());
      rp.rho_ro = parse_nonlinearity(j.at("nonlinearity").at("readout").get<std::string>());
      ck.model = std::make_unique<ReplicaModel>(std::move(topo), rp);
    } else if (family == "stgnn") {
      StgnnDims d;
      d.input = dims.at("input").get<Index>();
      d.state = dims.at("state").get<Index>();
      d.output = dims.at("output").get<Index>();
      d.hidden = dims.at("hidden").get<Index>();
      ck.model = std::make_unique<StgnnModel>(std::move(topo), StgnnParams::zeros(d));
    } else {
      throw DataError(what + ": unknown model family '" + family + "'");
    }
    if (static_cast<Index>(flat.size()) != ck.model->param_layout().total()) {
      throw DataError(what + ": parameter count " + std::to_string(flat.size()) +
                      " does not match the " + family + " layout");
    }
    ck.model->set_params(Eigen::Map<const Vector>(flat.data(), static_cast<Index>(flat.size())));
    if (!j.at("train_config").is_null()) ck.train_config = train_from(j.at("train_config"), {});
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.dataset = j.value("dataset", std::string());
  } catch (const json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
  return ck;
}

void write_train_metrics_csv(const fs::path& path, const TrainReport& report) {
  std::string text = std::string(kCsvVersionLine) + "epoch,train_mse,val_mse\n";
  char buf[96];
  for (std::size_t e = 0; e < report.val_mse.size(); ++e) {
    const double train = e == 0 ? std::numeric_limits<double>::quiet_NaN() : report.train_mse[e - 1];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", e, train, report.val_mse[e]);
    text += buf;
  }
  write_text_file(path, text);
}

void write_report_rows(const fs::path& path, const std::vector<ReportRow>& rows) {
  json j = {{"format_version", kFormatVersion}, {"kind", "report"}, {"rows", json::array()}};
  for (const ReportRow& r : rows) j["rows"].push_back(report_row_json(r));
  write_text_file(path, j.dump(2) + "\n");
}

std::vector<ReportRow> read_report_rows(const fs::path& path) {
  const std::string what = path.string();
  const json j = parse_json(read_text_file(path), what);
  check_version(j, what);
  std::vector<ReportRow> rows;
  if (!j.contains("rows") || !j.at("rows").is_array()) throw DataError(what + ": missing rows");
  for (const json& r : j.at("rows")) rows.push_back(report_row_from(r));
  return rows;
}

}  // namespace gkf
