#include "gkf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "gkf/errors.hpp"
#include "gkf/format.hpp"

namespace gkf {
namespace {

std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string mse_cell(double mean, double std, Index runs) {
  if (!std::isfinite(mean)) return "-";
  std::string s = fmt("%.3f", mean);
  if (runs > 1) s += "±" + fmt("%.3f", std);
  return s;
}

std::string rpi_cell(double mean, double std) {
  if (!std::isfinite(mean)) return "-";
  std::string s = fmt("%.1f", 100.0 * mean);
  if (std::isfinite(std)) s += "±" + fmt("%.1f", 100.0 * std);
  return s;
}

std::string csv_number(double v) { return std::isfinite(v) ? fmt("%.17g", v) : std::string(); }

}  // namespace

std::string dataset_label(const std::string& dataset) {
  if (dataset == "lingss") return "LinGSS";
  if (dataset == "nonlingss") return "NonLinGSS";
  return dataset;
}

std::string format_table(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw DataError("report: no rows");
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  std::map<std::pair<std::string, std::string>, const ReportRow*> cell_rows;
  for (const ReportRow& r : rows) {
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    cell_rows[{r.model, r.dataset}] = &r;
  }

  const std::vector<std::string> sub = {"Pred. Err. w/o KFR", "Pred. Err. w/ KFR", "RPI (%)"};
  const std::size_t n_cols = 1 + 3 * datasets.size();
  std::vector<std::vector<std::string>> body;
  for (const std::string& m : models) {
    std::vector<std::string> line = {m};
    for (const std::string& d : datasets) {
      const auto it = cell_rows.find({m, d});
      if (it == cell_rows.end()) {
        line.insert(line.end(), {"", "", ""});
        continue;
      }
      const ReportRow& r = *it->second;
      line.push_back(mse_cell(r.mse_prior, r.mse_prior_std, r.n_runs));
      line.push_back(mse_cell(r.mse_post, r.mse_post_std, r.n_runs));
      line.push_back(rpi_cell(r.rpi_mean, r.rpi_std));
    }
    body.push_back(std::move(line));
  }

  std::vector<std::size_t> width(n_cols, 0);
  width[0] = display_width(std::string("Model"));
  for (std::size_t c = 1; c < n_cols; ++c) width[c] = display_width(sub[(c - 1) % 3]);
  for (const auto& line : body) {
    for (std::size_t c = 0; c < n_cols; ++c) width[c] = std::max(width[c], display_width(line[c]));
  }
  for (std::size_t g = 0; g < datasets.size(); ++g) {
    const std::size_t label = display_width(dataset_label(datasets[g]));
    const std::size_t span = width[1 + 3 * g] + width[2 + 3 * g] + width[3 + 3 * g] + 6;
    if (label > span) width[3 + 3 * g] += label - span;
  }

  std::string out;
  out += pad("", width[0]);
  for (std::size_t g = 0; g < datasets.size(); ++g) {
    const std::size_t span = width[1 + 3 * g] + width[2 + 3 * g] + width[3 + 3 * g] + 6;
    out += " | " + pad(dataset_label(datasets[g]), span);
  }
  out += "\n" + pad("Model", width[0]);
  for (std::size_t c = 1; c < n_cols; ++c) out += ((c - 1) % 3 == 0 ? " | " : "   ") + pad(sub[(c - 1) % 3], width[c]);
  out += "\n" + std::string(width[0], '-');
  for (std::size_t c = 1; c < n_cols; ++c) out += ((c - 1) % 3 == 0 ? "-+-" : "---") + std::string(width[c], '-');
  out += "\n";
  for (const auto& line : body) {
    out += pad(line[0], width[0]);
    for (std::size_t c = 1; c < n_cols; ++c) out += ((c - 1) % 3 == 0 ? " | " : "   ") + pad(line[c], width[c]);
    out += "\n";
  }
  std::string trimmed;
  std::size_t start = 0;
  while (start < out.size()) {
    const std::size_t nl = out.find('\n', start);
    std::string line = out.substr(start, nl - start);
    line.erase(line.find_last_not_of(' ') + 1);
    trimmed += line + "\n";
    start = nl + 1;
  }
  return trimmed;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kCsvVersionLine << "model,dataset,mse_wo_kfr,mse_wo_kfr_std,mse_w_kfr,mse_w_kfr_std,rpi_mean_pct,rpi_std_pct,"
         "n_batches,n_runs,runtime_s\n";
  for (const ReportRow& r : rows) {
    out << r.model << ',' << r.dataset << ',' << csv_number(r.mse_prior) << ','
        << csv_number(r.mse_prior_std) << ',' << csv_number(r.mse_post) << ','
        << csv_number(r.mse_post_std) << ',' << csv_number(100.0 * r.rpi_mean) << ','
        << csv_number(100.0 * r.rpi_std) << ',' << r.n_batches << ',' << r.n_runs << ','
        << csv_number(r.runtime_s) << '\n';
  }
}

void write_node_traces(std::ostream& out, const Episode& episode, const std::vector<Index>& nodes) {
  const Index n = episode.inputs.cols();
  const bool has_states = episode.states.size() > 0;
  out << kCsvVersionLine << "t,node,input,state,output\n";
  char buf[128];
  for (Index v : nodes) {
    if (v < 0 || v >= n) throw DataError("trace: node " + std::to_string(v) + " out of range");
    for (Index t = 0; t < episode.steps(); ++t) {
      const double s = has_states ? episode.states(t, v) : std::nan("");
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,", static_cast<long long>(t),
                    static_cast<long long>(v), episode.inputs(t, v));
      out << buf << (has_states ? fmt("%.17g", s) : std::string());
      std::snprintf(buf, sizeof buf, ",%.17g\n", episode.outputs(t, v));
      out << buf;
    }
  }
}

}  // namespace gkf
