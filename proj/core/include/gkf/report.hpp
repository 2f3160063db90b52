#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gkf/evaluate.hpp"
#include "gkf/gss_sim.hpp"

namespace gkf {

// "lingss" -> "LinGSS", "nonlingss" -> "NonLinGSS", anything else unchanged.
std::string dataset_label(const std::string& dataset);

// Aligned text table, one row per model tag and one column group per
// dataset: Pred. Err. w/o KFR, Pred. Err. w/ KFR, RPI (%).
std::string format_table(const std::vector<ReportRow>& rows);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

// Long-format series for plotting: t,node,input,state,output, one line per
// (node, t) in the order the nodes are given.
void write_node_traces(std::ostream& out, const Episode& episode, const std::vector<Index>& nodes);

}  // namespace gkf
