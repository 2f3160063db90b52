#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gkf/evaluate.hpp"
#include "gkf/format.hpp"
#include "gkf/gss_sim.hpp"
#include "gkf/models.hpp"
#include "gkf/training.hpp"

namespace gkf {

// GeneratorConfig <-> JSON text. Parsing rejects unknown keys; absent keys
// keep the defaults of `base`.
std::string generator_config_to_json(const GeneratorConfig& cfg);
GeneratorConfig generator_config_from_json(const std::string& text, GeneratorConfig base = {});
GeneratorConfig load_generator_config(const std::filesystem::path& path);

std::string train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});

// meta.json plus inputs.csv, states.csv, outputs.csv with header t,node,value.
void write_episode_dir(const Episode& episode, const std::filesystem::path& dir);
// states.csv is optional on read; a missing file leaves `states` empty.
Episode read_episode_dir(const std::filesystem::path& dir);

struct Checkpoint {
  std::unique_ptr<GssModel> model;
  std::optional<TrainConfig> train_config;
  std::uint64_t seed = 0;
  std::string dataset;
};

// Families "replica" and "stgnn".
void save_checkpoint(const std::filesystem::path& path, const GssModel& model,
                     const TrainConfig* train_config, std::uint64_t seed,
                     const std::string& dataset);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// epoch,train_mse,val_mse; epoch 0 holds the initial validation MSE.
void write_train_metrics_csv(const std::filesystem::path& path, const TrainReport& report);

void write_report_rows(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_rows(const std::filesystem::path& path);

// Text file helpers; errors map to DataError.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gkf
