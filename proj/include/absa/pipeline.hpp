#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absa/data.hpp"
#include "absa/model.hpp"

namespace absa::pipeline {

// One flat JSON document; every key can be overridden on the command line.
struct RunConfig {
  std::string subtask = "Triplet";  // one of the seven, or "multi"
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string output_dir = "run";

  model::ModelConfig model;
  model::TrainConfig optim;

  int beam = 1;
  int max_len = 64;

  std::vector<std::string> multi_tasks = {"AESC", "OE"};
  std::vector<double> multi_weights;  // defaults to equal weighting

  std::string tokenizer_mode = "whitespace";
  std::string merges_path;
  bool lowercase = false;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

// train: writes <output_dir>/checkpoint.bin and <output_dir>/loss_trace.json
void run_train(const RunConfig& cfg);

// predict: JSONL, one meta line then one line per generated sequence
void run_predict(const std::string& checkpoint_path, const std::string& data_path,
                 const std::string& subtask, int beam, int max_len,
                 const std::string& out_path);

// evaluate: JSON report + aligned text table
void run_evaluate(const std::string& predictions_path, const std::string& gold_path,
                  const std::string& subtask, const std::string& out_json,
                  const std::string& out_table);

// analyze: invalid size / order / token rates per task
void run_analyze(const std::string& predictions_path, const std::string& subtask,
                 const std::string& out_path);

// beam sweep: re-runs prediction at each width and tabulates F1
void run_beam_sweep(const std::string& checkpoint_path, const std::string& data_path,
                    const std::string& gold_path, const std::string& subtask,
                    const std::vector<int>& beams, int max_len, const std::string& out_path);

void run_convert(const std::string& input_path, const std::string& output_path);

// A checkpointed model plus the run metadata stored beside it.
struct LoadedModel {
  model::Transformer model;
  data::TokenizerConfig tokenizer;
  std::string subtask;
  std::vector<std::string> multi_tasks;
};

LoadedModel load_model(const std::string& checkpoint_path);

// Generation + decoding for one tokenized sentence, as a JSON document with
// the raw index sequence, decoded tuples and dropped-invalid counts.
std::string generate_json(const LoadedModel& lm, const std::vector<std::string>& words,
                          const std::string& subtask, int beam, int max_len,
                          std::optional<Span> given);

std::string read_text_file(const std::string& path);

}  // namespace absa::pipeline
