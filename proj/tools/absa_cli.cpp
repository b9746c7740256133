// Command-line front end. Everything substantive lives behind the C API in
// libabsa; this file only parses arguments and shuttles files around.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "absa/absa_c.h"

namespace {

int exit_code(absa_status status) {
  if (status != ABSA_OK) std::cerr << "error: " << absa_last_error() << "\n";
  return static_cast<int>(status);
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;
  std::cout << in.rdbuf();
}

// remaining "--key value" pairs become config overrides
int collect_overrides(const std::vector<std::string>& extras,
                      std::vector<std::string>& keys, std::vector<std::string>& values) {
  for (size_t i = 0; i < extras.size(); ++i) {
    if (extras[i].rfind("--", 0) != 0 || extras[i].size() <= 2) {
      std::cerr << "error: expected --key value override, got '" << extras[i] << "'\n";
      return 2;
    }
    if (i + 1 >= extras.size()) {
      std::cerr << "error: override " << extras[i] << " is missing a value\n";
      return 2;
    }
    keys.push_back(extras[i].substr(2));
    values.push_back(extras[++i]);
  }
  return 0;
}

std::vector<int> parse_beams(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified generative ABSA: train, predict, evaluate, analyze, convert"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  std::string config_path;
  train->add_option("--config", config_path, "Flat JSON config file")->required();
  train->allow_extras();  // --key value overrides

  // predict
  auto* predict = app.add_subcommand("predict", "Generate and decode predictions");
  std::string checkpoint, data_path, subtask = "Triplet", out_path = "predictions.jsonl";
  int beam = 1, max_len = 64;
  predict->add_option("--checkpoint", checkpoint)->required();
  predict->add_option("--data", data_path)->required();
  predict->add_option("--subtask", subtask)->required();
  predict->add_option("--beam", beam);
  predict->add_option("--max-len", max_len);
  predict->add_option("--out", out_path);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold data");
  std::string predictions, gold_path, out_json = "report.json", out_table = "report.txt";
  std::string eval_subtask = "Triplet";
  evaluate->add_option("--predictions", predictions)->required();
  evaluate->add_option("--gold", gold_path)->required();
  evaluate->add_option("--subtask", eval_subtask)->required();
  evaluate->add_option("--out-json", out_json);
  evaluate->add_option("--out-table", out_table);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Invalid-prediction rates and beam sweeps");
  std::string an_predictions, an_subtask = "Triplet", an_out = "analysis.json";
  bool sweep = false;
  std::string sw_checkpoint, sw_data, sw_gold, sw_beams = "1,2,4";
  int sw_max_len = 64;
  analyze->add_option("--predictions", an_predictions);
  analyze->add_option("--subtask", an_subtask)->required();
  analyze->add_option("--out", an_out);
  analyze->add_flag("--sweep", sweep, "Re-run prediction at several beam widths");
  analyze->add_option("--checkpoint", sw_checkpoint);
  analyze->add_option("--data", sw_data);
  analyze->add_option("--gold", sw_gold);
  analyze->add_option("--beams", sw_beams, "Comma-separated widths (default 1,2,4)");
  analyze->add_option("--max-len", sw_max_len);

  // convert
  auto* convert = app.add_subcommand("convert", "Third-party triplet format to JSONL");
  std::string conv_in, conv_out;
  convert->add_option("--input", conv_in)->required();
  convert->add_option("--output", conv_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (train->parsed()) {
    std::vector<std::string> keys, values;
    if (int rc = collect_overrides(train->remaining(), keys, values); rc != 0) return rc;
    std::vector<const char*> kptr, vptr;
    for (const auto& k : keys) kptr.push_back(k.c_str());
    for (const auto& v : values) vptr.push_back(v.c_str());
    return exit_code(absa_run_train_file(config_path.c_str(), kptr.data(), vptr.data(),
                                         static_cast<int>(kptr.size())));
  }

  if (predict->parsed()) {
    return exit_code(absa_run_predict(checkpoint.c_str(), data_path.c_str(), subtask.c_str(),
                                      beam, max_len, out_path.c_str()));
  }

  if (evaluate->parsed()) {
    auto status = absa_run_evaluate(predictions.c_str(), gold_path.c_str(),
                                    eval_subtask.c_str(), out_json.c_str(), out_table.c_str());
    if (status == ABSA_OK) print_file(out_table);
    return exit_code(status);
  }

  if (analyze->parsed()) {
    if (sweep) {
      if (sw_checkpoint.empty() || sw_data.empty() || sw_gold.empty()) {
        std::cerr << "error: --sweep needs --checkpoint, --data and --gold\n";
        return 2;
      }
      auto beams = parse_beams(sw_beams);
      auto status = absa_run_beam_sweep(sw_checkpoint.c_str(), sw_data.c_str(),
                                        sw_gold.c_str(), an_subtask.c_str(), beams.data(),
                                        static_cast<int>(beams.size()), sw_max_len,
                                        an_out.c_str());
      if (status == ABSA_OK) print_file(an_out + ".txt");
      return exit_code(status);
    }
    if (an_predictions.empty()) {
      std::cerr << "error: analyze needs --predictions (or --sweep)\n";
      return 2;
    }
    auto status = absa_run_analyze(an_predictions.c_str(), an_subtask.c_str(), an_out.c_str());
    if (status == ABSA_OK) print_file(an_out + ".txt");
    return exit_code(status);
  }

  if (convert->parsed()) {
    return exit_code(absa_run_convert(conv_in.c_str(), conv_out.c_str()));
  }

  return 2;
}
