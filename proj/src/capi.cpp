#include "absa/absa_c.h"

#include <cstring>
#include <memory>
#include <string>

#include "absa/data.hpp"
#include "absa/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

absa_status fail(absa_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

template <class Fn>
absa_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ABSA_OK;
  } catch (const std::invalid_argument& e) {
    return fail(ABSA_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ABSA_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ABSA_ERROR, e.what());
  } catch (...) {
    return fail(ABSA_ERROR, "unknown error");
  }
}

absa_status require(bool ok, const char* what) {
  return ok ? ABSA_OK : fail(ABSA_INVALID_ARGUMENT, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct absa_dataset {
  std::vector<absa::data::DatasetRecord> records;
};

struct absa_model {
  absa::pipeline::LoadedModel loaded;
};

extern "C" {

const char* absa_version(void) { return "1.0.0"; }

const char* absa_last_error(void) { return g_last_error.c_str(); }

absa_status absa_dataset_open(const char* path, absa_dataset** out) {
  if (require(path && out, "absa_dataset_open: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    auto ds = std::make_unique<absa_dataset>();
    ds->records = absa::data::load_dataset(path);
    *out = ds.release();
  });
}

void absa_dataset_close(absa_dataset* dataset) { delete dataset; }

long absa_dataset_size(const absa_dataset* dataset) {
  return dataset ? static_cast<long>(dataset->records.size()) : -1;
}

long absa_dataset_annotations(const absa_dataset* dataset, long index) {
  if (!dataset || index < 0 || index >= static_cast<long>(dataset->records.size())) return -1;
  return static_cast<long>(dataset->records[static_cast<size_t>(index)].annotations.size());
}

absa_status absa_model_open(const char* checkpoint_path, absa_model** out) {
  if (require(checkpoint_path && out, "absa_model_open: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    *out = new absa_model{absa::pipeline::load_model(checkpoint_path)};
  });
}

void absa_model_close(absa_model* model) { delete model; }

const char* absa_model_subtask(const absa_model* model) {
  return model ? model->loaded.subtask.c_str() : "";
}

absa_status absa_model_generate(const absa_model* model, const char* const* words,
                                long n_words, const char* subtask, int beam, int max_len,
                                long given_start, long given_end, char** json_out) {
  if (require(model && words && subtask && json_out && n_words > 0,
              "absa_model_generate: null or empty argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  *json_out = nullptr;
  return guarded([&] {
    std::vector<std::string> toks;
    toks.reserve(static_cast<size_t>(n_words));
    for (long i = 0; i < n_words; ++i) {
      if (!words[i]) throw std::invalid_argument("absa_model_generate: null word");
      toks.emplace_back(words[i]);
    }
    std::optional<absa::Span> given;
    if (given_start >= 0 || given_end >= 0) {
      if (given_start < 0 || given_end < given_start)
        throw std::invalid_argument("absa_model_generate: bad given span");
      given = absa::Span(static_cast<int>(given_start), static_cast<int>(given_end));
    }
    std::string json = absa::pipeline::generate_json(model->loaded, toks, subtask, beam,
                                                     max_len, given);
    *json_out = dup_string(json);
  });
}

void absa_string_free(char* s) { delete[] s; }

absa_status absa_run_train(const char* config_json) {
  if (require(config_json, "absa_run_train: null config") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] {
    absa::pipeline::run_train(absa::pipeline::parse_run_config(config_json));
  });
}

absa_status absa_run_train_file(const char* config_path, const char* const* override_keys,
                                const char* const* override_values, int n_overrides) {
  if (require(config_path && (n_overrides == 0 || (override_keys && override_values)),
              "absa_run_train_file: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (int i = 0; i < n_overrides; ++i) {
      if (!override_keys[i] || !override_values[i])
        throw std::invalid_argument("absa_run_train_file: null override");
      overrides.emplace_back(override_keys[i], override_values[i]);
    }
    absa::pipeline::run_train(absa::pipeline::load_run_config(config_path, overrides));
  });
}

absa_status absa_run_predict(const char* checkpoint, const char* data, const char* subtask,
                             int beam, int max_len, const char* out_path) {
  if (require(checkpoint && data && subtask && out_path,
              "absa_run_predict: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] {
    absa::pipeline::run_predict(checkpoint, data, subtask, beam, max_len, out_path);
  });
}

absa_status absa_run_evaluate(const char* predictions, const char* gold, const char* subtask,
                              const char* out_json, const char* out_table) {
  if (require(predictions && gold && subtask && out_json && out_table,
              "absa_run_evaluate: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] {
    absa::pipeline::run_evaluate(predictions, gold, subtask, out_json, out_table);
  });
}

absa_status absa_run_analyze(const char* predictions, const char* subtask,
                             const char* out_json) {
  if (require(predictions && subtask && out_json, "absa_run_analyze: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] { absa::pipeline::run_analyze(predictions, subtask, out_json); });
}

absa_status absa_run_beam_sweep(const char* checkpoint, const char* data, const char* gold,
                                const char* subtask, const int* beams, int n_beams,
                                int max_len, const char* out_json) {
  if (require(checkpoint && data && gold && subtask && beams && n_beams > 0 && out_json,
              "absa_run_beam_sweep: null or empty argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] {
    absa::pipeline::run_beam_sweep(checkpoint, data, gold, subtask,
                                   std::vector<int>(beams, beams + n_beams), max_len,
                                   out_json);
  });
}

absa_status absa_run_convert(const char* input, const char* output) {
  if (require(input && output, "absa_run_convert: null argument") != ABSA_OK)
    return ABSA_INVALID_ARGUMENT;
  return guarded([&] { absa::pipeline::run_convert(input, output); });
}

}  // extern "C"
