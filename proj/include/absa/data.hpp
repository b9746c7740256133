#pragma once

#include <string>
#include <utility>
#include <vector>

#include "absa/types.hpp"

namespace absa::data {

using MergeTable = std::vector<std::pair<std::string, std::string>>;

struct TokenizerConfig {
  enum class Mode { Whitespace, Bpe };
  Mode mode = Mode::Whitespace;
  MergeTable merges;  // required in bpe mode
  bool lowercase = false;
};

// One sentence with its gold annotations. Word-level data is retained so a
// dataset can be serialized back losslessly; token-level spans are derived
// under the active tokenizer (first piece of each word carries word_begin).
struct DatasetRecord {
  DatasetRecord(std::vector<std::string> words_in,
                std::vector<Annotation> word_annotations_in,
                const TokenizerConfig& cfg);

  std::vector<std::string> words;
  std::vector<Annotation> word_annotations;
  Sentence sentence;
  std::vector<Annotation> annotations;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

// Splits one word into BPE pieces by applying the merge table in order.
std::vector<std::string> bpe_split(const std::string& word, const MergeTable& merges);

Sentence tokenize(const std::vector<std::string>& words, const TokenizerConfig& cfg);

// Greedy byte-pair merges over the corpus words, most frequent pair first,
// ties broken by lexicographic pair order. Deterministic given corpus order.
MergeTable train_bpe(const std::vector<DatasetRecord>& corpus, int num_merges);

MergeTable load_merges(const std::string& path);
void save_merges(const std::string& path, const MergeTable& merges);

// Canonical JSONL, one object per line:
//   {"tokens": [...], "triplets": [{"aspect": [s,e], "opinion": [s,e]|null,
//    "polarity": "POS|NEG|NEU"}, ...]}
// with 0-based inclusive word indexes.
std::vector<DatasetRecord> load_dataset(const std::string& path,
                                        const TokenizerConfig& cfg = {});
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

// Converts the common research format
//   <sentence>####[([a_idx...], [o_idx...], 'POS'), ...]
// into canonical JSONL.
void convert_triplet_format(const std::string& input_path, const std::string& output_path);

}  // namespace absa::data
