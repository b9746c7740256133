#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace absa {

// Sentiment polarity attached to an aspect term.
enum class Polarity { POS, NEG, NEU };

const char* to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

// The seven ABSA subtasks, plus the multitask bundle handled at the CLI layer.
enum class Subtask { AE, OE, ALSC, AOE, AESC, Pair, Triplet };

const char* to_string(Subtask t);
Subtask subtask_from_string(const std::string& s);

// Inclusive token span: single-token terms have start == end.
struct Span {
  int start = 0;
  int end = 0;

  Span() = default;
  Span(int s, int e) : start(s), end(e) {
    if (s < 0 || e < s) throw std::invalid_argument("Span: need 0 <= start <= end");
  }

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Tokenized source text. word_begin[i] marks tokens that start a surface word;
// under the whitespace tokenizer every entry is true.
class Sentence {
 public:
  Sentence(std::vector<std::string> tokens,
           std::optional<std::vector<bool>> word_begin = std::nullopt);

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<bool>& word_begin() const { return word_begin_; }
  int size() const { return static_cast<int>(tokens_.size()); }

  bool contains(const Span& s) const { return s.end < size(); }

  friend bool operator==(const Sentence&, const Sentence&) = default;

 private:
  std::vector<std::string> tokens_;
  std::vector<bool> word_begin_;
};

// Gold <a, o, s> structure: one aspect, its polarity, and zero or more
// opinion spans sorted ascending with no duplicates.
struct Annotation {
  Span aspect;
  std::vector<Span> opinions;
  Polarity polarity = Polarity::POS;

  Annotation() = default;
  Annotation(Span a, std::vector<Span> o, Polarity p);

  void validate_for(const Sentence& sentence) const;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Class token list C = [c_1, ..., c_l]. Position 0 is always "<EOS>";
// POS/NEG/NEU are present at fixed positions; task tags are optional extras.
class ClassTokenList {
 public:
  static ClassTokenList standard();                                  // <EOS>, POS, NEG, NEU
  static ClassTokenList with_tags(const std::vector<std::string>& tags);

  explicit ClassTokenList(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  int size() const { return static_cast<int>(tokens_.size()); }

  int eos_index() const { return 0; }
  int polarity_index(Polarity p) const;
  Polarity polarity_at(int class_index) const;  // throws if not a polarity slot
  bool is_polarity(int class_index) const;
  bool is_task_tag(int class_index) const;
  int tag_index(const std::string& tag) const;  // -1 when absent

  friend bool operator==(const ClassTokenList&, const ClassTokenList&) = default;

 private:
  std::vector<std::string> tokens_;
  int pos_ = -1, neg_ = -1, neu_ = -1;
};

// Unified target Y: a mixed list of pointer indexes (< n) and class
// indexes (>= n, class k at n + k). A validated gold sequence ends with the
// EOS class index and contains it nowhere else; raw generated sequences give
// no such guarantee.
class TargetSequence {
 public:
  static TargetSequence gold(std::vector<int> indexes, int n, int l);
  static TargetSequence raw(std::vector<int> indexes, int n, int l);

  const std::vector<int>& indexes() const { return indexes_; }
  int n() const { return n_; }
  int l() const { return l_; }
  bool is_raw() const { return raw_; }
  int size() const { return static_cast<int>(indexes_.size()); }

  bool is_pointer(int index) const { return index >= 0 && index < n_; }
  bool is_class(int index) const { return index >= n_ && index < n_ + l_; }
  int eos_index() const { return n_; }  // class 0 is always <EOS>

  friend bool operator==(const TargetSequence&, const TargetSequence&) = default;

 private:
  TargetSequence(std::vector<int> indexes, int n, int l, bool raw_flag);

  std::vector<int> indexes_;
  int n_ = 0;
  int l_ = 0;
  bool raw_ = false;
};

Sentence make_sentence(std::vector<std::string> tokens,
                       std::optional<std::vector<bool>> word_begin = std::nullopt);

}  // namespace absa
