#include "absa/types.hpp"

namespace absa {

const char* to_string(Polarity p) {
  switch (p) {
    case Polarity::POS: return "POS";
    case Polarity::NEG: return "NEG";
    case Polarity::NEU: return "NEU";
  }
  throw std::logic_error("unreachable polarity");
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "POS") return Polarity::POS;
  if (s == "NEG") return Polarity::NEG;
  if (s == "NEU") return Polarity::NEU;
  throw std::invalid_argument("unknown polarity: " + s);
}

const char* to_string(Subtask t) {
  switch (t) {
    case Subtask::AE: return "AE";
    case Subtask::OE: return "OE";
    case Subtask::ALSC: return "ALSC";
    case Subtask::AOE: return "AOE";
    case Subtask::AESC: return "AESC";
    case Subtask::Pair: return "Pair";
    case Subtask::Triplet: return "Triplet";
  }
  throw std::logic_error("unreachable subtask");
}

Subtask subtask_from_string(const std::string& s) {
  if (s == "AE") return Subtask::AE;
  if (s == "OE") return Subtask::OE;
  if (s == "ALSC") return Subtask::ALSC;
  if (s == "AOE") return Subtask::AOE;
  if (s == "AESC") return Subtask::AESC;
  if (s == "Pair") return Subtask::Pair;
  if (s == "Triplet") return Subtask::Triplet;
  throw std::invalid_argument("unknown subtask: " + s);
}

Sentence::Sentence(std::vector<std::string> tokens,
                   std::optional<std::vector<bool>> word_begin)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw std::invalid_argument("Sentence: empty token list");
  for (const auto& t : tokens_)
    if (t.empty()) throw std::invalid_argument("Sentence: empty token string");
  if (word_begin) {
    word_begin_ = std::move(*word_begin);
    if (word_begin_.size() != tokens_.size())
      throw std::invalid_argument("Sentence: word_begin length mismatch");
    if (!word_begin_.front())
      throw std::invalid_argument("Sentence: word_begin[0] must be true");
  } else {
    word_begin_.assign(tokens_.size(), true);
  }
}

Annotation::Annotation(Span a, std::vector<Span> o, Polarity p)
    : aspect(a), opinions(std::move(o)), polarity(p) {
  if (!std::is_sorted(opinions.begin(), opinions.end()))
    throw std::invalid_argument("Annotation: opinions must be sorted by (start, end)");
  if (std::adjacent_find(opinions.begin(), opinions.end()) != opinions.end())
    throw std::invalid_argument("Annotation: duplicate opinion span");
}

void Annotation::validate_for(const Sentence& sentence) const {
  if (!sentence.contains(aspect))
    throw std::out_of_range("Annotation: aspect span out of range");
  for (const auto& o : opinions)
    if (!sentence.contains(o))
      throw std::out_of_range("Annotation: opinion span out of range");
}

ClassTokenList ClassTokenList::standard() {
  return ClassTokenList({"<EOS>", "POS", "NEG", "NEU"});
}

ClassTokenList ClassTokenList::with_tags(const std::vector<std::string>& tags) {
  std::vector<std::string> t = {"<EOS>", "POS", "NEG", "NEU"};
  t.insert(t.end(), tags.begin(), tags.end());
  return ClassTokenList(std::move(t));
}

ClassTokenList::ClassTokenList(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_.front() != "<EOS>")
    throw std::invalid_argument("ClassTokenList: position 0 must be <EOS>");
  for (size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t == "POS") pos_ = static_cast<int>(i);
    else if (t == "NEG") neg_ = static_cast<int>(i);
    else if (t == "NEU") neu_ = static_cast<int>(i);
  }
  if (pos_ < 0 || neg_ < 0 || neu_ < 0)
    throw std::invalid_argument("ClassTokenList: POS/NEG/NEU must all be present");
  auto sorted = tokens_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("ClassTokenList: duplicate class token");
}

int ClassTokenList::polarity_index(Polarity p) const {
  switch (p) {
    case Polarity::POS: return pos_;
    case Polarity::NEG: return neg_;
    case Polarity::NEU: return neu_;
  }
  throw std::logic_error("unreachable polarity");
}

bool ClassTokenList::is_polarity(int class_index) const {
  return class_index == pos_ || class_index == neg_ || class_index == neu_;
}

Polarity ClassTokenList::polarity_at(int class_index) const {
  if (class_index == pos_) return Polarity::POS;
  if (class_index == neg_) return Polarity::NEG;
  if (class_index == neu_) return Polarity::NEU;
  throw std::invalid_argument("class index is not a polarity slot");
}

bool ClassTokenList::is_task_tag(int class_index) const {
  if (class_index < 0 || class_index >= size()) return false;
  return class_index != 0 && !is_polarity(class_index);
}

int ClassTokenList::tag_index(const std::string& tag) const {
  for (size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i] == tag) return static_cast<int>(i);
  return -1;
}

TargetSequence::TargetSequence(std::vector<int> indexes, int n, int l, bool raw_flag)
    : indexes_(std::move(indexes)), n_(n), l_(l), raw_(raw_flag) {
  if (n_ < 1 || l_ < 1) throw std::invalid_argument("TargetSequence: need n >= 1 and l >= 1");
  for (int v : indexes_)
    if (v < 0 || v >= n_ + l_)
      throw std::out_of_range("TargetSequence: index outside [0, n+l-1]");
}

TargetSequence TargetSequence::gold(std::vector<int> indexes, int n, int l) {
  TargetSequence seq(std::move(indexes), n, l, /*raw=*/false);
  const int eos = seq.eos_index();
  const auto count = std::count(seq.indexes_.begin(), seq.indexes_.end(), eos);
  if (count != 1 || seq.indexes_.empty() || seq.indexes_.back() != eos)
    throw std::invalid_argument("gold TargetSequence must end with its single EOS index");
  return seq;
}

TargetSequence TargetSequence::raw(std::vector<int> indexes, int n, int l) {
  return TargetSequence(std::move(indexes), n, l, /*raw=*/true);
}

Sentence make_sentence(std::vector<std::string> tokens,
                       std::optional<std::vector<bool>> word_begin) {
  return Sentence(std::move(tokens), std::move(word_begin));
}

}  // namespace absa
