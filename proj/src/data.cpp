#include "absa/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace absa::data {

using nlohmann::json;

namespace {

std::string lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// UTF-8 code points as initial BPE symbols; continuation bytes stay attached.
std::vector<std::string> utf8_chars(const std::string& word) {
  std::vector<std::string> out;
  for (size_t i = 0; i < word.size();) {
    size_t len = 1;
    const auto b = static_cast<unsigned char>(word[i]);
    if ((b & 0xE0) == 0xC0) len = 2;
    else if ((b & 0xF0) == 0xE0) len = 3;
    else if ((b & 0xF8) == 0xF0) len = 4;
    len = std::min(len, word.size() - i);
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

void apply_merge(std::vector<std::string>& symbols,
                 const std::pair<std::string, std::string>& merge) {
  std::vector<std::string> next;
  next.reserve(symbols.size());
  for (size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == merge.first && symbols[i + 1] == merge.second) {
      next.push_back(symbols[i] + symbols[i + 1]);
      ++i;
    } else {
      next.push_back(symbols[i]);
    }
  }
  symbols = std::move(next);
}

std::vector<std::string> normalize_words(std::vector<std::string> words,
                                         const TokenizerConfig& cfg) {
  if (cfg.lowercase)
    for (auto& w : words) w = lower_ascii(std::move(w));
  return words;
}

struct PieceLayout {
  std::vector<std::string> pieces;
  std::vector<bool> word_begin;
  std::vector<int> first_piece;  // per word
  std::vector<int> last_piece;   // per word
};

PieceLayout layout_pieces(const std::vector<std::string>& words, const TokenizerConfig& cfg) {
  if (words.empty()) throw std::invalid_argument("tokenize: empty word list");
  if (cfg.mode == TokenizerConfig::Mode::Bpe && cfg.merges.empty())
    throw std::invalid_argument("tokenize: bpe mode requires a merge table");

  PieceLayout out;
  for (const auto& w : words) {
    if (w.empty()) throw std::invalid_argument("tokenize: empty word");
    std::vector<std::string> pieces;
    if (cfg.mode == TokenizerConfig::Mode::Whitespace)
      pieces = {w};
    else
      pieces = bpe_split(w, cfg.merges);
    out.first_piece.push_back(static_cast<int>(out.pieces.size()));
    for (size_t i = 0; i < pieces.size(); ++i) {
      out.pieces.push_back(pieces[i]);
      out.word_begin.push_back(i == 0);
    }
    out.last_piece.push_back(static_cast<int>(out.pieces.size()) - 1);
  }
  return out;
}

}  // namespace

std::vector<std::string> bpe_split(const std::string& word, const MergeTable& merges) {
  auto symbols = utf8_chars(word);
  for (const auto& m : merges) apply_merge(symbols, m);
  return symbols;
}

Sentence tokenize(const std::vector<std::string>& words, const TokenizerConfig& cfg) {
  auto normalized = normalize_words(words, cfg);
  auto layout = layout_pieces(normalized, cfg);
  return Sentence(std::move(layout.pieces), std::move(layout.word_begin));
}

DatasetRecord::DatasetRecord(std::vector<std::string> words_in,
                             std::vector<Annotation> word_annotations_in,
                             const TokenizerConfig& cfg)
    : words(normalize_words(std::move(words_in), cfg)),
      word_annotations(std::move(word_annotations_in)),
      sentence(tokenize(words, cfg)),
      annotations() {
  const auto layout = layout_pieces(words, cfg);
  const int nwords = static_cast<int>(words.size());
  auto remap = [&](const Span& s) {
    if (s.end >= nwords) throw std::out_of_range("annotation span out of range");
    return Span(layout.first_piece[s.start], layout.last_piece[s.end]);
  };
  for (const auto& a : word_annotations) {
    std::vector<Span> ops;
    ops.reserve(a.opinions.size());
    for (const auto& o : a.opinions) ops.push_back(remap(o));
    std::sort(ops.begin(), ops.end());
    annotations.emplace_back(remap(a.aspect), std::move(ops), a.polarity);
  }
}

MergeTable train_bpe(const std::vector<DatasetRecord>& corpus, int num_merges) {
  if (num_merges < 0) throw std::invalid_argument("train_bpe: num_merges must be >= 0");
  if (corpus.empty()) throw std::invalid_argument("train_bpe: empty corpus");

  // word-type frequencies
  std::map<std::string, long> freq;
  for (const auto& rec : corpus)
    for (const auto& w : rec.words) freq[w]++;

  std::map<std::string, std::vector<std::string>> symbols;
  for (const auto& [w, f] : freq) symbols[w] = utf8_chars(w);

  MergeTable merges;
  for (int step = 0; step < num_merges; ++step) {
    std::map<std::pair<std::string, std::string>, long> pair_freq;
    for (const auto& [w, syms] : symbols)
      for (size_t i = 0; i + 1 < syms.size(); ++i)
        pair_freq[{syms[i], syms[i + 1]}] += freq[w];
    if (pair_freq.empty()) break;

    // highest count wins; std::map order already breaks ties lexicographically
    auto best = pair_freq.begin();
    for (auto it = pair_freq.begin(); it != pair_freq.end(); ++it)
      if (it->second > best->second) best = it;

    merges.push_back(best->first);
    for (auto& [w, syms] : symbols) apply_merge(syms, best->first);
  }
  return merges;
}

MergeTable load_merges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open merges file: " + path);
  json j = json::parse(in);
  MergeTable out;
  for (const auto& m : j.at("merges"))
    out.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  return out;
}

void save_merges(const std::string& path, const MergeTable& merges) {
  json j;
  j["merges"] = json::array();
  for (const auto& [a, b] : merges) j["merges"].push_back({a, b});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write merges file: " + path);
  out << j.dump() << "\n";
}

namespace {

Span span_from_json(const json& arr) {
  if (!arr.is_array() || arr.size() != 2)
    throw std::invalid_argument("span must be a [start, end] pair");
  return Span(arr[0].get<int>(), arr[1].get<int>());
}

std::vector<Annotation> group_triplets(const json& triplets) {
  // group flat (aspect, opinion, polarity) rows into one annotation per
  // (aspect, polarity), opinions sorted and deduplicated
  std::map<std::pair<Span, int>, std::set<Span>> grouped;
  for (const auto& t : triplets) {
    Span aspect = span_from_json(t.at("aspect"));
    Polarity pol = polarity_from_string(t.at("polarity").get<std::string>());
    auto& ops = grouped[{aspect, static_cast<int>(pol)}];
    if (t.contains("opinion") && !t.at("opinion").is_null())
      ops.insert(span_from_json(t.at("opinion")));
  }
  std::vector<Annotation> out;
  for (const auto& [key, ops] : grouped)
    out.emplace_back(key.first, std::vector<Span>(ops.begin(), ops.end()),
                     static_cast<Polarity>(key.second));
  std::sort(out.begin(), out.end(), [](const Annotation& a, const Annotation& b) {
    int ao = a.opinions.empty() ? -1 : a.opinions.front().start;
    int bo = b.opinions.empty() ? -1 : b.opinions.front().start;
    return std::tie(a.aspect.start, a.aspect.end, ao) <
           std::tie(b.aspect.start, b.aspect.end, bo);
  });
  return out;
}

}  // namespace

std::vector<DatasetRecord> load_dataset(const std::string& path, const TokenizerConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  std::vector<DatasetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::vector<std::string> words = j.at("tokens").get<std::vector<std::string>>();
      auto annotations = group_triplets(j.value("triplets", json::array()));
      records.emplace_back(std::move(words), std::move(annotations), cfg);
      for (const auto& a : records.back().annotations)
        a.validate_for(records.back().sentence);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& rec : records) {
    json j;
    j["tokens"] = rec.words;
    j["triplets"] = json::array();
    for (const auto& a : rec.word_annotations) {
      if (a.opinions.empty()) {
        j["triplets"].push_back({{"aspect", {a.aspect.start, a.aspect.end}},
                                 {"opinion", nullptr},
                                 {"polarity", to_string(a.polarity)}});
      } else {
        for (const auto& o : a.opinions)
          j["triplets"].push_back({{"aspect", {a.aspect.start, a.aspect.end}},
                                   {"opinion", {o.start, o.end}},
                                   {"polarity", to_string(a.polarity)}});
      }
    }
    out << j.dump() << "\n";
  }
}

namespace {

// minimal scanner for the "[([1], [4, 5], 'POS'), ...]" label syntax
struct LabelScanner {
  std::string s;
  size_t i = 0;

  explicit LabelScanner(const std::string& text) : s(text) {}

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c))
      throw std::invalid_argument(std::string("expected '") + c + "' at offset " +
                                  std::to_string(i));
  }
  int integer() {
    skip_ws();
    size_t start = i;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '-')) ++i;
    if (start == i) throw std::invalid_argument("expected integer at offset " + std::to_string(i));
    return std::stoi(s.substr(start, i - start));
  }
  std::vector<int> int_list() {
    expect('[');
    std::vector<int> out;
    skip_ws();
    if (eat(']')) return out;
    out.push_back(integer());
    while (eat(',')) out.push_back(integer());
    expect(']');
    return out;
  }
  std::string quoted() {
    skip_ws();
    if (i >= s.size() || (s[i] != '\'' && s[i] != '"'))
      throw std::invalid_argument("expected quoted string at offset " + std::to_string(i));
    const char q = s[i++];
    size_t start = i;
    while (i < s.size() && s[i] != q) ++i;
    if (i >= s.size()) throw std::invalid_argument("unterminated string");
    return s.substr(start, i++ - start);
  }
};

Span span_from_indices(const std::vector<int>& idx) {
  if (idx.empty()) throw std::invalid_argument("empty index list in triplet");
  auto [mn, mx] = std::minmax_element(idx.begin(), idx.end());
  return Span(*mn, *mx);
}

std::string map_polarity_label(std::string p) {
  for (char& c : p) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (p == "POS" || p == "POSITIVE") return "POS";
  if (p == "NEG" || p == "NEGATIVE") return "NEG";
  if (p == "NEU" || p == "NEUTRAL") return "NEU";
  throw std::invalid_argument("unknown polarity label: " + p);
}

}  // namespace

void convert_triplet_format(const std::string& input_path, const std::string& output_path) {
  std::ifstream in(input_path);
  if (!in) throw std::runtime_error("cannot open input: " + input_path);
  std::ofstream out(output_path);
  if (!out) throw std::runtime_error("cannot write output: " + output_path);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto sep = line.find("####");
      if (sep == std::string::npos) throw std::invalid_argument("missing #### separator");
      std::istringstream words_in(line.substr(0, sep));
      std::vector<std::string> words;
      for (std::string w; words_in >> w;) words.push_back(w);
      if (words.empty()) throw std::invalid_argument("empty sentence");

      json triplets = json::array();
      LabelScanner sc(line.substr(sep + 4));
      sc.expect('[');
      sc.skip_ws();
      if (!sc.eat(']')) {
        do {
          sc.expect('(');
          Span aspect = span_from_indices(sc.int_list());
          sc.expect(',');
          Span opinion = span_from_indices(sc.int_list());
          sc.expect(',');
          std::string pol = map_polarity_label(sc.quoted());
          sc.expect(')');
          triplets.push_back({{"aspect", {aspect.start, aspect.end}},
                              {"opinion", {opinion.start, opinion.end}},
                              {"polarity", pol}});
        } while (sc.eat(','));
        sc.expect(']');
      }

      json j;
      j["tokens"] = words;
      j["triplets"] = std::move(triplets);
      out << j.dump() << "\n";
    } catch (const std::exception& e) {
      throw std::runtime_error(input_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace absa::data
