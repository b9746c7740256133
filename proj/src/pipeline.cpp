#include "absa/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "absa/checkpoint.hpp"
#include "absa/codec.hpp"
#include "absa/data.hpp"
#include "absa/eval.hpp"

namespace absa::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "subtask",       "train_path",   "dev_path",     "test_path",    "output_dir",
      "d",             "layers_enc",   "layers_dec",   "heads",        "ffn_dim",
      "alpha",         "dropout",      "seed",         "max_src_len",  "max_tgt_len",
      "scaled_logits", "learning_rate", "warmup_steps", "epochs",      "batch_size",
      "grad_clip",     "beam",         "max_len",      "multi_tasks",  "multi_weights",
      "tokenizer_mode", "merges_path", "lowercase"};
  return keys;
}

bool is_multi(const std::string& subtask) { return subtask == "multi"; }

std::vector<Subtask> tasks_of(const std::string& subtask,
                              const std::vector<std::string>& multi_tasks) {
  std::vector<Subtask> tasks;
  if (is_multi(subtask)) {
    if (multi_tasks.empty())
      throw std::invalid_argument("multi mode needs a non-empty multi_tasks list");
    for (const auto& t : multi_tasks) tasks.push_back(subtask_from_string(t));
  } else {
    tasks.push_back(subtask_from_string(subtask));
  }
  return tasks;
}

ClassTokenList classes_for(const std::string& subtask,
                           const std::vector<std::string>& multi_tasks) {
  if (!is_multi(subtask)) return ClassTokenList::standard();
  std::vector<std::string> tags;
  for (const auto& t : multi_tasks) tags.push_back(codec::task_tag(subtask_from_string(t)));
  return ClassTokenList::with_tags(tags);
}

data::TokenizerConfig tokenizer_of(const std::string& mode, bool lowercase,
                                   const data::MergeTable& merges) {
  data::TokenizerConfig tok;
  if (mode == "whitespace") {
    tok.mode = data::TokenizerConfig::Mode::Whitespace;
  } else if (mode == "bpe") {
    tok.mode = data::TokenizerConfig::Mode::Bpe;
    tok.merges = merges;
  } else {
    throw std::invalid_argument("unknown tokenizer_mode: " + mode);
  }
  tok.lowercase = lowercase;
  return tok;
}

json merges_json(const data::MergeTable& merges) {
  json j = json::array();
  for (const auto& [a, b] : merges) j.push_back({a, b});
  return j;
}

data::MergeTable merges_from_json(const json& j) {
  data::MergeTable out;
  for (const auto& m : j) out.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  return out;
}

bool needs_given(Subtask t) { return t == Subtask::ALSC || t == Subtask::AOE; }

std::vector<model::TrainExample> build_examples(const std::vector<data::DatasetRecord>& records,
                                                const codec::Codec& cdc,
                                                const std::vector<Subtask>& tasks,
                                                const std::vector<double>& weights) {
  std::vector<model::TrainExample> out;
  for (const auto& rec : records) {
    for (size_t k = 0; k < tasks.size(); ++k) {
      const Subtask task = tasks[k];
      const double w = weights.empty() ? 1.0 : weights[k];
      if (needs_given(task)) {
        for (const auto& a : rec.annotations)
          out.push_back({rec.sentence,
                         cdc.encode(task, rec.sentence, rec.annotations, a.aspect), w});
      } else {
        out.push_back({rec.sentence, cdc.encode(task, rec.sentence, rec.annotations), w});
      }
    }
  }
  return out;
}

json span_json(const Span& s) { return json::array({s.start, s.end}); }
Span span_of(const json& j) { return Span(j.at(0).get<int>(), j.at(1).get<int>()); }

json counts_json(const codec::DecodeCounts& c) {
  return json{{"total", c.total_chunks}, {"size", c.invalid_size},
              {"order", c.invalid_order}, {"class", c.invalid_class},
              {"extra", c.invalid_extra}};
}

// decoded tuples as self-describing JSON per task
json decode_to_json(const codec::Codec& cdc, Subtask task, const TargetSequence& raw,
                    std::optional<Span> given, codec::DecodeCounts* counts) {
  json out = json::array();
  switch (task) {
    case Subtask::AE:
      for (const auto& s : cdc.decode_ae(raw, counts)) out.push_back(span_json(s));
      break;
    case Subtask::OE:
      for (const auto& s : cdc.decode_oe(raw, counts)) out.push_back(span_json(s));
      break;
    case Subtask::AOE:
      for (const auto& s : cdc.decode_aoe(raw, *given, counts)) out.push_back(span_json(s));
      break;
    case Subtask::ALSC:
      if (auto pol = cdc.decode_alsc(raw, *given, counts))
        out.push_back({{"aspect", span_json(*given)}, {"polarity", to_string(*pol)}});
      break;
    case Subtask::AESC:
      for (const auto& [a, p] : cdc.decode_aesc(raw, counts))
        out.push_back({{"aspect", span_json(a)}, {"polarity", to_string(p)}});
      break;
    case Subtask::Pair:
      for (const auto& [a, o] : cdc.decode_pair(raw, counts))
        out.push_back({{"aspect", span_json(a)}, {"opinion", span_json(o)}});
      break;
    case Subtask::Triplet:
      for (const auto& [a, o, p] : cdc.decode_triplet(raw, counts))
        out.push_back({{"aspect", span_json(a)}, {"opinion", span_json(o)},
                       {"polarity", to_string(p)}});
      break;
  }
  return out;
}

struct PredLine {
  int sentence_index = 0;
  Subtask task = Subtask::Triplet;
  std::vector<std::string> tokens;
  std::vector<bool> word_begin;
  std::optional<Span> given;
  std::vector<int> raw;
  json decoded;
  json invalid;
};

struct Predictions {
  json meta;
  std::vector<PredLine> lines;
};

json line_to_json(const PredLine& l) {
  json j;
  j["sentence_index"] = l.sentence_index;
  j["task"] = to_string(l.task);
  j["tokens"] = l.tokens;
  j["word_begin"] = l.word_begin;
  j["given"] = l.given ? span_json(*l.given) : json(nullptr);
  j["raw"] = l.raw;
  j["decoded"] = l.decoded;
  j["invalid"] = l.invalid;
  return j;
}

PredLine line_from_json(const json& j) {
  PredLine l;
  l.sentence_index = j.at("sentence_index").get<int>();
  l.task = subtask_from_string(j.at("task").get<std::string>());
  l.tokens = j.at("tokens").get<std::vector<std::string>>();
  l.word_begin = j.at("word_begin").get<std::vector<bool>>();
  if (!j.at("given").is_null()) l.given = span_of(j.at("given"));
  l.raw = j.at("raw").get<std::vector<int>>();
  l.decoded = j.at("decoded");
  l.invalid = j.at("invalid");
  return l;
}

Predictions predict_core(const model::Transformer& mdl, const codec::Codec& cdc,
                         const std::vector<data::DatasetRecord>& records,
                         const std::string& subtask, const std::vector<Subtask>& tasks,
                         int beam, int max_len) {
  Predictions preds;
  preds.meta = json{{"type", "meta"},
                    {"subtask", subtask},
                    {"tasks", json::array()},
                    {"beam", beam},
                    {"max_len", max_len},
                    {"classes", mdl.classes().tokens()}};
  for (auto t : tasks) preds.meta["tasks"].push_back(to_string(t));

  bool any_aspect = false;
  for (const auto& rec : records) any_aspect = any_aspect || !rec.annotations.empty();
  for (auto t : tasks)
    if (needs_given(t) && !any_aspect)
      throw std::invalid_argument(std::string(to_string(t)) +
                                  " needs given aspects but the dataset has none");

  for (size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    for (auto task : tasks) {
      std::vector<std::optional<Span>> givens;
      if (needs_given(task)) {
        for (const auto& a : rec.annotations) givens.emplace_back(a.aspect);
      } else {
        givens.emplace_back(std::nullopt);
      }
      for (const auto& given : givens) {
        PredLine l;
        l.sentence_index = static_cast<int>(i);
        l.task = task;
        l.tokens = rec.sentence.tokens();
        l.word_begin = rec.sentence.word_begin();
        l.given = given;
        auto raw = mdl.generate(rec.sentence, task, beam, max_len, given);
        l.raw = raw.indexes();
        codec::DecodeCounts counts;
        l.decoded = decode_to_json(cdc, task, raw, given, &counts);
        l.invalid = counts_json(counts);
        preds.lines.push_back(std::move(l));
      }
    }
  }
  return preds;
}

void write_predictions(const std::string& path, const Predictions& preds) {
  std::ostringstream os;
  os << preds.meta.dump() << "\n";
  for (const auto& l : preds.lines) os << line_to_json(l).dump() << "\n";
  write_text_file(path, os.str());
}

Predictions read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open predictions: " + path);
  Predictions preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (line_no == 1) {
        if (j.value("type", "") != "meta")
          throw std::invalid_argument("first line must be the meta object");
        preds.meta = std::move(j);
      } else {
        preds.lines.push_back(line_from_json(j));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (preds.meta.is_null()) throw std::runtime_error(path + ": missing meta line");
  return preds;
}

// ---- evaluation plumbing ----

using TupleSet = std::set<eval::Tuple>;

TupleSet gold_tuples(Subtask task, const data::DatasetRecord& rec,
                     const std::optional<Span>& given) {
  TupleSet out;
  switch (task) {
    case Subtask::AE:
      for (const auto& a : rec.annotations) out.insert(eval::tuple_of(a.aspect));
      break;
    case Subtask::OE:
      for (const auto& a : rec.annotations)
        for (const auto& o : a.opinions) out.insert(eval::tuple_of(o));
      break;
    case Subtask::AESC:
      for (const auto& a : rec.annotations)
        out.insert(eval::tuple_of(codec::AspectSentiment{a.aspect, a.polarity}));
      break;
    case Subtask::Pair:
      for (const auto& a : rec.annotations)
        for (const auto& o : a.opinions)
          out.insert(eval::tuple_of(codec::SpanPair{a.aspect, o}));
      break;
    case Subtask::Triplet:
      for (const auto& a : rec.annotations)
        for (const auto& o : a.opinions)
          out.insert(eval::tuple_of(codec::TripletTuple{a.aspect, o, a.polarity}));
      break;
    case Subtask::ALSC:
    case Subtask::AOE: {
      auto it = std::find_if(rec.annotations.begin(), rec.annotations.end(),
                             [&](const Annotation& a) { return a.aspect == *given; });
      if (it == rec.annotations.end())
        throw std::runtime_error("prediction given aspect not present in gold record");
      if (task == Subtask::ALSC) {
        out.insert(eval::tuple_of(codec::AspectSentiment{it->aspect, it->polarity}));
      } else {
        for (const auto& o : it->opinions) out.insert(eval::tuple_of(o));
      }
      break;
    }
  }
  return out;
}

TupleSet decoded_tuples(Subtask task, const json& decoded) {
  TupleSet out;
  for (const auto& item : decoded) {
    switch (task) {
      case Subtask::AE:
      case Subtask::OE:
      case Subtask::AOE:
        out.insert(eval::tuple_of(span_of(item)));
        break;
      case Subtask::ALSC:
      case Subtask::AESC:
        out.insert(eval::tuple_of(codec::AspectSentiment{
            span_of(item.at("aspect")),
            polarity_from_string(item.at("polarity").get<std::string>())}));
        break;
      case Subtask::Pair:
        out.insert(eval::tuple_of(
            codec::SpanPair{span_of(item.at("aspect")), span_of(item.at("opinion"))}));
        break;
      case Subtask::Triplet:
        out.insert(eval::tuple_of(codec::TripletTuple{
            span_of(item.at("aspect")), span_of(item.at("opinion")),
            polarity_from_string(item.at("polarity").get<std::string>())}));
        break;
    }
  }
  return out;
}

struct EvalOutput {
  std::vector<eval::ReportRow> rows;
  std::optional<eval::ConditionedScores> conditioned;
};

EvalOutput evaluate_core(const Predictions& preds,
                         const std::vector<data::DatasetRecord>& gold) {
  const auto tasks = preds.meta.at("tasks").get<std::vector<std::string>>();

  EvalOutput out;
  std::vector<std::set<codec::AspectSentiment>> pred_aesc_sets;
  bool have_aesc = false;

  for (const auto& task_name : tasks) {
    const Subtask task = subtask_from_string(task_name);
    std::vector<TupleSet> g, p;
    std::size_t expected = 0;
    for (const auto& rec : gold)
      expected += needs_given(task) ? rec.annotations.size() : 1;

    std::size_t seen = 0;
    std::vector<std::set<codec::AspectSentiment>> aesc_by_sentence(gold.size());
    for (const auto& l : preds.lines) {
      if (l.task != task) continue;
      ++seen;
      if (l.sentence_index < 0 || l.sentence_index >= static_cast<int>(gold.size()))
        throw std::runtime_error("prediction sentence_index out of range");
      const auto& rec = gold[l.sentence_index];
      if (l.tokens != rec.sentence.tokens())
        throw std::runtime_error("prediction tokens disagree with the gold sentence " +
                                 std::to_string(l.sentence_index));
      g.push_back(gold_tuples(task, rec, l.given));
      p.push_back(decoded_tuples(task, l.decoded));
      if (task == Subtask::AESC) {
        for (const auto& item : l.decoded)
          aesc_by_sentence[l.sentence_index].insert(
              {span_of(item.at("aspect")),
               polarity_from_string(item.at("polarity").get<std::string>())});
      }
    }
    if (seen != expected)
      throw std::runtime_error("sentence count mismatch for " + task_name + ": expected " +
                               std::to_string(expected) + " predictions, found " +
                               std::to_string(seen));
    out.rows.push_back({task_name, eval::score_spans(g, p)});
    if (task == Subtask::AESC) {
      have_aesc = true;
      pred_aesc_sets = std::move(aesc_by_sentence);
    }
  }

  // TP-AE-conditioned ALSC/AESC whenever aspect+polarity predictions exist;
  // AE hits are the aspect spans of the AESC predictions
  if (have_aesc) {
    std::vector<std::vector<codec::AspectSentiment>> gold_aspects(gold.size());
    std::vector<std::set<Span>> pred_ae(gold.size());
    for (size_t i = 0; i < gold.size(); ++i) {
      for (const auto& a : gold[i].annotations)
        gold_aspects[i].push_back({a.aspect, a.polarity});
      for (const auto& [aspect, pol] : pred_aesc_sets[i]) pred_ae[i].insert(aspect);
    }
    out.conditioned = eval::score_conditioned(gold_aspects, pred_ae, pred_aesc_sets);
  }
  return out;
}

json eval_to_json(const EvalOutput& ev) {
  json j;
  j["rows"] = json::parse(eval::report_to_json(ev.rows));
  if (ev.conditioned) {
    const auto& c = *ev.conditioned;
    j["conditioned"] = {{"alsc_accuracy", c.alsc_accuracy},
                        {"alsc_support", c.alsc_support},
                        {"alsc_zero_support", c.alsc_zero_support},
                        {"aesc",
                         {{"precision", c.aesc.precision},
                          {"recall", c.aesc.recall},
                          {"f1", c.aesc.f1},
                          {"gold", c.aesc.gold},
                          {"predicted", c.aesc.predicted},
                          {"matched", c.aesc.matched},
                          {"zero_support", c.aesc.zero_support}}}};
  } else {
    j["conditioned"] = nullptr;
  }
  return j;
}

std::string eval_to_table(const EvalOutput& ev) {
  std::string table = eval::report_to_table(ev.rows);
  if (ev.conditioned) {
    std::ostringstream os;
    os << table << "\n"
       << "TP-AE-conditioned ALSC accuracy: " << ev.conditioned->alsc_accuracy << " (support "
       << ev.conditioned->alsc_support
       << (ev.conditioned->alsc_zero_support ? ", zero support)" : ")") << "\n"
       << "TP-AE-conditioned AESC F1: " << ev.conditioned->aesc.f1 << "\n";
    return os.str();
  }
  return table;
}

data::TokenizerConfig tokenizer_from_meta(const json& extra) {
  return tokenizer_of(extra.value("tokenizer_mode", "whitespace"),
                      extra.value("lowercase", false),
                      merges_from_json(extra.value("merges", json::array())));
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known_config_keys().count(key))
      throw std::invalid_argument("unknown config key: " + key);

  RunConfig cfg;
  try {
    cfg.subtask = j.value("subtask", cfg.subtask);
    cfg.train_path = j.value("train_path", cfg.train_path);
    cfg.dev_path = j.value("dev_path", cfg.dev_path);
    cfg.test_path = j.value("test_path", cfg.test_path);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);

    cfg.model.d = j.value("d", cfg.model.d);
    cfg.model.layers_enc = j.value("layers_enc", cfg.model.layers_enc);
    cfg.model.layers_dec = j.value("layers_dec", cfg.model.layers_dec);
    cfg.model.heads = j.value("heads", cfg.model.heads);
    cfg.model.ffn_dim = j.value("ffn_dim", cfg.model.ffn_dim);
    cfg.model.alpha = j.value("alpha", cfg.model.alpha);
    cfg.model.dropout = j.value("dropout", cfg.model.dropout);
    cfg.model.seed = j.value("seed", cfg.model.seed);
    cfg.model.max_src_len = j.value("max_src_len", cfg.model.max_src_len);
    cfg.model.max_tgt_len = j.value("max_tgt_len", cfg.model.max_tgt_len);
    cfg.model.scaled_logits = j.value("scaled_logits", cfg.model.scaled_logits);

    cfg.optim.learning_rate = j.value("learning_rate", cfg.optim.learning_rate);
    cfg.optim.warmup_steps = j.value("warmup_steps", cfg.optim.warmup_steps);
    cfg.optim.epochs = j.value("epochs", cfg.optim.epochs);
    cfg.optim.batch_size = j.value("batch_size", cfg.optim.batch_size);
    cfg.optim.grad_clip = j.value("grad_clip", cfg.optim.grad_clip);

    cfg.beam = j.value("beam", cfg.beam);
    cfg.max_len = j.value("max_len", cfg.max_len);
    cfg.multi_tasks = j.value("multi_tasks", cfg.multi_tasks);
    cfg.multi_weights = j.value("multi_weights", cfg.multi_weights);
    cfg.tokenizer_mode = j.value("tokenizer_mode", cfg.tokenizer_mode);
    cfg.merges_path = j.value("merges_path", cfg.merges_path);
    cfg.lowercase = j.value("lowercase", cfg.lowercase);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
  }

  if (!is_multi(cfg.subtask)) subtask_from_string(cfg.subtask);  // validates
  if (!cfg.multi_weights.empty() && cfg.multi_weights.size() != cfg.multi_tasks.size())
    throw std::invalid_argument("multi_weights must align with multi_tasks");
  for (double w : cfg.multi_weights)
    if (w <= 0) throw std::invalid_argument("multi_weights must be positive");
  cfg.model.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("cannot read config: ") + e.what());
  }
  for (const auto& [key, value] : overrides) {
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::exception&) {
      parsed = value;  // plain string
    }
    j[key] = parsed;
  }
  return parse_run_config(j.dump());
}

void run_train(const RunConfig& cfg) {
  if (cfg.train_path.empty() || !fs::exists(cfg.train_path))
    throw std::invalid_argument("train_path does not exist: " + cfg.train_path);
  for (const std::string& p : {cfg.dev_path, cfg.test_path})
    if (!p.empty() && !fs::exists(p))
      throw std::invalid_argument("dataset path does not exist: " + p);

  data::MergeTable merges;
  if (cfg.tokenizer_mode == "bpe") {
    if (cfg.merges_path.empty() || !fs::exists(cfg.merges_path))
      throw std::invalid_argument("bpe tokenizer needs an existing merges_path");
    merges = data::load_merges(cfg.merges_path);
  }
  const auto tok = tokenizer_of(cfg.tokenizer_mode, cfg.lowercase, merges);

  auto records = data::load_dataset(cfg.train_path, tok);
  if (records.empty()) throw std::invalid_argument("training dataset is empty");

  const auto tasks = tasks_of(cfg.subtask, cfg.multi_tasks);
  codec::Codec cdc(classes_for(cfg.subtask, cfg.multi_tasks), is_multi(cfg.subtask));

  std::vector<Sentence> sentences;
  for (const auto& r : records) sentences.push_back(r.sentence);
  model::Transformer mdl(cfg.model, model::Vocabulary::from_corpus(sentences), cdc.classes(),
                         cdc.multitask());

  auto examples = build_examples(records, cdc, tasks, cfg.multi_weights);
  if (examples.empty())
    throw std::invalid_argument("no training examples could be built for " + cfg.subtask);

  auto result = mdl.train(examples, cfg.optim);

  json extra = {{"subtask", cfg.subtask},
                {"multi_tasks", cfg.multi_tasks},
                {"tokenizer_mode", cfg.tokenizer_mode},
                {"lowercase", cfg.lowercase},
                {"merges", merges_json(merges)}};
  fs::create_directories(cfg.output_dir);
  model::save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.bin").string(),
                         model::to_checkpoint(mdl, extra.dump()));

  json trace = {{"step_losses", result.step_losses},
                {"step_lrs", result.step_lrs},
                {"epoch_means", result.epoch_means}};
  if (!cfg.dev_path.empty()) {
    auto dev = data::load_dataset(cfg.dev_path, tok);
    auto dev_examples = build_examples(dev, cdc, tasks, cfg.multi_weights);
    if (!dev_examples.empty()) trace["final_dev_loss"] = mdl.nll_loss(dev_examples);
  }
  write_text_file((fs::path(cfg.output_dir) / "loss_trace.json").string(), trace.dump(2) + "\n");
}

void run_predict(const std::string& checkpoint_path, const std::string& data_path,
                 const std::string& subtask, int beam, int max_len,
                 const std::string& out_path) {
  if (!fs::exists(checkpoint_path))
    throw std::invalid_argument("checkpoint does not exist: " + checkpoint_path);
  if (!fs::exists(data_path))
    throw std::invalid_argument("dataset does not exist: " + data_path);

  auto ckpt = model::load_checkpoint(checkpoint_path);
  json extra = json::parse(ckpt.extra);
  const std::string trained_for = extra.value("subtask", "");
  if (trained_for != subtask)
    throw std::invalid_argument("checkpoint was trained for subtask '" + trained_for +
                                "', not '" + subtask + "'");

  auto mdl = model::from_checkpoint(ckpt);
  auto records = data::load_dataset(data_path, tokenizer_from_meta(extra));
  const auto tasks =
      tasks_of(subtask, extra.value("multi_tasks", std::vector<std::string>{}));
  codec::Codec cdc(mdl.classes(), mdl.multitask());

  auto preds = predict_core(mdl, cdc, records, subtask, tasks, beam, max_len);
  preds.meta["tokenizer_mode"] = extra.value("tokenizer_mode", "whitespace");
  preds.meta["lowercase"] = extra.value("lowercase", false);
  preds.meta["merges"] = extra.value("merges", json::array());
  write_predictions(out_path, preds);
}

void run_evaluate(const std::string& predictions_path, const std::string& gold_path,
                  const std::string& subtask, const std::string& out_json,
                  const std::string& out_table) {
  if (!fs::exists(gold_path))
    throw std::invalid_argument("gold dataset does not exist: " + gold_path);
  auto preds = read_predictions(predictions_path);
  if (preds.meta.value("subtask", "") != subtask)
    throw std::invalid_argument("predictions were made for subtask '" +
                                preds.meta.value("subtask", "") + "', not '" + subtask + "'");
  auto gold = data::load_dataset(gold_path, tokenizer_from_meta(preds.meta));
  auto ev = evaluate_core(preds, gold);
  write_text_file(out_json, eval_to_json(ev).dump(2) + "\n");
  write_text_file(out_table, eval_to_table(ev));
}

void run_analyze(const std::string& predictions_path, const std::string& subtask,
                 const std::string& out_path) {
  auto preds = read_predictions(predictions_path);
  if (preds.meta.value("subtask", "") != subtask)
    throw std::invalid_argument("predictions were made for subtask '" +
                                preds.meta.value("subtask", "") + "', not '" + subtask + "'");
  const auto classes = ClassTokenList(preds.meta.at("classes").get<std::vector<std::string>>());
  const bool multitask = is_multi(subtask);
  codec::Codec cdc(classes, multitask);

  json rows = json::array();
  std::ostringstream table;
  table << std::left;
  for (const auto& task_name : preds.meta.at("tasks").get<std::vector<std::string>>()) {
    const Subtask task = subtask_from_string(task_name);
    std::vector<TargetSequence> seqs;
    std::vector<Sentence> sents;
    std::vector<Span> givens;
    for (const auto& l : preds.lines) {
      if (l.task != task) continue;
      sents.emplace_back(l.tokens, l.word_begin);
      seqs.push_back(TargetSequence::raw(l.raw, static_cast<int>(l.tokens.size()),
                                         classes.size()));
      if (l.given) givens.push_back(*l.given);
    }
    const std::vector<Span>* given_ptr =
        (task == Subtask::ALSC || task == Subtask::AOE) ? &givens : nullptr;
    auto rep = cdc.validity_report(seqs, task, sents, given_ptr);
    rows.push_back({{"task", task_name},
                    {"total_chunks", rep.total_chunks},
                    {"invalid_size_count", rep.invalid_size_count},
                    {"invalid_order_count", rep.invalid_order_count},
                    {"invalid_token_count", rep.invalid_token_count},
                    {"valid_length_count", rep.valid_length_count},
                    {"invalid_size_rate", rep.invalid_size_rate},
                    {"invalid_order_rate", rep.invalid_order_rate},
                    {"invalid_token_rate", rep.invalid_token_rate}});
    table << "[" << task_name << "] chunks: " << rep.total_chunks << "\n"
          << "  Invalid size:  " << rep.invalid_size_rate * 100.0 << "%\n"
          << "  Invalid order: " << rep.invalid_order_rate * 100.0 << "%\n"
          << "  Invalid token: " << rep.invalid_token_rate * 100.0 << "%\n";
  }
  write_text_file(out_path, json{{"tasks", rows}}.dump(2) + "\n");
  write_text_file(out_path + ".txt", table.str());
}

void run_beam_sweep(const std::string& checkpoint_path, const std::string& data_path,
                    const std::string& gold_path, const std::string& subtask,
                    const std::vector<int>& beams, int max_len, const std::string& out_path) {
  if (!fs::exists(checkpoint_path))
    throw std::invalid_argument("checkpoint does not exist: " + checkpoint_path);
  if (!fs::exists(data_path))
    throw std::invalid_argument("dataset does not exist: " + data_path);
  if (beams.empty()) throw std::invalid_argument("beam sweep needs at least one width");

  auto ckpt = model::load_checkpoint(checkpoint_path);
  json extra = json::parse(ckpt.extra);
  if (extra.value("subtask", "") != subtask)
    throw std::invalid_argument("checkpoint was trained for subtask '" +
                                extra.value("subtask", "") + "', not '" + subtask + "'");
  auto mdl = model::from_checkpoint(ckpt);
  const auto tok = tokenizer_from_meta(extra);
  auto records = data::load_dataset(data_path, tok);
  auto gold = data::load_dataset(gold_path, tok);
  const auto tasks =
      tasks_of(subtask, extra.value("multi_tasks", std::vector<std::string>{}));
  codec::Codec cdc(mdl.classes(), mdl.multitask());

  json rows = json::array();
  std::ostringstream table;
  table << "beam  task        P        R       F1\n"
        << "--------------------------------------\n";
  for (int b : beams) {
    auto preds = predict_core(mdl, cdc, records, subtask, tasks, b, max_len);
    auto ev = evaluate_core(preds, gold);
    for (const auto& row : ev.rows) {
      rows.push_back({{"beam", b},
                      {"task", row.name},
                      {"precision", row.scores.precision},
                      {"recall", row.scores.recall},
                      {"f1", row.scores.f1}});
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%4d  %-8s %.4f  %.4f  %.4f\n", b, row.name.c_str(),
                    row.scores.precision, row.scores.recall, row.scores.f1);
      table << buf;
    }
  }
  write_text_file(out_path, json{{"rows", rows}}.dump(2) + "\n");
  write_text_file(out_path + ".txt", table.str());
}

void run_convert(const std::string& input_path, const std::string& output_path) {
  if (!fs::exists(input_path))
    throw std::invalid_argument("input does not exist: " + input_path);
  data::convert_triplet_format(input_path, output_path);
}

LoadedModel load_model(const std::string& checkpoint_path) {
  if (!fs::exists(checkpoint_path))
    throw std::invalid_argument("checkpoint does not exist: " + checkpoint_path);
  auto ckpt = model::load_checkpoint(checkpoint_path);
  json extra = json::parse(ckpt.extra);
  return LoadedModel{model::from_checkpoint(ckpt), tokenizer_from_meta(extra),
                     extra.value("subtask", "Triplet"),
                     extra.value("multi_tasks", std::vector<std::string>{})};
}

std::string generate_json(const LoadedModel& lm, const std::vector<std::string>& words,
                          const std::string& subtask, int beam, int max_len,
                          std::optional<Span> given) {
  const Subtask task = subtask_from_string(subtask);
  if (!is_multi(lm.subtask) && lm.subtask != subtask)
    throw std::invalid_argument("checkpoint was trained for subtask '" + lm.subtask +
                                "', not '" + subtask + "'");
  if (is_multi(lm.subtask) &&
      std::find(lm.multi_tasks.begin(), lm.multi_tasks.end(), subtask) ==
          lm.multi_tasks.end())
    throw std::invalid_argument("multitask checkpoint does not cover subtask '" + subtask +
                                "'");
  // word-level given spans are remapped to token level under the tokenizer
  std::vector<Annotation> anns;
  if (given) anns.emplace_back(*given, std::vector<Span>{}, Polarity::POS);
  data::DatasetRecord rec(words, anns, lm.tokenizer);
  const Sentence& sentence = rec.sentence;
  if (given) given = rec.annotations.front().aspect;
  codec::Codec cdc(lm.model.classes(), lm.model.multitask());
  auto raw = lm.model.generate(sentence, task, beam, max_len, given);
  codec::DecodeCounts counts;
  json j;
  j["tokens"] = sentence.tokens();
  j["raw"] = raw.indexes();
  j["decoded"] = decode_to_json(cdc, task, raw, given, &counts);
  j["invalid"] = counts_json(counts);
  return j.dump();
}

}  // namespace absa::pipeline
