#include "absa/codec.hpp"

#include <algorithm>

namespace absa::codec {

DecodeCounts& DecodeCounts::operator+=(const DecodeCounts& o) {
  total_chunks += o.total_chunks;
  valid_length += o.valid_length;
  invalid_size += o.invalid_size;
  invalid_order += o.invalid_order;
  invalid_class += o.invalid_class;
  invalid_extra += o.invalid_extra;
  return *this;
}

std::string task_tag(Subtask subtask) {
  return std::string("<") + to_string(subtask) + ">";
}

std::string index2token(int index, const Sentence& sentence, const ClassTokenList& classes) {
  const int n = sentence.size();
  if (index < 0 || index >= n + classes.size())
    throw std::out_of_range("index2token: index outside [0, n+l)");
  if (index < n) return sentence.tokens()[index];
  return classes.tokens()[index - n];
}

namespace {

void require_sorted(const std::vector<Annotation>& annotations) {
  auto key = [](const Annotation& a) {
    int first_op = a.opinions.empty() ? -1 : a.opinions.front().start;
    return std::make_tuple(a.aspect.start, a.aspect.end, first_op);
  };
  for (size_t i = 1; i < annotations.size(); ++i)
    if (key(annotations[i - 1]) > key(annotations[i]))
      throw std::invalid_argument("encode: annotations not sorted by (aspect.start, aspect.end, opinion.start)");
}

}  // namespace

TargetSequence Codec::encode(Subtask subtask, const Sentence& sentence,
                             const std::vector<Annotation>& annotations,
                             std::optional<Span> given_aspect) const {
  const int n = sentence.size();
  const bool needs_given = subtask == Subtask::ALSC || subtask == Subtask::AOE;
  if (needs_given && !given_aspect)
    throw std::invalid_argument("encode: ALSC/AOE require given_aspect");
  if (!needs_given && given_aspect)
    throw std::invalid_argument("encode: given_aspect only valid for ALSC/AOE");
  for (const auto& a : annotations) a.validate_for(sentence);
  require_sorted(annotations);

  auto pol = [&](Polarity p) { return n + classes_.polarity_index(p); };

  std::vector<int> out;
  if (multitask_) {
    const int tag = classes_.tag_index(task_tag(subtask));
    if (tag < 0)
      throw std::invalid_argument("encode: class list lacks task tag " + task_tag(subtask));
    out.push_back(n + tag);
  }

  switch (subtask) {
    case Subtask::AE:
      for (const auto& a : annotations) {
        out.push_back(a.aspect.start);
        out.push_back(a.aspect.end);
      }
      break;
    case Subtask::OE: {
      std::set<Span> opinions;
      for (const auto& a : annotations)
        opinions.insert(a.opinions.begin(), a.opinions.end());
      for (const auto& o : opinions) {
        out.push_back(o.start);
        out.push_back(o.end);
      }
      break;
    }
    case Subtask::AESC:
      for (const auto& a : annotations) {
        out.push_back(a.aspect.start);
        out.push_back(a.aspect.end);
        out.push_back(pol(a.polarity));
      }
      break;
    case Subtask::Pair:
      for (const auto& a : annotations)
        for (const auto& o : a.opinions) {
          out.push_back(a.aspect.start);
          out.push_back(a.aspect.end);
          out.push_back(o.start);
          out.push_back(o.end);
        }
      break;
    case Subtask::Triplet:
      for (const auto& a : annotations)
        for (const auto& o : a.opinions) {
          out.push_back(a.aspect.start);
          out.push_back(a.aspect.end);
          out.push_back(o.start);
          out.push_back(o.end);
          out.push_back(pol(a.polarity));
        }
      break;
    case Subtask::ALSC:
    case Subtask::AOE: {
      auto it = std::find_if(annotations.begin(), annotations.end(),
                             [&](const Annotation& a) { return a.aspect == *given_aspect; });
      if (it == annotations.end())
        throw std::invalid_argument("encode: given_aspect not among annotations");
      out.push_back(it->aspect.start);
      out.push_back(it->aspect.end);
      if (subtask == Subtask::ALSC) {
        out.push_back(pol(it->polarity));
      } else {
        for (const auto& o : it->opinions) {
          out.push_back(o.start);
          out.push_back(o.end);
        }
      }
      break;
    }
  }

  out.push_back(n + classes_.eos_index());
  return TargetSequence::gold(std::move(out), n, classes_.size());
}

std::vector<int> Codec::strip(const TargetSequence& seq) const {
  const int n = seq.n();
  std::vector<int> body = seq.indexes();
  if (!body.empty() && body.back() == n + classes_.eos_index()) body.pop_back();
  if (!body.empty() && body.front() >= n && classes_.is_task_tag(body.front() - n))
    body.erase(body.begin());
  return body;
}

std::vector<Codec::Chunk> Codec::class_terminated_chunks(const std::vector<int>& body,
                                                          int n) const {
  std::vector<Chunk> chunks;
  std::vector<int> buffer;
  for (int y : body) {
    if (y >= n) {
      if (!buffer.empty()) {
        chunks.push_back({std::move(buffer), y - n});
        buffer.clear();
      }
    } else {
      buffer.push_back(y);
    }
  }
  // An unterminated trailing buffer is not a chunk: chunks are class-terminated.
  return chunks;
}

std::vector<Codec::Chunk> Codec::fixed_len_chunks(const std::vector<int>& body, int n,
                                                  int chunk_len) const {
  std::vector<Chunk> chunks;
  std::vector<int> buffer;
  for (int y : body) {
    if (y >= n) {
      // A class index breaks the run of consecutive pointers.
      if (!buffer.empty()) {
        chunks.push_back({std::move(buffer), -1});
        buffer.clear();
      }
    } else {
      buffer.push_back(y);
      if (static_cast<int>(buffer.size()) == chunk_len) {
        chunks.push_back({std::move(buffer), -1});
        buffer.clear();
      }
    }
  }
  if (!buffer.empty()) chunks.push_back({std::move(buffer), -1});
  return chunks;
}

Codec::ChunkKind Codec::classify(const Chunk& c, int required_len, bool needs_polarity) const {
  if (static_cast<int>(c.pointers.size()) != required_len) return ChunkKind::InvalidSize;
  for (size_t i = 0; i + 1 < c.pointers.size(); i += 2)
    if (c.pointers[i + 1] < c.pointers[i]) return ChunkKind::InvalidOrder;
  if (needs_polarity && !classes_.is_polarity(c.class_index)) return ChunkKind::InvalidClass;
  return ChunkKind::Valid;
}

void Codec::count(const Chunk& c, ChunkKind kind, int required_len, DecodeCounts* counts) const {
  if (!counts) return;
  counts->total_chunks++;
  if (static_cast<int>(c.pointers.size()) == required_len) counts->valid_length++;
  switch (kind) {
    case ChunkKind::InvalidSize: counts->invalid_size++; break;
    case ChunkKind::InvalidOrder: counts->invalid_order++; break;
    case ChunkKind::InvalidClass: counts->invalid_class++; break;
    case ChunkKind::Valid: break;
  }
}

std::set<TripletTuple> Codec::decode_triplet(const TargetSequence& seq,
                                             DecodeCounts* counts) const {
  std::set<TripletTuple> out;
  for (const auto& c : class_terminated_chunks(strip(seq), seq.n())) {
    const auto kind = classify(c, 4, /*needs_polarity=*/true);
    count(c, kind, 4, counts);
    if (kind != ChunkKind::Valid) continue;
    out.emplace(Span(c.pointers[0], c.pointers[1]), Span(c.pointers[2], c.pointers[3]),
                classes_.polarity_at(c.class_index));
  }
  return out;
}

std::set<AspectSentiment> Codec::decode_aesc(const TargetSequence& seq,
                                             DecodeCounts* counts) const {
  std::set<AspectSentiment> out;
  for (const auto& c : class_terminated_chunks(strip(seq), seq.n())) {
    const auto kind = classify(c, 2, /*needs_polarity=*/true);
    count(c, kind, 2, counts);
    if (kind != ChunkKind::Valid) continue;
    out.emplace(Span(c.pointers[0], c.pointers[1]), classes_.polarity_at(c.class_index));
  }
  return out;
}

std::set<std::vector<int>> Codec::decode_fixed_len(const TargetSequence& seq, int chunk_len,
                                                   DecodeCounts* counts) const {
  if (chunk_len < 2 || chunk_len % 2 != 0)
    throw std::invalid_argument("decode_fixed_len: chunk_len must be a positive even number");
  std::set<std::vector<int>> out;
  for (const auto& c : fixed_len_chunks(strip(seq), seq.n(), chunk_len)) {
    const auto kind = classify(c, chunk_len, /*needs_polarity=*/false);
    count(c, kind, chunk_len, counts);
    if (kind != ChunkKind::Valid) continue;
    out.insert(c.pointers);
  }
  return out;
}

std::set<Span> Codec::decode_ae(const TargetSequence& seq, DecodeCounts* counts) const {
  std::set<Span> out;
  for (const auto& c : decode_fixed_len(seq, 2, counts)) out.emplace(c[0], c[1]);
  return out;
}

std::set<Span> Codec::decode_oe(const TargetSequence& seq, DecodeCounts* counts) const {
  return decode_ae(seq, counts);
}

std::set<SpanPair> Codec::decode_pair(const TargetSequence& seq, DecodeCounts* counts) const {
  std::set<SpanPair> out;
  for (const auto& c : decode_fixed_len(seq, 4, counts))
    out.emplace(Span(c[0], c[1]), Span(c[2], c[3]));
  return out;
}

std::set<Span> Codec::decode_aoe(const TargetSequence& seq, Span given_aspect,
                                 DecodeCounts* counts) const {
  std::vector<int> body = strip(seq);
  if (body.size() < 2 || body[0] != given_aspect.start || body[1] != given_aspect.end)
    throw std::invalid_argument("decode_aoe: sequence does not begin with the given aspect");
  body.erase(body.begin(), body.begin() + 2);

  std::set<Span> out;
  for (const auto& c : fixed_len_chunks(body, seq.n(), 2)) {
    const auto kind = classify(c, 2, /*needs_polarity=*/false);
    count(c, kind, 2, counts);
    if (kind != ChunkKind::Valid) continue;
    out.emplace(c.pointers[0], c.pointers[1]);
  }
  return out;
}

std::optional<Polarity> Codec::decode_alsc(const TargetSequence& seq, Span given_aspect,
                                           DecodeCounts* counts) const {
  std::vector<int> body = strip(seq);
  if (body.size() < 2 || body[0] != given_aspect.start || body[1] != given_aspect.end)
    throw std::invalid_argument("decode_alsc: sequence does not begin with the given aspect");

  std::optional<Polarity> out;
  for (const auto& c : class_terminated_chunks(body, seq.n())) {
    const auto kind = classify(c, 2, /*needs_polarity=*/true);
    if (kind == ChunkKind::Valid && out) {
      if (counts) {
        counts->total_chunks++;
        counts->valid_length++;
        counts->invalid_extra++;
      }
      continue;
    }
    count(c, kind, 2, counts);
    if (kind == ChunkKind::Valid) out = classes_.polarity_at(c.class_index);
  }
  return out;
}

ValidityReport Codec::validity_report(const std::vector<TargetSequence>& raw_sequences,
                                      Subtask subtask,
                                      const std::vector<Sentence>& sentences,
                                      const std::vector<Span>* given_aspects) const {
  if (raw_sequences.size() != sentences.size())
    throw std::invalid_argument("validity_report: sequences/sentences length mismatch");
  if ((subtask == Subtask::AOE || subtask == Subtask::ALSC) &&
      (!given_aspects || given_aspects->size() != raw_sequences.size()))
    throw std::invalid_argument("validity_report: ALSC/AOE need one given aspect per sequence");

  ValidityReport rep;
  for (size_t i = 0; i < raw_sequences.size(); ++i) {
    const auto& seq = raw_sequences[i];
    const auto& sent = sentences[i];
    if (seq.n() != sent.size())
      throw std::invalid_argument("validity_report: sequence n does not match its sentence");

    int required_len = 0;
    bool needs_polarity = false;
    std::vector<Chunk> chunks;
    std::vector<int> body = strip(seq);
    switch (subtask) {
      case Subtask::AE:
      case Subtask::OE:
        required_len = 2;
        chunks = fixed_len_chunks(body, seq.n(), 2);
        break;
      case Subtask::Pair:
        required_len = 4;
        chunks = fixed_len_chunks(body, seq.n(), 4);
        break;
      case Subtask::AESC:
      case Subtask::ALSC:
        required_len = 2;
        needs_polarity = true;
        chunks = class_terminated_chunks(body, seq.n());
        break;
      case Subtask::Triplet:
        required_len = 4;
        needs_polarity = true;
        chunks = class_terminated_chunks(body, seq.n());
        break;
      case Subtask::AOE: {
        required_len = 2;
        const Span& given = (*given_aspects)[i];
        if (body.size() >= 2 && body[0] == given.start && body[1] == given.end)
          body.erase(body.begin(), body.begin() + 2);
        chunks = fixed_len_chunks(body, seq.n(), 2);
        break;
      }
    }

    for (const auto& c : chunks) {
      const auto kind = classify(c, required_len, needs_polarity);
      rep.total_chunks++;
      if (static_cast<int>(c.pointers.size()) == required_len) rep.valid_length_count++;
      if (kind == ChunkKind::InvalidSize) rep.invalid_size_count++;
      if (kind == ChunkKind::InvalidOrder) rep.invalid_order_count++;
      // a^s inside a subword: first pointer of the chunk lands on a
      // continuation piece. Identically zero in whitespace mode.
      if (!c.pointers.empty() && !sent.word_begin()[c.pointers.front()])
        rep.invalid_token_count++;
    }
  }

  if (rep.total_chunks > 0) {
    rep.invalid_size_rate =
        static_cast<double>(rep.invalid_size_count) / static_cast<double>(rep.total_chunks);
    rep.invalid_token_rate =
        static_cast<double>(rep.invalid_token_count) / static_cast<double>(rep.total_chunks);
  }
  if (rep.valid_length_count > 0)
    rep.invalid_order_rate = static_cast<double>(rep.invalid_order_count) /
                             static_cast<double>(rep.valid_length_count);
  return rep;
}

}  // namespace absa::codec
