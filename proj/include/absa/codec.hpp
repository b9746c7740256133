#pragma once

#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "absa/types.hpp"

namespace absa::codec {

using AspectSentiment = std::tuple<Span, Polarity>;
using SpanPair = std::tuple<Span, Span>;
using TripletTuple = std::tuple<Span, Span, Polarity>;

// Per-sequence accounting of generated chunks. Chunks are classified into
// exactly one bucket: wrong buffer length, then end-before-start, then a
// non-polarity terminator; whatever is left decodes to output tuples.
struct DecodeCounts {
  std::size_t total_chunks = 0;
  std::size_t valid_length = 0;   // chunks with the required buffer length
  std::size_t invalid_size = 0;
  std::size_t invalid_order = 0;
  std::size_t invalid_class = 0;  // right shape, terminated by EOS or a task tag
  std::size_t invalid_extra = 0;  // valid chunks beyond the first (ALSC only)

  DecodeCounts& operator+=(const DecodeCounts& o);
};

// Validity diagnostics over a batch of raw sequences. Rates follow the
// chunk-granularity adaptation of the non-5-len / non-ordered / inside-subword
// counts: size and token rates are over all chunks, the order rate is over
// chunks of valid length.
struct ValidityReport {
  std::size_t total_chunks = 0;
  std::size_t invalid_size_count = 0;
  std::size_t invalid_order_count = 0;
  std::size_t invalid_token_count = 0;
  std::size_t valid_length_count = 0;
  double invalid_size_rate = 0.0;
  double invalid_order_rate = 0.0;
  double invalid_token_rate = 0.0;
};

// Converts between annotation sets and mixed pointer/class index sequences
// for all seven subtasks. Raw sequences decode totally: malformed material is
// dropped and counted, never raised.
//
// Conventions shared by every decoder:
//   - a trailing EOS class index is stripped before scanning;
//   - a leading task-tag class index (the multitask prompt) is skipped;
//   - buffers accumulate pointer indexes only; an empty buffer at a class
//     index emits no chunk.
class Codec {
 public:
  explicit Codec(ClassTokenList classes = ClassTokenList::standard(),
                 bool multitask = false)
      : classes_(std::move(classes)), multitask_(multitask) {}

  const ClassTokenList& classes() const { return classes_; }
  bool multitask() const { return multitask_; }

  // Target sequence per subtask pattern, EOS-terminated, with the subtask's
  // tag prepended in multitask mode. ALSC/AOE require given_aspect and it
  // must appear among the annotations; the other subtasks forbid it.
  TargetSequence encode(Subtask subtask, const Sentence& sentence,
                        const std::vector<Annotation>& annotations,
                        std::optional<Span> given_aspect = std::nullopt) const;

  // Left-to-right scan accumulating pointers; each class index terminates the
  // buffer as one chunk. Valid chunks carry 4 pointers and a polarity.
  std::set<TripletTuple> decode_triplet(const TargetSequence& seq,
                                        DecodeCounts* counts = nullptr) const;

  // Same scan with 2-pointer chunks.
  std::set<AspectSentiment> decode_aesc(const TargetSequence& seq,
                                        DecodeCounts* counts = nullptr) const;

  // Consecutive pointer indexes grouped into chunks of chunk_len (2 for
  // AE/OE, 4 for Pair). A class index mid-stream discards the partial buffer
  // as an invalid-size chunk, as does an incomplete trailing group.
  std::set<std::vector<int>> decode_fixed_len(const TargetSequence& seq, int chunk_len,
                                              DecodeCounts* counts = nullptr) const;

  std::set<Span> decode_ae(const TargetSequence& seq, DecodeCounts* counts = nullptr) const;
  std::set<Span> decode_oe(const TargetSequence& seq, DecodeCounts* counts = nullptr) const;
  std::set<SpanPair> decode_pair(const TargetSequence& seq, DecodeCounts* counts = nullptr) const;

  // The first two positions must repeat the supplied aspect (they are given,
  // not predicted); the remainder decodes like fixed-len pairs.
  std::set<Span> decode_aoe(const TargetSequence& seq, Span given_aspect,
                            DecodeCounts* counts = nullptr) const;

  // Degenerate AESC decode restricted to one chunk; later valid chunks are
  // counted invalid_extra.
  std::optional<Polarity> decode_alsc(const TargetSequence& seq, Span given_aspect,
                                      DecodeCounts* counts = nullptr) const;

  ValidityReport validity_report(const std::vector<TargetSequence>& raw_sequences,
                                 Subtask subtask,
                                 const std::vector<Sentence>& sentences,
                                 const std::vector<Span>* given_aspects = nullptr) const;

 private:
  struct Chunk {
    std::vector<int> pointers;
    int class_index = -1;  // -1 for fixed-len chunks (no terminator)
  };
  enum class ChunkKind { Valid, InvalidSize, InvalidOrder, InvalidClass };

  std::vector<int> strip(const TargetSequence& seq) const;
  std::vector<Chunk> class_terminated_chunks(const std::vector<int>& body, int n) const;
  std::vector<Chunk> fixed_len_chunks(const std::vector<int>& body, int n, int chunk_len) const;
  ChunkKind classify(const Chunk& c, int required_len, bool needs_polarity) const;
  void count(const Chunk& c, ChunkKind kind, int required_len, DecodeCounts* counts) const;
  std::vector<Chunk> chunks_for(const TargetSequence& seq, Subtask subtask,
                                int* required_len, bool* needs_polarity) const;

  ClassTokenList classes_;
  bool multitask_ = false;
};

// Eq. 3 conversion: pointer indexes map to source tokens, class indexes to
// class tokens.
std::string index2token(int index, const Sentence& sentence, const ClassTokenList& classes);

// Class token name used as the multitask prompt for a subtask, e.g. "<AESC>".
std::string task_tag(Subtask subtask);

}  // namespace absa::codec
