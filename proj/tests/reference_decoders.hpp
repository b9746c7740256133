#pragma once

// Straight-line reference decoders used as oracles for the codec. These are
// written independently of absa::codec::Codec on purpose: plain loops over
// the raw index vector, no shared chunking helpers. Keep them boring.

#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "absa/types.hpp"

namespace refdec {

struct RefClasses {
  int l = 4;
  int eos = 0;
  int pos = 1, neg = 2, neu = 3;
  std::set<int> tags;  // class offsets that are task tags

  bool is_polarity(int c) const { return c == pos || c == neg || c == neu; }
};

struct RefCounts {
  std::size_t total = 0;
  std::size_t valid_length = 0;
  std::size_t size_bad = 0;
  std::size_t order_bad = 0;
  std::size_t class_bad = 0;
  std::size_t extra = 0;
};

inline std::vector<int> ref_strip(std::vector<int> y, int n, const RefClasses& rc) {
  if (!y.empty() && y.back() == n + rc.eos) y.pop_back();
  if (!y.empty() && y.front() >= n && rc.tags.count(y.front() - n)) y.erase(y.begin());
  return y;
}

inline std::set<std::tuple<absa::Span, absa::Span, absa::Polarity>> ref_decode_triplet(
    std::vector<int> y, int n, const RefClasses& rc, RefCounts& c) {
  y = ref_strip(std::move(y), n, rc);
  std::set<std::tuple<absa::Span, absa::Span, absa::Polarity>> out;
  std::vector<int> e;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n) {
      const int cls = y[i] - n;
      if (e.empty()) continue;
      c.total++;
      if (e.size() != 4) {
        c.size_bad++;
      } else {
        c.valid_length++;
        if (e[1] < e[0] || e[3] < e[2]) {
          c.order_bad++;
        } else if (!rc.is_polarity(cls)) {
          c.class_bad++;
        } else {
          absa::Polarity p = cls == rc.pos   ? absa::Polarity::POS
                             : cls == rc.neg ? absa::Polarity::NEG
                                             : absa::Polarity::NEU;
          out.insert({absa::Span(e[0], e[1]), absa::Span(e[2], e[3]), p});
        }
      }
      e.clear();
    } else {
      e.push_back(y[i]);
    }
  }
  return out;
}

inline std::set<std::tuple<absa::Span, absa::Polarity>> ref_decode_aesc(
    std::vector<int> y, int n, const RefClasses& rc, RefCounts& c) {
  y = ref_strip(std::move(y), n, rc);
  std::set<std::tuple<absa::Span, absa::Polarity>> out;
  std::vector<int> e;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n) {
      const int cls = y[i] - n;
      if (e.empty()) continue;
      c.total++;
      if (e.size() != 2) {
        c.size_bad++;
      } else {
        c.valid_length++;
        if (e[1] < e[0]) {
          c.order_bad++;
        } else if (!rc.is_polarity(cls)) {
          c.class_bad++;
        } else {
          absa::Polarity p = cls == rc.pos   ? absa::Polarity::POS
                             : cls == rc.neg ? absa::Polarity::NEG
                                             : absa::Polarity::NEU;
          out.insert({absa::Span(e[0], e[1]), p});
        }
      }
      e.clear();
    } else {
      e.push_back(y[i]);
    }
  }
  return out;
}

inline std::set<std::vector<int>> ref_decode_fixed_len(std::vector<int> y, int n, int lt,
                                                       const RefClasses& rc, RefCounts& c) {
  y = ref_strip(std::move(y), n, rc);
  std::set<std::vector<int>> out;
  std::vector<int> e;
  auto finish_full = [&]() {
    c.total++;
    c.valid_length++;
    bool ordered = true;
    for (int k = 0; k + 1 < lt; k += 2)
      if (e[k + 1] < e[k]) ordered = false;
    if (ordered)
      out.insert(e);
    else
      c.order_bad++;
    e.clear();
  };
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n) {
      if (!e.empty()) {
        c.total++;
        c.size_bad++;
        e.clear();
      }
    } else {
      e.push_back(y[i]);
      if (static_cast<int>(e.size()) == lt) finish_full();
    }
  }
  if (!e.empty()) {
    c.total++;
    c.size_bad++;
  }
  return out;
}

inline std::optional<std::set<absa::Span>> ref_decode_aoe(std::vector<int> y, int n,
                                                          absa::Span given,
                                                          const RefClasses& rc, RefCounts& c) {
  y = ref_strip(std::move(y), n, rc);
  if (y.size() < 2 || y[0] != given.start || y[1] != given.end) return std::nullopt;
  y.erase(y.begin(), y.begin() + 2);
  // remaining indexes decode exactly like AE/OE pairs; re-stripping is a
  // no-op because the tail holds no leading tag and EOS was removed already
  std::set<absa::Span> out;
  std::vector<int> e;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n) {
      if (!e.empty()) {
        c.total++;
        c.size_bad++;
        e.clear();
      }
    } else {
      e.push_back(y[i]);
      if (e.size() == 2) {
        c.total++;
        c.valid_length++;
        if (e[1] < e[0])
          c.order_bad++;
        else
          out.insert(absa::Span(e[0], e[1]));
        e.clear();
      }
    }
  }
  if (!e.empty()) {
    c.total++;
    c.size_bad++;
  }
  return out;
}

inline std::optional<absa::Polarity> ref_decode_alsc(std::vector<int> y, int n,
                                                     absa::Span given, const RefClasses& rc,
                                                     RefCounts& c) {
  y = ref_strip(std::move(y), n, rc);
  if (y.size() < 2 || y[0] != given.start || y[1] != given.end)
    throw std::invalid_argument("ref_decode_alsc: bad prefix");
  std::optional<absa::Polarity> out;
  std::vector<int> e;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= n) {
      const int cls = y[i] - n;
      if (e.empty()) continue;
      const bool valid = e.size() == 2 && e[1] >= e[0] && rc.is_polarity(cls);
      if (valid && out) {
        c.total++;
        c.valid_length++;
        c.extra++;
      } else {
        c.total++;
        if (e.size() != 2) {
          c.size_bad++;
        } else {
          c.valid_length++;
          if (e[1] < e[0])
            c.order_bad++;
          else if (!rc.is_polarity(cls))
            c.class_bad++;
        }
        if (valid) {
          absa::Polarity p = cls == rc.pos   ? absa::Polarity::POS
                             : cls == rc.neg ? absa::Polarity::NEG
                                             : absa::Polarity::NEU;
          out = p;
        }
      }
      e.clear();
    } else {
      e.push_back(y[i]);
    }
  }
  return out;
}

}  // namespace refdec
