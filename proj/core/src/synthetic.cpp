#include "ncache/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "ncache/errors.hpp"
#include "ncache/io.hpp"

namespace ncache {

namespace {

// Pronounceable pseudo-words from random syllables, unique across the
// whole generator.
class WordMaker {
 public:
  explicit WordMaker(std::uint64_t seed) : rng_(seed) {}

  std::string make(std::size_t min_syllables, std::size_t max_syllables) {
    static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                              "s", "t", "v", "z", "br", "dr", "kl", "st", "tr", "sh"};
    static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
    static constexpr const char* kCodas[] = {"", "", "", "n", "r", "s", "l", "m", "k"};
    std::uniform_int_distribution<std::size_t> syllables(min_syllables, max_syllables);
    for (;;) {
      std::string w;
      const std::size_t n = syllables(rng_);
      for (std::size_t i = 0; i < n; ++i) {
        w += kOnsets[rng_() % std::size(kOnsets)];
        w += kVowels[rng_() % std::size(kVowels)];
        w += kCodas[rng_() % std::size(kCodas)];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> make_many(std::size_t count, std::size_t lo, std::size_t hi) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(make(lo, hi));
    return out;
  }

  void reserve(const std::vector<std::string>& words) { used_.insert(words.begin(), words.end()); }

 private:
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

}  // namespace

SyntheticCorpus::SyntheticCorpus(const SyntheticCorpusSpec& spec) : spec_(spec) {
  if (spec.topics == 0 || spec.words_per_topic == 0 || spec.entity_pool == 0 || spec.entities_per_document == 0) {
    throw ConfigError("synthetic corpus: counts must be positive");
  }
  if (spec.min_document_tokens < 16 || spec.max_document_tokens < spec.min_document_tokens) {
    throw ConfigError("synthetic corpus: bad document length range");
  }
  function_words_ = {"the", "a", "this", "that", "his", "her", "their", "its", "some", "every",
                     "in", "on", "with", "by", "for", "from", "at", "of", "near", "after",
                     "and", "but", "while", "because", "it", "he", "she", "they", "was", "is"};
  WordMaker maker(spec.seed);
  maker.reserve(function_words_);
  verbs_ = maker.make_many(spec.verbs, 1, 3);
  for (auto& v : verbs_) v += "ed";
  adjectives_ = maker.make_many(spec.adjectives, 1, 3);
  for (auto& a : adjectives_) a += "ic";
  nouns_ = maker.make_many(spec.nouns, 1, 3);
  topic_words_.resize(spec.topics);
  for (auto& words : topic_words_) words = maker.make_many(spec.words_per_topic, 2, 3);
  entities_ = maker.make_many(spec.entity_pool, 2, 3);
  for (auto& e : entities_) e[0] = static_cast<char>(e[0] - 'a' + 'A');
}

namespace {

std::discrete_distribution<std::size_t> zipf(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), -exponent);
  return {w.begin(), w.end()};
}

}  // namespace

// Documents are sequences of sentences from a small stochastic grammar:
//   S  -> C ("," conj C)? "."        C  -> NP VP
//   NP -> det adj* (noun | topical) PP? | entity | pronoun
//   VP -> verb NP PP?                PP -> prep NP
// Open-class slots draw from Zipfian global lexicons; entity and topical
// slots prefer the document's cast and topic, which is what a cache can
// exploit.
std::vector<Line> SyntheticCorpus::generate(std::size_t min_tokens, std::uint64_t stream_seed) const {
  std::mt19937_64 rng(stream_seed);
  auto uniform = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  auto pick_verb = zipf(verbs_.size(), 1.0);
  auto pick_adj = zipf(adjectives_.size(), 1.0);
  auto pick_noun = zipf(nouns_.size(), 1.0);
  auto pick_topic_word = zipf(spec_.words_per_topic, 0.5);
  auto pick_cast = zipf(spec_.entities_per_document, 1.0);
  static const std::vector<std::string> kDeterminers = {"the", "the", "the", "a", "a", "this", "that",
                                                        "his", "her", "their", "its", "some", "every"};
  static const std::vector<std::string> kPrepositions = {"in", "on", "with", "by", "for", "from", "at", "of", "near",
                                                         "after"};
  static const std::vector<std::string> kConjunctions = {"and", "but", "while", "because"};
  static const std::vector<std::string> kPronouns = {"it", "he", "she", "they"};

  std::vector<Line> lines;
  std::size_t total = 0;
  while (total < min_tokens) {
    const std::size_t topic = uniform(spec_.topics);
    std::vector<std::size_t> cast;
    while (cast.size() < spec_.entities_per_document) {
      const std::size_t e = uniform(entities_.size());
      if (std::find(cast.begin(), cast.end(), e) == cast.end()) cast.push_back(e);
    }

    Line line;
    auto word = [&](const std::string& w) { line.push_back(w); };
    auto entity = [&] {
      word(chance(spec_.entity_locality) ? entities_[cast[pick_cast(rng)]] : entities_[uniform(entities_.size())]);
    };
    auto topical = [&] {
      word(chance(spec_.topic_locality) ? topic_words_[topic][pick_topic_word(rng)]
                                        : topic_words_[uniform(spec_.topics)][uniform(spec_.words_per_topic)]);
    };
    std::function<void(int)> noun_phrase = [&](int depth) {
      const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (r < 0.3) {
        entity();
        return;
      }
      if (r < 0.38) {
        word(kPronouns[uniform(kPronouns.size())]);
        return;
      }
      word(kDeterminers[uniform(kDeterminers.size())]);
      while (chance(0.35)) word(adjectives_[pick_adj(rng)]);
      if (chance(0.4)) {
        topical();
      } else {
        word(nouns_[pick_noun(rng)]);
      }
      if (depth < 2 && chance(0.25)) {
        word(kPrepositions[uniform(kPrepositions.size())]);
        noun_phrase(depth + 1);
      }
    };
    auto clause = [&] {
      noun_phrase(0);
      if (chance(0.15)) word("was");
      word(verbs_[pick_verb(rng)]);
      noun_phrase(0);
      if (chance(0.3)) {
        word(kPrepositions[uniform(kPrepositions.size())]);
        noun_phrase(1);
      }
    };

    const std::size_t length =
        spec_.min_document_tokens + uniform(spec_.max_document_tokens - spec_.min_document_tokens + 1);
    std::size_t doc_tokens = 0;
    auto flush = [&] {
      doc_tokens += line.size() + 1;
      lines.push_back(std::move(line));
      line.clear();
    };
    line = {"=", entities_[cast[0]], "="};
    flush();
    while (doc_tokens < length) {
      if (chance(0.04)) {
        word("=");
        word("=");
        topical();
        word("=");
        word("=");
      } else {
        clause();
        if (chance(0.3)) {
          word(",");
          word(kConjunctions[uniform(kConjunctions.size())]);
          clause();
        }
        word(".");
      }
      flush();
    }
    total += doc_tokens;
  }
  return lines;
}

SyntheticSplits SyntheticCorpus::splits(std::size_t train_tokens, std::size_t valid_tokens,
                                        std::size_t test_tokens) const {
  SyntheticSplits s;
  s.train = generate(train_tokens, spec_.seed * 3 + 1);
  s.valid = generate(valid_tokens, spec_.seed * 3 + 2);
  s.test = generate(test_tokens, spec_.seed * 3 + 3);
  return s;
}

std::size_t token_count_with_eos(const std::vector<Line>& lines) {
  std::size_t n = 0;
  for (const auto& l : lines) n += l.size() + 1;
  return n;
}

void write_corpus(const std::string& path, const std::vector<Line>& lines) {
  write_file_atomic(path, [&](std::ostream& out) {
    for (const auto& line : lines) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (i) out << ' ';
        out << line[i];
      }
      out << '\n';
    }
  });
}

}  // namespace ncache
