#include "ncache/vocabulary.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ncache/errors.hpp"

namespace ncache {

Vocabulary::Vocabulary()
    : words_{std::string(kUnknown), std::string(kEndOfSentence)}, counts_{0, 0} {
  index_.emplace(words_[0], 0);
  index_.emplace(words_[1], 1);
}

Vocabulary Vocabulary::from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries) {
  Vocabulary v;
  v.words_.clear();
  v.counts_.clear();
  v.index_.clear();
  v.words_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  v.index_.reserve(entries.size());
  for (auto& [word, count] : entries) {
    if (word.empty()) throw IoError("vocabulary: empty token");
    const auto id = static_cast<TokenId>(v.words_.size());
    if (!v.index_.emplace(word, id).second) throw IoError("vocabulary: duplicate token '" + word + "'");
    v.words_.push_back(std::move(word));
    v.counts_.push_back(count);
  }
  const auto unk = v.find(kUnknown);
  const auto eos = v.find(kEndOfSentence);
  if (!unk || !eos) throw IoError("vocabulary: missing reserved tokens");
  v.unk_id_ = *unk;
  v.eos_id_ = *eos;
  return v;
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? unk_id_ : it->second;
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (!contains(id)) throw std::out_of_range("vocabulary: id out of range");
  return words_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::count(TokenId id) const {
  if (!contains(id)) throw std::out_of_range("vocabulary: id out of range");
  return counts_[static_cast<std::size_t>(id)];
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out += words_[i];
    out += '\t';
    out += std::to_string(counts_[i]);
    out += '\n';
  }
  return out;
}

void Vocabulary::save(std::ostream& out) const { out << serialize(); }

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw IoError("vocabulary line " + std::to_string(lineno) + ": expected token<TAB>count");
    }
    std::uint64_t count = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, count);
    if (ec != std::errc() || ptr != last) {
      throw IoError("vocabulary line " + std::to_string(lineno) + ": bad count");
    }
    entries.emplace_back(line.substr(0, tab), count);
  }
  return from_entries(std::move(entries));
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  return load(in);
}

std::uint64_t Vocabulary::content_hash() const { return fnv1a64(serialize()); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Vocabulary build_vocab(std::span<const std::string> tokens, const VocabOptions& options) {
  if (options.max_size < 2) throw ConfigError("build_vocab: max_size must be at least 2");

  std::unordered_map<std::string_view, std::uint64_t> counts;
  for (const auto& t : tokens) ++counts[t];

  std::uint64_t unk_count = 0;
  std::uint64_t eos_count = 0;
  std::vector<std::pair<std::string_view, std::uint64_t>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [word, count] : counts) {
    if (word == Vocabulary::kUnknown) {
      unk_count = count;
    } else if (word == Vocabulary::kEndOfSentence) {
      eos_count = count;
    } else if (count >= options.min_count) {
      ranked.emplace_back(word, count);
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > options.max_size - 2) ranked.resize(options.max_size - 2);

  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(ranked.size() + 2);
  entries.emplace_back(std::string(Vocabulary::kUnknown), unk_count);
  entries.emplace_back(std::string(Vocabulary::kEndOfSentence), eos_count);
  for (const auto& [word, count] : ranked) entries.emplace_back(std::string(word), count);
  return Vocabulary::from_entries(std::move(entries));
}

}  // namespace ncache
