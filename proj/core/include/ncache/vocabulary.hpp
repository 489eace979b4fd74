#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ncache {

using TokenId = std::int32_t;

struct VocabOptions {
  // Upper bound on the vocabulary size, reserved tokens included.
  std::size_t max_size = std::numeric_limits<std::size_t>::max();
  std::uint64_t min_count = 1;
};

// Bidirectional word <-> id map. Ids 0 and 1 are always the unknown and
// end-of-sentence tokens; the remaining ids are ordered by decreasing
// frequency, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr std::string_view kUnknown = "<unk>";
  static constexpr std::string_view kEndOfSentence = "<eos>";

  // Vocabulary holding only the two reserved tokens.
  Vocabulary();

  // Builds from an explicit (word, count) list in id order. The list must
  // contain both reserved tokens exactly once and no duplicates.
  static Vocabulary from_entries(std::vector<std::pair<std::string, std::uint64_t>> entries);

  std::size_t size() const { return words_.size(); }
  TokenId unk_id() const { return unk_id_; }
  TokenId eos_id() const { return eos_id_; }

  // Id for `word`, or the unknown id when absent.
  TokenId id(std::string_view word) const;
  std::optional<TokenId> find(std::string_view word) const;
  const std::string& word(TokenId id) const;
  std::uint64_t count(TokenId id) const;

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < words_.size();
  }

  // Line-oriented `token<TAB>count` text, one line per id.
  std::string serialize() const;
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load_file(const std::string& path);

  // FNV-1a over the serialized text; identifies the vocabulary in checkpoints.
  std::uint64_t content_hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> index_;
  TokenId unk_id_ = 0;
  TokenId eos_id_ = 1;
};

// Counts tokens and keeps the most frequent ones. Literal "<unk>" and
// "<eos>" tokens in the input add to the reserved entries' counts.
Vocabulary build_vocab(std::span<const std::string> tokens, const VocabOptions& options = {});

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ncache
