#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ncache/vocabulary.hpp"

namespace ncache {

using Line = std::vector<std::string>;

struct TokenStream {
  std::vector<TokenId> ids;
  std::string source_name;
  // Content hash of the vocabulary used to encode; 0 when unknown.
  std::uint64_t vocab_hash = 0;
  // End-of-sentence id of that vocabulary; -1 when unknown.
  TokenId eos_id = -1;

  std::size_t size() const { return ids.size(); }
};

// Whitespace tokenization, one line per sentence.
std::vector<Line> tokenize_lines(const std::string& text);
std::vector<Line> read_corpus(const std::string& path);

// Tokens of all lines with the end-of-sentence token appended to each line.
std::vector<std::string> flatten_with_eos(const std::vector<Line>& lines);

TokenStream encode(const std::vector<Line>& lines, const Vocabulary& vocab,
                   std::string source_name = {});
std::vector<std::string> decode(const TokenStream& stream, const Vocabulary& vocab);

// Fixed-shape block of token ids, lane-major.
class TokenBlock {
 public:
  TokenBlock() = default;
  TokenBlock(std::size_t lanes, std::size_t steps) : lanes_(lanes), steps_(steps), ids_(lanes * steps) {}

  std::size_t lanes() const { return lanes_; }
  std::size_t steps() const { return steps_; }
  TokenId operator()(std::size_t lane, std::size_t step) const { return ids_[lane * steps_ + step]; }
  TokenId& operator()(std::size_t lane, std::size_t step) { return ids_[lane * steps_ + step]; }

  friend bool operator==(const TokenBlock&, const TokenBlock&) = default;

 private:
  std::size_t lanes_ = 0;
  std::size_t steps_ = 0;
  std::vector<TokenId> ids_;
};

struct Segment {
  TokenBlock inputs;
  TokenBlock targets;
};

struct BatchedSequence {
  std::size_t lanes = 0;
  std::size_t unroll = 0;
  std::vector<Segment> segments;
};

// Splits the stream into `lanes` contiguous chunks and each chunk into
// `unroll`-step segments with targets shifted by one. Leftover tokens are
// dropped. Throws SizingError when not even one segment fits.
BatchedSequence make_batches(const TokenStream& stream, std::size_t lanes, std::size_t unroll);

}  // namespace ncache
