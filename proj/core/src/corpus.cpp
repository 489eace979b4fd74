#include "ncache/corpus.hpp"

#include <sstream>

#include "ncache/errors.hpp"
#include "ncache/io.hpp"

namespace ncache {

std::vector<Line> tokenize_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    Line line;
    std::istringstream words(raw);
    std::string w;
    while (words >> w) line.push_back(std::move(w));
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<Line> read_corpus(const std::string& path) { return tokenize_lines(read_file(path)); }

std::vector<std::string> flatten_with_eos(const std::vector<Line>& lines) {
  std::vector<std::string> out;
  for (const auto& line : lines) {
    out.insert(out.end(), line.begin(), line.end());
    out.emplace_back(Vocabulary::kEndOfSentence);
  }
  return out;
}

TokenStream encode(const std::vector<Line>& lines, const Vocabulary& vocab, std::string source_name) {
  TokenStream stream;
  stream.source_name = std::move(source_name);
  stream.vocab_hash = vocab.content_hash();
  stream.eos_id = vocab.eos_id();
  for (const auto& line : lines) {
    for (const auto& w : line) stream.ids.push_back(vocab.id(w));
    stream.ids.push_back(vocab.eos_id());
  }
  return stream;
}

std::vector<std::string> decode(const TokenStream& stream, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(stream.ids.size());
  for (TokenId id : stream.ids) out.push_back(vocab.word(id));
  return out;
}

BatchedSequence make_batches(const TokenStream& stream, std::size_t lanes, std::size_t unroll) {
  if (lanes == 0 || unroll == 0) throw ConfigError("make_batches: lanes and unroll must be positive");
  if (stream.size() < lanes * (unroll + 1)) {
    throw SizingError("make_batches: stream of " + std::to_string(stream.size()) +
                      " tokens is too short for " + std::to_string(lanes) + " lanes x " +
                      std::to_string(unroll) + " steps");
  }
  const std::size_t chunk = stream.size() / lanes;
  const std::size_t count = (chunk - 1) / unroll;

  BatchedSequence batches;
  batches.lanes = lanes;
  batches.unroll = unroll;
  batches.segments.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Segment seg{TokenBlock(lanes, unroll), TokenBlock(lanes, unroll)};
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      const std::size_t base = lane * chunk + k * unroll;
      for (std::size_t s = 0; s < unroll; ++s) {
        seg.inputs(lane, s) = stream.ids[base + s];
        seg.targets(lane, s) = stream.ids[base + s + 1];
      }
    }
    batches.segments.push_back(std::move(seg));
  }
  return batches;
}

}  // namespace ncache
