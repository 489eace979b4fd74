#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ncache/rnn_lm.hpp"

namespace ncache {

// Binary checkpoint, little-endian throughout. See docs/checkpoint-format.md.
struct Checkpoint {
  static constexpr char kMagic[8] = {'N', 'C', 'L', 'M', 'C', 'K', 'P', 'T'};
  static constexpr std::uint32_t kVersion = 1;

  RnnConfig config;
  std::string vocab_path;
  std::uint64_t vocab_hash = 0;
  Parameters params;

  LanguageModel model() const { return LanguageModel{config, params, vocab_hash}; }
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

// Atomic write (temp file + rename).
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ncache
