#include "ncache/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ncache/errors.hpp"
#include "ncache/io.hpp"

namespace ncache {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void read_exact(std::istream& in, char* buf, std::size_t n) {
  in.read(buf, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw IoError("checkpoint: unexpected end of file");
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  read_exact(in, reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  read_exact(in, reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_string(std::istream& in, std::size_t limit) {
  const std::uint32_t n = get_u32(in);
  if (n > limit) throw IoError("checkpoint: string field too long");
  std::string s(n, '\0');
  read_exact(in, s.data(), n);
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(Checkpoint::kMagic, sizeof(Checkpoint::kMagic));
  put_u32(out, Checkpoint::kVersion);
  const RnnConfig& c = ckpt.config;
  put_u32(out, static_cast<std::uint32_t>(c.cell));
  put_u32(out, static_cast<std::uint32_t>(c.activation));
  put_u32(out, static_cast<std::uint32_t>(c.hidden_dim));
  put_u32(out, static_cast<std::uint32_t>(c.vocab_size));
  put_f64(out, c.dropout_prob);
  put_f64(out, c.init_range);
  put_u64(out, c.seed);
  put_string(out, ckpt.vocab_path);
  put_u64(out, ckpt.vocab_hash);

  std::uint32_t tensors = 0;
  ckpt.params.for_each([&](std::string_view, const Eigen::MatrixXd&) { ++tensors; });
  put_u32(out, tensors);
  ckpt.params.for_each([&](std::string_view name, const Eigen::MatrixXd& m) {
    put_string(out, std::string(name));
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i])));
    }
  });
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[sizeof(Checkpoint::kMagic)];
  read_exact(in, magic, sizeof(magic));
  if (std::memcmp(magic, Checkpoint::kMagic, sizeof(magic)) != 0) throw IoError("checkpoint: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != Checkpoint::kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  RnnConfig& c = ckpt.config;
  const std::uint32_t cell = get_u32(in);
  const std::uint32_t activation = get_u32(in);
  if (cell > 1 || activation > 1) throw IoError("checkpoint: bad cell or activation tag");
  c.cell = static_cast<CellKind>(cell);
  c.activation = static_cast<Activation>(activation);
  c.hidden_dim = static_cast<int>(get_u32(in));
  c.vocab_size = static_cast<int>(get_u32(in));
  c.dropout_prob = get_f64(in);
  c.init_range = get_f64(in);
  c.seed = get_u64(in);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: invalid config: ") + e.what());
  }
  ckpt.vocab_path = get_string(in, 1u << 16);
  ckpt.vocab_hash = get_u64(in);

  ckpt.params = Parameters::zeros(c);
  const std::uint32_t tensors = get_u32(in);
  std::uint32_t expected = 0;
  ckpt.params.for_each([&](std::string_view, const Eigen::MatrixXd&) { ++expected; });
  if (tensors != expected) throw IoError("checkpoint: unexpected tensor count");
  ckpt.params.for_each([&](std::string_view name, Eigen::MatrixXd& m) {
    const std::string stored = get_string(in, 256);
    if (stored != name) throw IoError("checkpoint: expected tensor '" + std::string(name) + "', found '" + stored + "'");
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    if (rows != m.rows() || cols != m.cols()) {
      throw IoError("checkpoint: shape mismatch for tensor '" + stored + "'");
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::bit_cast<float>(get_u32(in));
  });
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  write_file_atomic(path, [&](std::ostream& out) { write_checkpoint(out, ckpt); }, true);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

}  // namespace ncache
