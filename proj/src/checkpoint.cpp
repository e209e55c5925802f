#include "duet/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "duet/common.h"

namespace duet {

namespace {

constexpr uint32_t kFormatVersion = 1;

void put_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class U>
void put_le(std::ostream& out, U v) {
  static_assert(std::is_unsigned_v<U>);
  unsigned char buf[sizeof(U)];
  for (size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, buf, sizeof(U));
}

void put_f32(std::ostream& out, float f) { put_le(out, std::bit_cast<uint32_t>(f)); }

template <class U>
U get_le(std::istream& in) {
  unsigned char buf[sizeof(U)];
  in.read(reinterpret_cast<char*>(buf), sizeof(U));
  if (!in) throw DataError("checkpoint: unexpected end of file");
  U v = 0;
  for (size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

float get_f32(std::istream& in) { return std::bit_cast<float>(get_le<uint32_t>(in)); }

void expect_magic(std::istream& in, const char* magic, const std::string& what) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) throw DataError("checkpoint: bad " + what + " magic");
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<FloatTensorPtr>& tensors,
                     const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  put_bytes(out, "DUET", 4);
  put_le<uint32_t>(out, kFormatVersion);
  put_le<uint32_t>(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t->name.empty()) throw std::invalid_argument("save_checkpoint: unnamed tensor");
    put_le<uint16_t>(out, static_cast<uint16_t>(t->name.size()));
    put_bytes(out, t->name.data(), t->name.size());
    put_le<uint8_t>(out, static_cast<uint8_t>(t->shape.size()));
    for (int d : t->shape) put_le<uint32_t>(out, static_cast<uint32_t>(d));
    for (float v : t->data) put_f32(out, v);
  }
  put_bytes(out, "META", 4);
  put_le<uint64_t>(out, meta.seed);
  put_le<uint64_t>(out, meta.config_digest);
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

std::vector<FloatTensorPtr> load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  expect_magic(in, "DUET", "header");
  const uint32_t version = get_le<uint32_t>(in);
  if (version != kFormatVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const uint32_t count = get_le<uint32_t>(in);
  std::vector<FloatTensorPtr> tensors;
  tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = get_le<uint16_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint: unexpected end of file");
    const uint8_t rank = get_le<uint8_t>(in);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(get_le<uint32_t>(in));
    auto t = make_tensor<float>(shape, true, name);
    for (auto& v : t->data) v = get_f32(in);
    tensors.push_back(std::move(t));
  }
  expect_magic(in, "META", "trailer");
  CheckpointMeta m;
  m.seed = get_le<uint64_t>(in);
  m.config_digest = get_le<uint64_t>(in);
  if (meta) *meta = m;
  return tensors;
}

}  // namespace duet
