#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "srmfv/checkpoint.hpp"

namespace srmfv {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'M', 'V'};

void put_u16(std::ostream& out, std::uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint16_t get_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  if (!in) throw FormatError("checkpoint: truncated file");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  put_u32(out, Checkpoint::kVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(2);  // rank
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_f32(out, m(i, j));
  }
  nlohmann::json blob{{"config", to_json(ckpt.config)},
                      {"rng_state", ckpt.rng_state}};
  const std::string s = blob.dump();
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("checkpoint: bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != Checkpoint::kVersion)
    throw FormatError("checkpoint: unsupported version " +
                      std::to_string(version));
  Checkpoint ckpt;
  const std::uint32_t count = get_u32(in);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint16_t name_len = get_u16(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw FormatError("checkpoint: truncated file");
    const int rank = in.get();
    if (rank != 2)
      throw FormatError("checkpoint: unsupported tensor rank " +
                        std::to_string(rank));
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    Mat<float> m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = get_f32(in);
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  const std::uint32_t blob_len = get_u32(in);
  std::string s(blob_len, '\0');
  in.read(s.data(), blob_len);
  if (!in) throw FormatError("checkpoint: truncated config blob");
  nlohmann::json blob;
  try {
    blob = nlohmann::json::parse(s);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: bad config blob: ") + e.what());
  }
  ckpt.config = config_from_json(blob.at("config"));
  const auto rs = blob.at("rng_state").get<std::vector<std::uint64_t>>();
  if (rs.size() != 4) throw FormatError("checkpoint: bad rng state");
  for (int i = 0; i < 4; ++i) ckpt.rng_state[static_cast<std::size_t>(i)] = rs[static_cast<std::size_t>(i)];
  return ckpt;
}

}  // namespace srmfv
