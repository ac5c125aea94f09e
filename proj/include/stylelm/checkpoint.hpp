#pragma once

// Checkpoint container.
//
//   bytes 0..7   magic "STYLELM\x1a"
//   u32 LE       format version
//   u64 LE       header length N
//   N bytes      UTF-8 JSON header: config, vocabulary, provenance, tensor manifest
//   f64 LE ...   tensor payloads in manifest order
//   u32 LE       CRC-32 of every preceding byte
//
// The header is dumped with sorted keys and contains no timestamps, so equal
// checkpoints serialize to equal bytes.

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "stylelm/config.hpp"
#include "stylelm/corpus.hpp"
#include "stylelm/errors.hpp"
#include "stylelm/nn.hpp"
#include "stylelm/optim.hpp"

namespace stylelm {

inline constexpr std::string_view kCheckpointMagic{"STYLELM\x1a", 8};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  Vocabulary vocab;
  char pad_char = ' ';
  ModelParams params;
  OptimState optim;
  std::uint64_t step = 0;
  Json provenance = Json::object();

  ModelShape shape() const { return params.shape; }
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
  return v;
}

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

/// Parameter tensors, then Adam first and second moments.
template <class Ckpt>
auto checkpoint_tensors(Ckpt& c) {
  auto all = c.params.tensors();
  for (auto& t : c.optim.m.tensors()) {
    t.name = "optim.m." + t.name;
    all.push_back(t);
  }
  for (auto& t : c.optim.v.tensors()) {
    t.name = "optim.v." + t.name;
    all.push_back(t);
  }
  return all;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& c) {
  require_shape(c.params.shape.vocab == c.vocab.size(), "checkpoint vocabulary differs from parameter shape");
  require_shape(c.optim.m.shape == c.params.shape && c.optim.v.shape == c.params.shape,
                "optimizer state differs from parameter shape");
  Json header;
  header["format_version"] = kCheckpointVersion;
  header["config"] = to_json(c.config);
  Json chars = Json::array();
  for (char ch : c.vocab.chars()) chars.push_back(static_cast<unsigned char>(ch));
  header["vocabulary"] = chars;
  header["pad_char"] = static_cast<unsigned char>(c.pad_char);
  header["shape"] = {{"architecture", std::string(to_string(c.params.shape.arch))},
                     {"hidden", c.params.shape.hidden},
                     {"vocab", c.params.shape.vocab},
                     {"seq_len", c.params.shape.seq_len}};
  header["step"] = c.step;
  header["optim_t"] = c.optim.t;
  header["provenance"] = c.provenance;
  Json manifest = Json::array();
  const auto tensors = detail::checkpoint_tensors(c);
  for (const auto& t : tensors) manifest.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
  header["tensors"] = manifest;

  const std::string head = header.dump();
  std::string out(kCheckpointMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, head.size());
  out += head;
  for (const auto& t : tensors)
    for (double x : t.data) {
      if (!std::isfinite(x)) throw DivergenceError("refusing to save non-finite tensor " + t.name);
      detail::put_u64(out, std::bit_cast<std::uint64_t>(x));
    }
  detail::put_u32(out, detail::crc32_of(out));
  return out;
}

inline Checkpoint deserialize_checkpoint(std::string_view bytes) {
  const std::size_t fixed = kCheckpointMagic.size() + 4 + 8;
  if (bytes.size() < fixed + 4) throw IntegrityError("file too short");
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) throw IntegrityError("bad magic");
  const auto stored_crc = static_cast<std::uint32_t>(detail::get_le(bytes, bytes.size() - 4, 4));
  if (detail::crc32_of(bytes.substr(0, bytes.size() - 4)) != stored_crc) throw IntegrityError("checksum mismatch");
  const auto version = static_cast<std::uint32_t>(detail::get_le(bytes, kCheckpointMagic.size(), 4));
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint format_version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  const std::uint64_t head_len = detail::get_le(bytes, kCheckpointMagic.size() + 4, 8);
  if (head_len > bytes.size() - fixed - 4) throw IntegrityError("header length out of range");

  Json header;
  try {
    header = Json::parse(bytes.substr(fixed, head_len));
  } catch (const Json::exception& e) {
    throw IntegrityError(std::string("bad header: ") + e.what());
  }

  Checkpoint c;
  try {
    if (header.at("format_version").get<std::uint32_t>() != version) throw IntegrityError("header version differs");
    c.config = train_config_from_json(header.at("config"));
    std::string chars;
    for (const auto& v : header.at("vocabulary")) chars.push_back(static_cast<char>(v.get<int>()));
    c.vocab = Vocabulary::from_chars(chars);
    c.pad_char = static_cast<char>(header.at("pad_char").get<int>());
    const auto& s = header.at("shape");
    ModelShape shape{parse_architecture(s.at("architecture").get<std::string>()), s.at("hidden").get<std::size_t>(),
                     s.at("vocab").get<std::size_t>(), s.at("seq_len").get<std::size_t>()};
    if (shape.vocab != c.vocab.size()) throw IntegrityError("vocabulary size differs from shape");
    c.params = ModelParams::zeros(shape);
    c.optim = OptimState::for_params(c.params);
    c.optim.t = header.at("optim_t").get<std::uint64_t>();
    c.step = header.at("step").get<std::uint64_t>();
    c.provenance = header.at("provenance");
  } catch (const Json::exception& e) {
    throw IntegrityError(std::string("bad header: ") + e.what());
  }

  auto tensors = detail::checkpoint_tensors(c);
  const auto& manifest = header.at("tensors");
  if (manifest.size() != tensors.size()) throw IntegrityError("tensor manifest does not match architecture");
  std::size_t pos = fixed + head_len;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    auto& t = tensors[k];
    const auto& m = manifest[k];
    if (m.at("name") != t.name || m.at("rows") != t.rows || m.at("cols") != t.cols)
      throw IntegrityError("tensor manifest entry " + std::to_string(k) + " does not match " + t.name);
    if (pos + 8 * t.data.size() > bytes.size() - 4) throw IntegrityError("truncated tensor payload");
    for (double& x : t.data) {
      x = std::bit_cast<double>(detail::get_le(bytes, pos, 8));
      pos += 8;
    }
  }
  if (pos != bytes.size() - 4) throw IntegrityError("trailing bytes after tensor payload");
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  const std::string bytes = serialize_checkpoint(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_text_file(path)); }

}  // namespace stylelm
