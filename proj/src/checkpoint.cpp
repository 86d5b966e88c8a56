#include "harmclf/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "harmclf/error.hpp"

namespace harmclf {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'H', 'P', 'C', '1'};
constexpr std::uint32_t kConfigFields = 10;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(
      crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("checkpoint truncated at offset " + std::to_string(pos_) +
                        " while reading " + what);
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t{bytes_[pos_ + k]} << (8 * k);
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::int32_t as_dim(std::uint32_t v, std::size_t offset, const char* name) {
  if (v == 0 || v > (1u << 24)) {
    throw FormatError(std::string("implausible ") + name + " " + std::to_string(v) +
                      " at offset " + std::to_string(offset));
  }
  return static_cast<std::int32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params, const ModelConfig& model,
                                            const FeatureConfig& features) {
  if (!params.matches(model)) throw ConfigError("parameter shapes do not match model config");
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.push_back(kCheckpointVersion);
  put_u32(out, kConfigFields * 4);
  for (std::int32_t v : {model.vocab_size, model.embed_dim, model.hidden_dim, model.num_classes,
                         model.num_targets}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_u32(out, static_cast<std::uint32_t>(model.seed));
  put_u32(out, static_cast<std::uint32_t>(model.seed >> 32));
  for (int v : {features.max_tokens, features.hash_bits, features.ngram}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  params.for_each_tensor([&](std::string_view, std::span<const double> data) {
    for (double x : data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  });
  put_u32(out, crc_of(out));
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (std::size_t k = 0; k < kMagic.size(); ++k) {
    if (r.u8("magic") != kMagic[k]) {
      throw FormatError("bad magic at offset " + std::to_string(k) + " (not a HPC1 checkpoint)");
    }
  }
  const auto version = r.u8("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " at offset 4 (this build reads version 1)");
  }
  const std::size_t header_at = r.offset();
  const auto header_len = r.u32("header length");
  if (header_len != kConfigFields * 4) {
    throw FormatError("unexpected header length " + std::to_string(header_len) + " at offset " +
                      std::to_string(header_at));
  }

  Checkpoint ck;
  auto dim = [&](const char* name) {
    const auto at = r.offset();
    return as_dim(r.u32(name), at, name);
  };
  ck.model.vocab_size = dim("vocab_size");
  ck.model.embed_dim = dim("embed_dim");
  ck.model.hidden_dim = dim("hidden_dim");
  ck.model.num_classes = dim("num_classes");
  ck.model.num_targets = dim("num_targets");
  const std::uint64_t seed_lo = r.u32("seed");
  const std::uint64_t seed_hi = r.u32("seed");
  ck.model.seed = seed_lo | (seed_hi << 32);
  ck.features.max_tokens = dim("max_tokens");
  ck.features.hash_bits = static_cast<int>(r.u32("hash_bits"));
  ck.features.ngram = static_cast<int>(r.u32("ngram"));
  try {
    ck.features.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid feature config in header: ") + e.what());
  }
  if (ck.model.vocab_size != ck.features.vocab_size()) {
    throw FormatError("vocab_size " + std::to_string(ck.model.vocab_size) +
                      " disagrees with hash_bits " + std::to_string(ck.features.hash_bits));
  }

  const auto& m = ck.model;
  std::size_t floats = static_cast<std::size_t>(m.vocab_size) * m.embed_dim +
                       static_cast<std::size_t>(m.embed_dim) * m.hidden_dim + m.hidden_dim +
                       static_cast<std::size_t>(m.hidden_dim) * (m.num_classes + m.num_targets) +
                       m.num_classes + m.num_targets;
  // Check the full length before allocating so a truncated file fails closed.
  r.need(floats * 4 + 4, "parameter tensors");
  const std::size_t payload_end = r.offset() + floats * 4;
  if (bytes.size() != payload_end + 4) {
    throw FormatError("trailing bytes after offset " + std::to_string(payload_end + 4));
  }
  const auto stored_crc = [&] {
    Reader tail(bytes.subspan(payload_end));
    return tail.u32("crc");
  }();
  if (stored_crc != crc_of(bytes.first(payload_end))) {
    throw FormatError("CRC mismatch (checksum at offset " + std::to_string(payload_end) + ")");
  }

  ck.params.embedding.resize(m.vocab_size, m.embed_dim);
  ck.params.hidden_weight.resize(m.embed_dim, m.hidden_dim);
  ck.params.hidden_bias.resize(m.hidden_dim);
  ck.params.class_weight.resize(m.hidden_dim, m.num_classes);
  ck.params.class_bias.resize(m.num_classes);
  ck.params.target_weight.resize(m.hidden_dim, m.num_targets);
  ck.params.target_bias.resize(m.num_targets);
  ck.params.for_each_tensor([&](std::string_view name, std::span<double> data) {
    for (double& x : data) x = r.f32(std::string(name).c_str());
  });
  return ck;
}

void save_params(const ModelParams& params, const ModelConfig& model,
                 const FeatureConfig& features, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params, model, features);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for checkpoint " + path.string());
}

Checkpoint load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace harmclf
