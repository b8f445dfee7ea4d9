#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ame/common.hpp"
#include "ame/optim.hpp"

namespace ame::nn {

/// Model variants: the full network or the two feature-branch ablations.
enum class Variant { AME, AME_RG, AME_RP };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::AME: return "ame";
    case Variant::AME_RG: return "ame-rg";
    case Variant::AME_RP: return "ame-rp";
  }
  return "?";
}

inline Variant variant_from_string(std::string_view s) {
  if (s == "ame") return Variant::AME;
  if (s == "ame-rg") return Variant::AME_RG;
  if (s == "ame-rp") return Variant::AME_RP;
  throw std::invalid_argument("unknown variant: " + std::string(s));
}

/// Fixed-size header stored at the front of every checkpoint; a load must
/// match the receiving model's configuration exactly.
struct CheckpointHeader {
  std::uint32_t d = 0;
  std::uint32_t feature_dim = 0;       // F
  std::uint32_t self_attn_hidden = 0;  // 200 by default
  std::uint32_t encoder_hidden = 0;    // 100 by default
  Vuln vuln = Vuln::Reentrancy;
  Variant variant = Variant::AME;
};

namespace detail {

inline constexpr char kMagic[8] = {'A', 'M', 'E', 'V', 'D', 'C', 'P', '1'};
inline constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw LoadError("checkpoint truncated");
  return v;
}

}  // namespace detail

/// Writes the versioned binary checkpoint: magic, format version, header,
/// then (name, shape, raw float64 values) per parameter. Byte layout is
/// documented in docs/checkpoint-format.md and byte-exact round-trips.
inline void save_checkpoint(const std::string& path, const CheckpointHeader& h,
                            const ParameterStore& store) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw LoadError("cannot open checkpoint for writing: " + path);
  os.write(detail::kMagic, sizeof(detail::kMagic));
  detail::write_pod(os, detail::kFormatVersion);
  detail::write_pod(os, h.d);
  detail::write_pod(os, h.feature_dim);
  detail::write_pod(os, h.self_attn_hidden);
  detail::write_pod(os, h.encoder_hidden);
  detail::write_pod(os, static_cast<std::uint8_t>(h.vuln));
  detail::write_pod(os, static_cast<std::uint8_t>(h.variant));
  detail::write_pod(os, static_cast<std::uint64_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string& name = store.names()[i];
    const Tensor& t = store.at(i);
    detail::write_pod(os, static_cast<std::uint16_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_pod(os, static_cast<std::uint8_t>(t.shape.size()));
    for (int d : t.shape) detail::write_pod(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!os) throw LoadError("failed writing checkpoint: " + path);
}

inline CheckpointHeader load_checkpoint(const std::string& path, ParameterStore& store) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, detail::kMagic, sizeof(magic)) != 0)
    throw LoadError("not an amevd checkpoint: " + path);
  auto version = detail::read_pod<std::uint32_t>(is);
  if (version != detail::kFormatVersion)
    throw LoadError("unsupported checkpoint version " + std::to_string(version));
  CheckpointHeader h;
  h.d = detail::read_pod<std::uint32_t>(is);
  h.feature_dim = detail::read_pod<std::uint32_t>(is);
  h.self_attn_hidden = detail::read_pod<std::uint32_t>(is);
  h.encoder_hidden = detail::read_pod<std::uint32_t>(is);
  h.vuln = static_cast<Vuln>(detail::read_pod<std::uint8_t>(is));
  h.variant = static_cast<Variant>(detail::read_pod<std::uint8_t>(is));
  auto count = detail::read_pod<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name_len = detail::read_pod<std::uint16_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    auto ndim = detail::read_pod<std::uint8_t>(is);
    std::vector<int> shape;
    for (int k = 0; k < ndim; ++k)
      shape.push_back(static_cast<int>(detail::read_pod<std::uint32_t>(is)));
    Tensor& t = store.has(name) ? store.get(name) : store.add(name, shape);
    if (t.shape != shape)
      throw CheckpointMismatchError("parameter " + name + " has shape " + shape_str(shape) +
                                    " in checkpoint, expected " + shape_str(t.shape));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!is) throw LoadError("checkpoint truncated in parameter " + name);
  }
  return h;
}

/// FNV-1a hash of the checkpoint file bytes, for report provenance.
inline std::string checkpoint_hash(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LoadError("cannot open checkpoint: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return std::string("fnv1a64:") + buf;
}

}  // namespace ame::nn
