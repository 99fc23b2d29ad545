#pragma once

// Parameter checkpoint: little-endian binary
//   magic "FDNS" | u32 version | u32 variant | u32 num_layers | u32 hidden
//   | u32 feature_dim | u32 struct_dim | u32 num_classes | u32 tensor_count
//   | f32 values of every tensor in declaration order
// plus a JSON sidecar (<path>.json) listing names and shapes.

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "feddense/error.hpp"
#include "feddense/model.hpp"

namespace feddense {

inline constexpr std::array<char, 4> kCheckpointMagic = {'F', 'D', 'N', 'S'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace ckpt_detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace ckpt_detail

/// Serializes tensor values (no header) as little-endian f32, in order.
/// This is also the on-the-wire payload format of the federation.
inline std::vector<std::uint8_t> encode_values(const nn::ParameterSet<float>& params) {
  std::vector<std::uint8_t> out;
  out.reserve(4 * params.count());
  for (const auto& t : params.tensors) {
    for (float v : t.values) ckpt_detail::put_f32(out, v);
  }
  return out;
}

/// Inverse of encode_values; `shape_of` supplies names and shapes.
inline nn::ParameterSet<float> decode_values(const std::vector<std::uint8_t>& bytes,
                                             const nn::ParameterSet<float>& shape_of) {
  if (bytes.size() != 4 * shape_of.count()) {
    throw CheckpointError("payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(4 * shape_of.count()));
  }
  nn::ParameterSet<float> out = shape_of;
  std::size_t off = 0;
  for (auto& t : out.tensors) {
    for (auto& v : t.values) {
      v = ckpt_detail::get_f32(bytes.data() + off);
      off += 4;
    }
  }
  return out;
}

inline std::vector<std::uint8_t> encode_checkpoint(const nn::ParameterSet<float>& params, const ModelConfig& cfg) {
  const auto layout = parameter_layout(cfg);
  if (layout.size() != params.size()) throw CheckpointError("parameter set does not match model config");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].name != params.tensors[i].name || layout[i].shape != params.tensors[i].shape) {
      throw CheckpointError("parameter '" + params.tensors[i].name + "' does not match model config");
    }
  }
  std::vector<std::uint8_t> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  using ckpt_detail::put_u32;
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(cfg.variant));
  put_u32(out, static_cast<std::uint32_t>(cfg.num_layers));
  put_u32(out, static_cast<std::uint32_t>(cfg.hidden));
  put_u32(out, static_cast<std::uint32_t>(cfg.feature_dim));
  put_u32(out, static_cast<std::uint32_t>(cfg.has_struct_channel() ? cfg.struct_dim : 0));
  put_u32(out, static_cast<std::uint32_t>(cfg.num_classes));
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  auto body = encode_values(params);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

struct Checkpoint {
  ModelConfig config;  // architecture fields only; dropout/epsilon keep defaults
  nn::ParameterSet<float> params;
};

inline Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t header = 4 + 8 * 4;
  if (bytes.size() < header || !std::equal(kCheckpointMagic.begin(), kCheckpointMagic.end(), bytes.begin())) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  using ckpt_detail::get_u32;
  const std::uint8_t* p = bytes.data() + 4;
  if (get_u32(p) != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(get_u32(p)));
  const auto variant = get_u32(p + 4);
  if (variant > static_cast<std::uint32_t>(ModelVariant::single)) throw CheckpointError("bad variant tag");
  Checkpoint ck;
  ck.config.variant = static_cast<ModelVariant>(variant);
  ck.config.num_layers = get_u32(p + 8);
  ck.config.hidden = get_u32(p + 12);
  ck.config.feature_dim = get_u32(p + 16);
  ck.config.struct_dim = get_u32(p + 20);
  ck.config.num_classes = get_u32(p + 24);
  const auto count = get_u32(p + 28);
  if (!ck.config.has_struct_channel()) ck.config.struct_dim = ModelConfig{}.struct_dim;
  ck.params = init_params<float>(ck.config, 0);
  if (ck.params.size() != count) throw CheckpointError("tensor count does not match header");
  std::vector<std::uint8_t> body(bytes.begin() + header, bytes.end());
  ck.params = decode_values(body, ck.params);
  return ck;
}

inline nlohmann::json checkpoint_sidecar(const nn::ParameterSet<float>& params, const ModelConfig& cfg) {
  nlohmann::json j;
  j["format"] = "feddense-checkpoint";
  j["version"] = kCheckpointVersion;
  j["variant"] = to_string(cfg.variant);
  j["num_layers"] = cfg.num_layers;
  j["hidden"] = cfg.hidden;
  j["feature_dim"] = cfg.feature_dim;
  j["struct_dim"] = cfg.has_struct_channel() ? cfg.struct_dim : 0;
  j["num_classes"] = cfg.num_classes;
  j["byte_order"] = "little";
  j["dtype"] = "f32";
  auto& ts = j["tensors"] = nlohmann::json::array();
  std::size_t offset = 4 + 8 * 4;
  for (const auto& t : params.tensors) {
    ts.push_back({{"name", t.name},
                  {"shape", t.shape},
                  {"group", t.group == nn::ParamGroup::structural ? "structural" : "feature"},
                  {"offset", offset}});
    offset += 4 * t.numel();
  }
  return j;
}

inline void save_checkpoint(const std::filesystem::path& path, const nn::ParameterSet<float>& params,
                            const ModelConfig& cfg) {
  auto bytes = encode_checkpoint(params, cfg);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream side(path.string() + ".json", std::ios::trunc);
  side << checkpoint_sidecar(params, cfg).dump(2) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace feddense
