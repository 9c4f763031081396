#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "occnav/binary_io.hpp"
#include "occnav/models/generator.hpp"
#include "occnav/text_util.hpp"

namespace occnav::models {

/// Named float tensors plus a key=value descriptor. The descriptor carries the
/// architecture (kind, base_channels, input_gain, blocks) and the training
/// fingerprint (method, seed, config_hash).
struct ModelWeights {
  std::map<std::string, std::string> descriptor;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;
  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

inline constexpr std::uint32_t kWeightsVersion = 1;

inline std::map<std::string, std::string> describe_arch(const GeneratorArch& a) {
  return {{"kind", "generator"},
          {"blocks", std::to_string(kBlocks)},
          {"base_channels", std::to_string(a.base_channels)},
          {"input_gain", format_double(a.input_gain)}};
}

inline GeneratorArch arch_from_descriptor(const std::map<std::string, std::string>& d) {
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = d.find(k);
    if (it == d.end()) throw format_error("weights descriptor missing '" + k + "'");
    return it->second;
  };
  if (get("kind") != "generator") throw format_error("weights descriptor: kind is not 'generator'");
  if (get("blocks") != std::to_string(kBlocks)) throw format_error("weights descriptor: unsupported block count");
  GeneratorArch a;
  a.base_channels = static_cast<int>(parse_int(get("base_channels")));
  a.input_gain = parse_double(get("input_gain"));
  if (a.base_channels < 1) throw format_error("weights descriptor: base_channels must be positive");
  return a;
}

inline ModelWeights to_weights(Generator<float> g, std::map<std::string, std::string> fingerprint = {}) {
  ModelWeights w;
  w.descriptor = describe_arch(g.arch);
  for (auto& [k, v] : fingerprint) w.descriptor[k] = v;
  for (auto& [name, t] : g.named_parameters()) w.tensors.emplace_back(name, *t);
  return w;
}

/// Rebuilds a generator. With `expected`, the stored architecture must match it.
inline Generator<float> generator_from_weights(const ModelWeights& w,
                                               const std::optional<GeneratorArch>& expected = std::nullopt) {
  const GeneratorArch arch = arch_from_descriptor(w.descriptor);
  if (expected && !(*expected == arch))
    throw Error(ErrorKind::data_format, "weights architecture mismatch: file has base_channels=" +
                                            std::to_string(arch.base_channels) + ", expected " +
                                            std::to_string(expected->base_channels));
  Generator<float> g(arch);
  auto params = g.named_parameters();
  if (params.size() != w.tensors.size()) throw format_error("weights: tensor count does not match architecture");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, t] = w.tensors[i];
    if (name != params[i].first) throw format_error("weights: expected tensor '" + params[i].first + "', found '" + name + "'");
    if (t.shape != params[i].second->shape)
      throw format_error("weights: tensor '" + name + "' has shape " + nn::shape_str(t.shape));
    *params[i].second = t;
  }
  return g;
}

// OCCW layout: "OCCW", u32 version, u32-length descriptor text (key=value
// lines, sorted), u32 tensor count, then per tensor: u32-length name, u32
// rank, u32 dims..., little-endian float32 data.
inline void write_weights(std::ostream& os, const ModelWeights& w) {
  os.write("OCCW", 4);
  binio::put_u32(os, kWeightsVersion);
  std::string desc;
  for (const auto& [k, v] : w.descriptor) desc += k + "=" + v + "\n";
  binio::put_bytes(os, desc);
  binio::put_u32(os, static_cast<std::uint32_t>(w.tensors.size()));
  for (const auto& [name, t] : w.tensors) {
    binio::put_bytes(os, name);
    binio::put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) binio::put_u32(os, static_cast<std::uint32_t>(d));
    binio::put_f32s(os, t.data);
  }
}

inline ModelWeights read_weights(std::string bytes) {
  binio::Reader rd(std::move(bytes));
  std::string magic;
  if (!rd.get_raw(magic, 4) || magic != "OCCW") throw format_error("bad magic: not an OCCW weights file");
  std::uint32_t version = 0, count = 0;
  if (!rd.get_u32(version)) throw format_error("weights truncated");
  if (version != kWeightsVersion) throw format_error("unsupported weights version " + std::to_string(version));
  std::string desc;
  if (!rd.get_bytes(desc)) throw format_error("weights truncated in descriptor");
  ModelWeights w;
  std::istringstream is(desc);
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw format_error("weights descriptor line without '=': " + line);
    w.descriptor[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (!rd.get_u32(count)) throw format_error("weights truncated");
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name;
    std::uint32_t rank = 0;
    if (!rd.get_bytes(name) || !rd.get_u32(rank) || rank > 8) throw format_error("weights truncated in tensor header");
    std::vector<int> shape(rank);
    for (auto& d : shape) {
      std::uint32_t v;
      if (!rd.get_u32(v)) throw format_error("weights truncated in tensor header");
      d = static_cast<int>(v);
    }
    Tensor<float> t;
    t.shape = shape;
    if (!rd.get_f32s(t.data, Tensor<float>::count(shape))) throw format_error("weights truncated in tensor data");
    w.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (rd.remaining() != 0) throw format_error("trailing bytes after weights");
  return w;
}

inline void save_weights(const ModelWeights& w, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  write_weights(f, w);
  if (!f) throw io_error("write failed: " + path);
}

inline ModelWeights load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return read_weights(ss.str());
}

}  // namespace occnav::models
