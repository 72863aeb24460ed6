// SPDX-License-Identifier: Apache-2.0
#include "jppnet/net/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "jppnet/core/errors.hpp"

namespace jpp::net {
namespace {

constexpr char kMagic[8] = {'J', 'P', 'P', 'C', 'K', 'P', 'T', '\0'};

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U take(std::istream& in, const std::string& origin) {
  U v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(U))) {
    throw DataError("truncated checkpoint " + origin);
  }
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json table = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    table.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}, {"dtype", "f32"}});
    offset += t.size() * sizeof(float);
  }
  const nlohmann::json header = {{"net", ckpt.net.to_json()}, {"meta", ckpt.meta}, {"tensors", table}};
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : ckpt.tensors) {
      out.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(float)));
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string origin = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing checkpoint " + origin);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw DataError("not a checkpoint file: " + origin);
  }
  const auto version = take<std::uint32_t>(in, origin);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + " in " + origin);
  }
  const auto len = take<std::uint64_t>(in, origin);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError("truncated checkpoint header in " + origin);
  }
  Checkpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ckpt.net = NetConfig::from_json(header.at("net"));
    ckpt.meta = header.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint header in " + origin + ": " + e.what());
  }
  const auto data_start = in.tellg();
  for (const auto& entry : header.at("tensors")) {
    const auto name = entry.at("name").get<std::string>();
    Tensor<float> t(entry.at("shape").get<std::vector<int>>());
    in.seekg(data_start + static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
    if (!in.read(reinterpret_cast<char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(float)))) {
      throw DataError("truncated tensor " + name + " in " + origin);
    }
    ckpt.tensors.emplace(name, std::move(t));
  }
  return ckpt;
}

template <typename T>
void store_weights(const JppNet<T>& model, Checkpoint& ckpt) {
  ckpt.net = model.config();
  for (const auto& [name, v] : model.parameters().entries()) {
    Tensor<float> t(v->value.shape());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(v->value[i]);
    ckpt.tensors[name] = std::move(t);
  }
}

template <typename T>
std::size_t load_weights(JppNet<T>& model, const Checkpoint& ckpt, bool require_all) {
  std::size_t loaded = 0;
  for (const auto& [name, v] : model.parameters().entries()) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) {
      if (require_all) throw DataError("checkpoint has no tensor " + name);
      continue;
    }
    if (it->second.shape() != v->value.shape()) {
      throw DataError("checkpoint tensor " + name + " has shape " + it->second.shape_string() +
                      ", model expects " + v->value.shape_string());
    }
    for (std::size_t i = 0; i < v->value.size(); ++i) v->value[i] = static_cast<T>(it->second[i]);
    ++loaded;
  }
  return loaded;
}

template void store_weights(const JppNet<float>&, Checkpoint&);
template void store_weights(const JppNet<double>&, Checkpoint&);
template std::size_t load_weights(JppNet<float>&, const Checkpoint&, bool);
template std::size_t load_weights(JppNet<double>&, const Checkpoint&, bool);

}  // namespace jpp::net
