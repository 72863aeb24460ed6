// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "jppnet/net/jppnet.hpp"

namespace jpp::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Container layout: 8-byte magic "JPPCKPT\0", uint32 format version,
/// uint64 header length, a JSON header (network description, free-form
/// metadata, tensor table with name/shape/offset), then little-endian
/// float32 tensor data in table order.
struct Checkpoint {
  NetConfig net;
  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, Tensor<float>> tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies every parameter into `ckpt.tensors` under its layer name.
template <typename T>
void store_weights(const JppNet<T>& model, Checkpoint& ckpt);

/// Copies tensors whose names match parameters of `model`. With
/// `require_all`, a missing parameter is an error; a shape mismatch always
/// is. Returns the number of parameters loaded.
template <typename T>
std::size_t load_weights(JppNet<T>& model, const Checkpoint& ckpt, bool require_all);

}  // namespace jpp::net
