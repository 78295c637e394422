//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "fixynn/model_ir.hpp"
#include "fixynn/quantize.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

namespace fixynn
{

struct BnParams
{
    std::vector<float> scale;
    std::vector<float> bias;
};

/// Real-valued model: graph plus trained parameters.
struct ModelBundle
{
    Graph graph;
    std::map<int, RealTensor> weights;    // every conv/FC layer
    std::map<int, BnParams> bn;           // every has_bn layer
    std::map<int, RealTensor> fc_bias;    // the FC layer

    /// Throws FormatError when a tensor is missing or mis-shaped.
    void validate() const;
};

/// He-normal conv/FC weights, BN scale in [0.5, 1.5), small BN/FC biases; seeded and reproducible.
ModelBundle random_bundle(const Graph& graph, std::uint64_t seed);

// ---- weight blob ---------------------------------------------------------

enum class TensorRole : std::uint8_t
{
    Weight  = 0,
    BnScale = 1,
    BnBias  = 2,
    FcBias  = 3,
};

enum class DType : std::uint8_t
{
    F32 = 0,
    I8  = 1,
};

struct BlobRecord
{
    std::uint16_t layer = 0;
    TensorRole role     = TensorRole::Weight;
    std::vector<std::uint32_t> dims;
    DType dtype = DType::F32;
    std::vector<float> f32;
    std::vector<std::int8_t> i8;

    std::size_t element_count() const;
};

inline constexpr std::uint16_t kBlobVersion = 1;

std::vector<std::uint8_t> encode_blob(std::span<const BlobRecord> records);
std::vector<BlobRecord> decode_blob(std::span<const std::uint8_t> bytes);

// ---- manifests -----------------------------------------------------------

nlohmann::json graph_to_json(const Graph& graph);
Graph graph_from_json(const nlohmann::json& json);

/// Writes `manifest` plus a sibling blob named after it (`<stem>.bin`).
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& manifest);
ModelBundle load_bundle(const std::filesystem::path& manifest);

// ---- activation tensor files ---------------------------------------------

/// "FXTN", u8 rank, u32 dims, i8 scale exponent, int8 payload (row-major, channels last).
struct TensorFile
{
    std::vector<std::uint32_t> dims;
    int scale_exponent = 0;
    std::vector<std::int8_t> values;
};

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& tensor);
TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}    // namespace fixynn
