//
// Copyright © 2026 The FixyNN Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fixynn/model_io.hpp"

#include "fixynn/errors.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace fixynn
{

namespace
{

constexpr std::array<char, 4> kBlobMagic{ 'F', 'X', 'N', 'N' };
constexpr std::array<char, 4> kTensorMagic{ 'F', 'X', 'T', 'N' };

class ByteWriter
{
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v)
    {
        u8(static_cast<std::uint8_t>(v & 0xFF));
        u8(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
        {
            u8(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
        }
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void magic(const std::array<char, 4>& m)
    {
        for (char c : m)
        {
            u8(static_cast<std::uint8_t>(c));
        }
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes)
        : bytes_(bytes)
    {}

    bool done() const { return pos_ == bytes_.size(); }

    std::uint8_t u8()
    {
        need(1);
        return bytes_[pos_++];
    }
    std::uint16_t u16()
    {
        const std::uint16_t lo = u8();
        const std::uint16_t hi = u8();
        return static_cast<std::uint16_t>(lo | (hi << 8));
    }
    std::uint32_t u32()
    {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
        {
            v |= std::uint32_t{ u8() } << (8 * i);
        }
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    void expect_magic(const std::array<char, 4>& m, const char* what)
    {
        for (char c : m)
        {
            if (u8() != static_cast<std::uint8_t>(c))
            {
                throw FormatError(std::string("bad magic in ") + what);
            }
        }
    }

private:
    void need(std::size_t n) const
    {
        if (pos_ + n > bytes_.size())
        {
            throw FormatError("unexpected end of data at byte " + std::to_string(pos_));
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::size_t product(const std::vector<std::uint32_t>& dims)
{
    std::size_t n = 1;
    for (auto d : dims)
    {
        n *= d;
    }
    return n;
}

std::filesystem::path blob_path_for(const std::filesystem::path& manifest)
{
    auto blob = manifest;
    blob.replace_extension(".bin");
    return blob;
}

}    // namespace

// ---- ModelBundle ---------------------------------------------------------

void ModelBundle::validate() const
{
    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& layer = graph.layer(i);
        const std::string where = "layer " + std::to_string(i);
        if (layer.kind != LayerKind::AvgPool)
        {
            auto it = weights.find(i);
            if (it == weights.end())
            {
                throw FormatError(where + ": missing weight tensor");
            }
            if (it->second.dims != layer.weight_dims() || it->second.values.size() != product(it->second.dims))
            {
                throw FormatError(where + ": weight tensor shape does not match the layer");
            }
        }
        if (layer.has_bn)
        {
            auto it = bn.find(i);
            const auto channels = static_cast<std::size_t>(layer.out_channels);
            if (it == bn.end() || it->second.scale.size() != channels || it->second.bias.size() != channels)
            {
                throw FormatError(where + ": BN parameters missing or wrong channel count");
            }
        }
        if (layer.kind == LayerKind::FullyConnected)
        {
            auto it = fc_bias.find(i);
            if (it == fc_bias.end() || it->second.values.size() != static_cast<std::size_t>(layer.out_channels))
            {
                throw FormatError(where + ": FC bias missing or wrong size");
            }
        }
    }
}

ModelBundle random_bundle(const Graph& graph, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    ModelBundle bundle{ graph, {}, {}, {} };
    for (int i = 0; i < graph.size(); ++i)
    {
        const LayerSpec& layer = graph.layer(i);
        if (layer.kind != LayerKind::AvgPool)
        {
            std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(layer.fan_in())));
            RealTensor w;
            w.dims = layer.weight_dims();
            w.values.resize(static_cast<std::size_t>(layer.weight_count()));
            for (auto& v : w.values)
            {
                v = dist(rng);
            }
            bundle.weights.emplace(i, std::move(w));
        }
        if (layer.has_bn)
        {
            std::uniform_real_distribution<float> scale(0.5f, 1.5f);
            std::normal_distribution<float> bias(0.0f, 0.1f);
            BnParams bn;
            for (int c = 0; c < layer.out_channels; ++c)
            {
                bn.scale.push_back(scale(rng));
                bn.bias.push_back(bias(rng));
            }
            bundle.bn.emplace(i, std::move(bn));
        }
        if (layer.kind == LayerKind::FullyConnected)
        {
            std::normal_distribution<float> bias(0.0f, 0.01f);
            RealTensor b;
            b.dims = { static_cast<std::uint32_t>(layer.out_channels) };
            for (int c = 0; c < layer.out_channels; ++c)
            {
                b.values.push_back(bias(rng));
            }
            bundle.fc_bias.emplace(i, std::move(b));
        }
    }
    return bundle;
}

// ---- blob ----------------------------------------------------------------

std::size_t BlobRecord::element_count() const
{
    return product(dims);
}

std::vector<std::uint8_t> encode_blob(std::span<const BlobRecord> records)
{
    ByteWriter out;
    out.magic(kBlobMagic);
    out.u16(kBlobVersion);
    for (const BlobRecord& r : records)
    {
        if (r.dims.size() > 255)
        {
            throw ConfigError("tensor rank above 255");
        }
        const std::size_t n = r.element_count();
        if ((r.dtype == DType::F32 && r.f32.size() != n) || (r.dtype == DType::I8 && r.i8.size() != n))
        {
            throw ConfigError("blob record payload does not match its dims");
        }
        out.u16(r.layer);
        out.u8(static_cast<std::uint8_t>(r.role));
        out.u8(static_cast<std::uint8_t>(r.dims.size()));
        for (auto d : r.dims)
        {
            out.u32(d);
        }
        out.u8(static_cast<std::uint8_t>(r.dtype));
        if (r.dtype == DType::F32)
        {
            for (float v : r.f32)
            {
                out.f32(v);
            }
        }
        else
        {
            for (std::int8_t v : r.i8)
            {
                out.u8(static_cast<std::uint8_t>(v));
            }
        }
    }
    return out.take();
}

std::vector<BlobRecord> decode_blob(std::span<const std::uint8_t> bytes)
{
    ByteReader in(bytes);
    in.expect_magic(kBlobMagic, "weight blob");
    const std::uint16_t version = in.u16();
    if (version != kBlobVersion)
    {
        throw FormatError("unsupported weight blob version " + std::to_string(version));
    }
    std::vector<BlobRecord> records;
    while (!in.done())
    {
        BlobRecord r;
        r.layer           = in.u16();
        const auto role   = in.u8();
        if (role > static_cast<std::uint8_t>(TensorRole::FcBias))
        {
            throw FormatError("unknown tensor role " + std::to_string(role));
        }
        r.role            = static_cast<TensorRole>(role);
        const auto rank   = in.u8();
        for (int d = 0; d < rank; ++d)
        {
            r.dims.push_back(in.u32());
        }
        const auto dtype = in.u8();
        if (dtype > static_cast<std::uint8_t>(DType::I8))
        {
            throw FormatError("unknown dtype tag " + std::to_string(dtype));
        }
        r.dtype             = static_cast<DType>(dtype);
        const std::size_t n = r.element_count();
        if (r.dtype == DType::F32)
        {
            r.f32.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                r.f32.push_back(in.f32());
            }
        }
        else
        {
            r.i8.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                r.i8.push_back(static_cast<std::int8_t>(in.u8()));
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

// ---- manifests -----------------------------------------------------------

nlohmann::json graph_to_json(const Graph& graph)
{
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerSpec& layer : graph.layers())
    {
        layers.push_back({
            { "kind", std::string(to_string(layer.kind)) },
            { "in_channels", layer.in_channels },
            { "out_channels", layer.out_channels },
            { "kernel", layer.kernel },
            { "stride", layer.stride },
            { "bn", layer.has_bn },
            { "relu", layer.has_relu },
        });
    }
    const Shape3& in = graph.input_shape();
    return { { "input_shape", { in.height, in.width, in.channels } }, { "layers", layers } };
}

Graph graph_from_json(const nlohmann::json& json)
{
    try
    {
        const auto& shape = json.at("input_shape");
        if (!shape.is_array() || shape.size() != 3)
        {
            throw FormatError("input_shape must be [height, width, channels]");
        }
        std::vector<LayerSpec> layers;
        for (const auto& entry : json.at("layers"))
        {
            LayerSpec layer;
            layer.kind         = layer_kind_from_string(entry.at("kind").get<std::string>());
            layer.in_channels  = entry.at("in_channels").get<int>();
            layer.out_channels = entry.at("out_channels").get<int>();
            layer.kernel       = entry.value("kernel", 1);
            layer.stride       = entry.value("stride", 1);
            layer.has_bn       = entry.value("bn", false);
            layer.has_relu     = entry.value("relu", false);
            layers.push_back(layer);
        }
        return Graph({ shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>() }, std::move(layers));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FormatError(std::string("malformed model manifest: ") + e.what());
    }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& manifest)
{
    bundle.validate();
    std::vector<BlobRecord> records;
    for (const auto& [layer, w] : bundle.weights)
    {
        records.push_back({ static_cast<std::uint16_t>(layer), TensorRole::Weight, w.dims, DType::F32, w.values, {} });
    }
    for (const auto& [layer, bn] : bundle.bn)
    {
        const std::vector<std::uint32_t> dims{ static_cast<std::uint32_t>(bn.scale.size()) };
        records.push_back({ static_cast<std::uint16_t>(layer), TensorRole::BnScale, dims, DType::F32, bn.scale, {} });
        records.push_back({ static_cast<std::uint16_t>(layer), TensorRole::BnBias, dims, DType::F32, bn.bias, {} });
    }
    for (const auto& [layer, b] : bundle.fc_bias)
    {
        records.push_back({ static_cast<std::uint16_t>(layer), TensorRole::FcBias, b.dims, DType::F32, b.values, {} });
    }

    const auto blob = blob_path_for(manifest);
    nlohmann::json json = graph_to_json(bundle.graph);
    json["format"]      = "fixynn-model";
    json["version"]     = 1;
    json["weights"]     = blob.filename().string();
    write_text_file(manifest, json.dump(2) + "\n");
    write_file_bytes(blob, encode_blob(records));
}

ModelBundle load_bundle(const std::filesystem::path& manifest)
{
    const nlohmann::json json = read_json_file(manifest);
    ModelBundle bundle{ graph_from_json(json), {}, {}, {} };
    const std::string blob_name = json.value("weights", blob_path_for(manifest).filename().string());
    const auto records          = decode_blob(read_file_bytes(manifest.parent_path() / blob_name));
    for (const BlobRecord& r : records)
    {
        if (r.dtype != DType::F32)
        {
            throw FormatError("real-valued model expects f32 tensors; use the frozen-model loader for int8 blobs");
        }
        switch (r.role)
        {
            case TensorRole::Weight:
                bundle.weights[r.layer] = { r.dims, r.f32 };
                break;
            case TensorRole::BnScale:
                bundle.bn[r.layer].scale = r.f32;
                break;
            case TensorRole::BnBias:
                bundle.bn[r.layer].bias = r.f32;
                break;
            case TensorRole::FcBias:
                bundle.fc_bias[r.layer] = { r.dims, r.f32 };
                break;
        }
    }
    bundle.validate();
    return bundle;
}

// ---- tensor files --------------------------------------------------------

std::vector<std::uint8_t> encode_tensor_file(const TensorFile& tensor)
{
    if (tensor.values.size() != product(tensor.dims))
    {
        throw ConfigError("tensor payload does not match its dims");
    }
    if (tensor.scale_exponent < -128 || tensor.scale_exponent > 127)
    {
        throw ConfigError("scale exponent does not fit in 8 bits");
    }
    ByteWriter out;
    out.magic(kTensorMagic);
    out.u8(static_cast<std::uint8_t>(tensor.dims.size()));
    for (auto d : tensor.dims)
    {
        out.u32(d);
    }
    out.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(tensor.scale_exponent)));
    for (auto v : tensor.values)
    {
        out.u8(static_cast<std::uint8_t>(v));
    }
    return out.take();
}

TensorFile decode_tensor_file(std::span<const std::uint8_t> bytes)
{
    ByteReader in(bytes);
    in.expect_magic(kTensorMagic, "tensor file");
    TensorFile t;
    const auto rank = in.u8();
    for (int d = 0; d < rank; ++d)
    {
        t.dims.push_back(in.u32());
    }
    t.scale_exponent    = static_cast<std::int8_t>(in.u8());
    const std::size_t n = product(t.dims);
    t.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        t.values.push_back(static_cast<std::int8_t>(in.u8()));
    }
    if (!in.done())
    {
        throw FormatError("trailing bytes after tensor payload");
    }
    return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw FormatError("cannot open " + path.string());
    }
    return { std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>() };
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw ConfigError("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
    {
        throw ConfigError("write failed for " + path.string());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
    if (!out)
    {
        throw ConfigError("write failed for " + path.string());
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw FormatError("cannot open " + path.string());
    }
    try
    {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}    // namespace fixynn
