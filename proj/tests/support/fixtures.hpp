#pragma once

#include <aigif/aigif.hpp>

#include "oracles.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

using aigif::FieldSection;
using aigif::SchemaField;
using aigif::WireType;

/// The reference example: SD1.5 on a GTX 1080 Ti, DDIM, 25 steps, w = 7.5.
inline aigif::GenerationManifest cat_manifest() {
    aigif::GenerationManifest m;
    m.options = {false, aigif::codes::kPng, aigif::codes::kZlib, false, aigif::codes::kNone};
    m.platform = {aigif::codes::kGpu, 1, 1, {}};
    m.model = {0, 0, {std::uint32_t{0}}};
    m.data.prompt = "A cute cat";
    m.data.negative_prompt = "worst quality";
    m.data.height = 1024;
    m.data.width = 1024;
    m.data.seed = 829557441;
    m.data.fields = {std::uint32_t{25}, 7.5f};
    return m;
}

inline constexpr std::uint64_t kWideModel = 300;   // 2-byte exp code
inline constexpr std::uint64_t kPaddedModel = 600; // 3-byte exp code
inline constexpr std::uint64_t kPlainModel = 255;  // 2 bytes, standard schema

/// Built-in registry plus models exercising multi-byte IDs and every wire type.
inline aigif::RegistrySet test_registry() {
    static const aigif::RegistrySet reg = [] {
        const std::vector<aigif::RegistryAddition> add = {
            {aigif::Table::model, kPlainModel, "plain-255"},
            {aigif::Table::model, kWideModel, "wide-300"},
            {aigif::Table::model, kPaddedModel, "padded-600"},
            {aigif::Table::pixel_compressor, 15, "jxl"},
            {aigif::Table::model_compressor, 15, "custom-quant"},
            {aigif::Table::device, 15, "TPU"},
            {aigif::Table::gpu, 254, "LastGpu"},
            {aigif::Table::cuda, 254, "cu999"},
            {aigif::Table::data_type, 15, "bfloat16"},
            {aigif::Table::scheduler, 15, "Euler"},
        };
        auto r = aigif::extend_registry(aigif::builtin_registry(), add);
        const std::vector<SchemaField> wide = {
            {"scheduler", WireType::code4, FieldSection::model},
            {"variant", WireType::code4, FieldSection::model},
            {"clip_skip", WireType::u32, FieldSection::model},
            {"vae", WireType::string, FieldSection::model},
            {"diffusion_steps", WireType::u16, FieldSection::data},
            {"lora", WireType::string, FieldSection::data},
            {"guidance_scale", WireType::f32, FieldSection::data},
            {"tile", WireType::code4, FieldSection::data},
        };
        const std::vector<SchemaField> padded = {
            {"clip_skip", WireType::u16, FieldSection::model},
            {"scheduler", WireType::code4, FieldSection::model},
            {"style", WireType::string, FieldSection::model},
            {"strength", WireType::f32, FieldSection::data},
        };
        r = aigif::extend_schema(r, kWideModel, wide);
        r = aigif::extend_schema(r, kPaddedModel, padded);
        return r;
    }();
    return reg;
}

class ManifestGenerator {
public:
    explicit ManifestGenerator(std::uint64_t seed, aigif::RegistrySet reg = test_registry())
        : rng_(seed), reg_(std::move(reg)) {}

    const aigif::RegistrySet& registry() const { return reg_; }

    aigif::GenerationManifest next() {
        aigif::GenerationManifest m;
        m.options.text_compressor = static_cast<std::uint8_t>(pick({0, 1}));
        m.options.pixel_compressor = static_cast<std::uint8_t>(pick(codes(aigif::Table::pixel_compressor)));
        m.options.model_compressor = static_cast<std::uint8_t>(pick(codes(aigif::Table::model_compressor)));
        m.options.saving_pixels = coin();
        m.options.saving_model = coin();

        m.platform.device = static_cast<std::uint8_t>(pick(codes(aigif::Table::device)));
        if (m.platform.device != aigif::codes::kCpu) {
            m.platform.gpu = static_cast<std::uint8_t>(pick(codes(aigif::Table::gpu)));
            m.platform.cuda = static_cast<std::uint8_t>(pick(codes(aigif::Table::cuda)));
        }
        m.platform.extras = tlvs();

        m.model.model_id = pick(codes(aigif::Table::model));
        m.model.data_type = static_cast<std::uint8_t>(pick(codes(aigif::Table::data_type)));
        const auto schema = reg_.schema_for(m.model.model_id);
        for (const auto& f : schema.fields) {
            auto& dst = f.section == FieldSection::model ? m.model.fields : m.data.fields;
            dst.push_back(value_for(f));
        }

        m.data.prompt = text();
        m.data.negative_prompt = text();
        const bool raw_pixels = m.options.saving_pixels && m.options.pixel_compressor == aigif::codes::kNone;
        m.data.height = raw_pixels ? uniform(1, 12) : dimension();
        m.data.width = raw_pixels ? uniform(1, 12) : dimension();
        m.data.seed = static_cast<std::uint32_t>(rng_());
        m.extensions = tlvs();

        if (m.options.saving_pixels) {
            aigif::Bytes px;
            if (m.options.pixel_compressor == aigif::codes::kNone) {
                px = bytes(std::size_t{m.data.height} * m.data.width * 3);
            } else {
                px = bytes(uniform(0, 200));
                if (m.options.pixel_compressor == aigif::codes::kPng) {
                    px.insert(px.begin(), aigif::kPngSignature.begin(), aigif::kPngSignature.end());
                }
            }
            m.pixel_payload = std::move(px);
        }
        if (m.options.saving_model) m.model_payload = bytes(uniform(0, 300));
        return m;
    }

    std::uint32_t uniform(std::uint32_t lo, std::uint32_t hi) {
        return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng_);
    }
    bool coin() { return uniform(0, 1) == 1; }

    aigif::Bytes bytes(std::size_t n) {
        aigif::Bytes b(n);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng_());
        return b;
    }

    std::string text() {
        static const std::vector<std::string> pieces = {"a", "cat", " ", "masterpiece", ", ", "é", "猫", "🙂",
                                                        "8k", "worst quality", "\n", "\"q\""};
        const auto len = uniform(0, 3) == 0 ? 0 : uniform(1, 30);
        std::string s;
        for (std::uint32_t i = 0; i < len; ++i) s += pieces[uniform(0, static_cast<std::uint32_t>(pieces.size() - 1))];
        return s;
    }

private:
    std::vector<std::uint64_t> codes(aigif::Table t) const {
        std::vector<std::uint64_t> out;
        for (const auto& [c, n] : reg_.table(t).entries()) out.push_back(c);
        return out;
    }

    std::uint64_t pick(const std::vector<std::uint64_t>& from) {
        return from[uniform(0, static_cast<std::uint32_t>(from.size() - 1))];
    }

    std::uint32_t dimension() {
        switch (uniform(0, 3)) {
        case 0: return 1;
        case 1: return 0xFFFFFFFFu;
        default: return uniform(1, 4096);
        }
    }

    std::vector<aigif::TlvRecord> tlvs() {
        std::vector<aigif::TlvRecord> out(uniform(0, 8));
        for (auto& r : out) {
            r.tag = static_cast<std::uint8_t>(uniform(0, 255));
            r.value = bytes(uniform(0, 3) == 0 ? 0 : uniform(1, 40));
        }
        return out;
    }

    aigif::FieldValue value_for(const SchemaField& f) {
        switch (f.type) {
        case WireType::code4:
            if (f.name == "scheduler") return static_cast<std::uint32_t>(pick(codes(aigif::Table::scheduler)));
            return uniform(0, 15);
        case WireType::u16: return f.name == "diffusion_steps" ? uniform(1, 0xFFFF) : uniform(0, 0xFFFF);
        case WireType::u32: return static_cast<std::uint32_t>(rng_());
        case WireType::f32: return std::uniform_real_distribution<float>(-100.0f, 100.0f)(rng_);
        case WireType::string: return text();
        }
        return std::uint32_t{0};
    }

    std::mt19937_64 rng_;
    aigif::RegistrySet reg_;
};

/// Layout oracle input for a manifest, using only the registry's schema.
inline oracle::LayoutInput layout_of(const aigif::GenerationManifest& m, const aigif::RegistrySet& reg) {
    oracle::LayoutInput in;
    in.model_id_bytes = oracle::exp_encode(m.model.model_id).size();
    const auto schema = reg.schema_for(m.model.model_id);
    std::vector<std::string> strings{m.data.prompt, m.data.negative_prompt};
    std::size_t mi = 0, di = 0;
    bool first_model = true;
    for (const auto& f : schema.fields) {
        const bool is_model = f.section == FieldSection::model;
        const auto& values = is_model ? m.model.fields : m.data.fields;
        const auto& v = values[is_model ? mi++ : di++];
        int bits = 0;
        switch (f.type) {
        case WireType::code4: bits = 4; break;
        case WireType::u16: bits = 16; break;
        case WireType::u32:
        case WireType::f32: bits = 32; break;
        case WireType::string: strings.push_back(std::get<std::string>(v)); break;
        }
        if (is_model) {
            if (first_model) in.first_model_field_is_code4 = f.type == WireType::code4;
            first_model = false;
        }
        if (bits) (is_model ? in.model_field_bits : in.data_field_bits).push_back(bits);
    }
    for (const auto& r : m.platform.extras) in.platform_tlv_lengths.push_back(r.value.size());
    for (const auto& r : m.extensions) in.data_tlv_lengths.push_back(r.value.size());
    const auto table = oracle::string_table(strings);
    in.string_block_bytes = m.options.text_compressor == 0 ? table.size() : oracle::zlib_deflate(table).size();
    if (m.model_payload) in.model_payload = m.model_payload->size();
    if (m.pixel_payload) in.pixel_payload = m.pixel_payload->size();
    return in;
}

} // namespace fixtures
