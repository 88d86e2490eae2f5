#pragma once

#include <aigif/bitstream.hpp>
#include <aigif/error.hpp>
#include <aigif/registry.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace aigif {

using Bytes = std::vector<std::uint8_t>;

struct CompressionOptions {
    bool saving_pixels = false;
    std::uint8_t pixel_compressor = codes::kNone;
    std::uint8_t text_compressor = codes::kZlib;
    bool saving_model = false;
    std::uint8_t model_compressor = codes::kNone;

    bool operator==(const CompressionOptions&) const = default;
};

/// Tag-length-value extension record. Unknown tags are carried opaque.
struct TlvRecord {
    std::uint8_t tag = 0;
    Bytes value;

    bool operator==(const TlvRecord&) const = default;
};

inline constexpr std::size_t kMaxTlvValue = 0xFFFF;
inline constexpr std::size_t kMaxTlvCount = 0xFF;

struct PlatformConfig {
    std::uint8_t device = codes::kCpu;
    std::uint8_t gpu = 0;
    std::uint8_t cuda = 0;
    std::vector<TlvRecord> extras;

    bool operator==(const PlatformConfig&) const = default;
};

/// A schema field value. code4/u16/u32 use the integer alternative.
using FieldValue = std::variant<std::uint32_t, float, std::string>;

struct ModelConfig {
    ExpCodeValue model_id = 0;
    std::uint8_t data_type = 0;
    std::vector<FieldValue> fields; // model-section schema fields, in order

    bool operator==(const ModelConfig&) const = default;
};

struct DataConfig {
    std::string prompt;
    std::string negative_prompt;
    std::uint32_t height = 1;
    std::uint32_t width = 1;
    std::uint32_t seed = 0;
    std::vector<FieldValue> fields; // data-section schema fields, in order

    bool operator==(const DataConfig&) const = default;
};

struct GenerationManifest {
    CompressionOptions options;
    PlatformConfig platform;
    ModelConfig model;
    DataConfig data;
    std::vector<TlvRecord> extensions;
    std::optional<Bytes> pixel_payload;
    std::optional<Bytes> model_payload;

    bool operator==(const GenerationManifest&) const = default;
};

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

// ---------------------------------------------------------------------------
// Schema-field access

inline const FieldValue* find_field(const GenerationManifest& m, const RegistrySet& reg, std::string_view name) {
    const ModelSchema schema = reg.schema_for(m.model.model_id);
    std::size_t mi = 0, di = 0;
    for (const auto& f : schema.fields) {
        const auto& values = f.section == FieldSection::model ? m.model.fields : m.data.fields;
        std::size_t& idx = f.section == FieldSection::model ? mi : di;
        if (f.name == name) return idx < values.size() ? &values[idx] : nullptr;
        ++idx;
    }
    return nullptr;
}

inline bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t n = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            n = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            n = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            n = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + n >= s.size()) return false;
        for (std::size_t k = 1; k <= n; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((n == 1 && cp < 0x80) || (n == 2 && cp < 0x800) || (n == 3 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += n + 1;
    }
    return true;
}

/// Checks one schema field value against its declared wire type and domain.
inline void validate_field_value(const SchemaField& f, const FieldValue& v, const RegistrySet& reg) {
    const auto mismatch = [&](const char* want) {
        return Error(Errc::schema_mismatch, "field '" + f.name + "' expects " + want, f.name);
    };
    switch (f.type) {
    case WireType::code4:
    case WireType::u16:
    case WireType::u32: {
        const auto* n = std::get_if<std::uint32_t>(&v);
        if (!n) throw mismatch("an integer");
        if (f.type == WireType::code4 && *n > 15) {
            throw Error(Errc::encoding, "field '" + f.name + "' value " + std::to_string(*n) + " exceeds 4 bits",
                        f.name, std::nullopt, *n);
        }
        if (f.type == WireType::u16 && *n > 0xFFFF) {
            throw Error(Errc::encoding, "field '" + f.name + "' value " + std::to_string(*n) + " exceeds 16 bits",
                        f.name, std::nullopt, *n);
        }
        if (f.name == "scheduler") reg.name_of(Table::scheduler, *n);
        if (f.name == "diffusion_steps" && *n == 0) {
            throw Error(Errc::invalid_value, "diffusion_steps must be at least 1", f.name);
        }
        break;
    }
    case WireType::f32: {
        const auto* x = std::get_if<float>(&v);
        if (!x) throw mismatch("a 32-bit float");
        if (!std::isfinite(*x)) throw Error(Errc::invalid_value, "field '" + f.name + "' is not finite", f.name);
        break;
    }
    case WireType::string: {
        const auto* s = std::get_if<std::string>(&v);
        if (!s) throw mismatch("a string");
        if (!valid_utf8(*s)) throw Error(Errc::invalid_value, "field '" + f.name + "' is not valid UTF-8", f.name);
        break;
    }
    }
}

inline void validate_tlvs(const std::vector<TlvRecord>& records, const std::string& where) {
    if (records.size() > kMaxTlvCount) {
        throw Error(Errc::encoding, where + ": more than 255 TLV records", where);
    }
    for (const auto& r : records) {
        if (r.value.size() > kMaxTlvValue) {
            throw Error(Errc::encoding, where + ": TLV value longer than 65535 bytes", where);
        }
    }
}

/// Checks a payload's leading bytes against its declared pixel compressor.
inline void check_pixel_payload(const Bytes& payload, std::uint8_t compressor, std::uint32_t height,
                                std::uint32_t width) {
    if (compressor == codes::kPng) {
        if (payload.size() < kPngSignature.size() ||
            !std::equal(kPngSignature.begin(), kPngSignature.end(), payload.begin())) {
            throw Error(Errc::consistency, "pixel payload does not start with a PNG signature", "pixel payload");
        }
    } else if (compressor == codes::kNone) {
        const std::uint64_t expected = std::uint64_t{height} * width * 3;
        if (payload.size() != expected) {
            throw Error(Errc::consistency,
                        "raw pixel payload is " + std::to_string(payload.size()) + " bytes, expected " +
                            std::to_string(expected),
                        "pixel payload");
        }
    }
}

/// Full manifest validation against a registry: codes, schema, flags.
inline void validate(const GenerationManifest& m, const RegistrySet& reg) {
    const auto& o = m.options;
    reg.name_of(Table::pixel_compressor, o.pixel_compressor);
    reg.name_of(Table::text_compressor, o.text_compressor);
    reg.name_of(Table::model_compressor, o.model_compressor);
    if (o.saving_pixels != m.pixel_payload.has_value()) {
        throw Error(Errc::consistency,
                    o.saving_pixels ? "saving_pixels is set but no pixel payload is present"
                                    : "pixel payload present but saving_pixels is not set",
                    "pixel payload");
    }
    if (o.saving_model != m.model_payload.has_value()) {
        throw Error(Errc::consistency,
                    o.saving_model ? "saving_model is set but no model payload is present"
                                   : "model payload present but saving_model is not set",
                    "model payload");
    }

    const auto& p = m.platform;
    reg.name_of(Table::device, p.device);
    if (p.device == codes::kCpu && (p.gpu != 0 || p.cuda != 0)) {
        throw Error(Errc::consistency, "CPU platform must carry gpu and cuda code 0", "gpu");
    }
    reg.name_of(Table::gpu, p.gpu);
    reg.name_of(Table::cuda, p.cuda);
    validate_tlvs(p.extras, "platform extras");

    const ModelSchema schema = reg.schema_for(m.model.model_id);
    reg.name_of(Table::data_type, m.model.data_type);
    for (FieldSection s : {FieldSection::model, FieldSection::data}) {
        const auto fields = schema.section_fields(s);
        const auto& values = s == FieldSection::model ? m.model.fields : m.data.fields;
        if (fields.size() != values.size()) {
            throw Error(Errc::schema_mismatch,
                        std::string(s == FieldSection::model ? "model" : "data") + " section has " +
                            std::to_string(values.size()) + " schema values, schema for model " +
                            std::to_string(m.model.model_id) + " declares " + std::to_string(fields.size()),
                        s == FieldSection::model ? "model fields" : "data fields");
        }
        for (std::size_t i = 0; i < fields.size(); ++i) validate_field_value(fields[i], values[i], reg);
    }

    if (m.data.height == 0 || m.data.width == 0) {
        throw Error(Errc::invalid_value, "height and width must be at least 1", m.data.height == 0 ? "height" : "width");
    }
    if (!valid_utf8(m.data.prompt)) throw Error(Errc::invalid_value, "prompt is not valid UTF-8", "prompt");
    if (!valid_utf8(m.data.negative_prompt)) {
        throw Error(Errc::invalid_value, "negative prompt is not valid UTF-8", "negative prompt");
    }
    validate_tlvs(m.extensions, "data extensions");
    if (m.pixel_payload) check_pixel_payload(*m.pixel_payload, o.pixel_compressor, m.data.height, m.data.width);
    if (m.pixel_payload && m.pixel_payload->size() > 0xFFFFFFFFu) {
        throw Error(Errc::encoding, "pixel payload exceeds 4 GiB", "pixel payload");
    }
    if (m.model_payload && m.model_payload->size() > 0xFFFFFFFFu) {
        throw Error(Errc::encoding, "model payload exceeds 4 GiB", "model payload");
    }
}

} // namespace aigif
