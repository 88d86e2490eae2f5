#pragma once

#include <aigif/bitstream.hpp>
#include <aigif/error.hpp>
#include <aigif/manifest.hpp>
#include <aigif/registry.hpp>
#include <aigif/string_block.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

namespace aigif {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'A', 'I', 'G', 'F'};
inline constexpr std::uint8_t kFormatVersion = 1;

/// One decoded field, recorded by `decode` when a trace sink is supplied.
/// Offsets are in bits from the start of the file, or from the start of the
/// decompressed string table when `in_string_table` is set.
struct TraceEntry {
    std::string section;
    std::string field;
    std::size_t bit_offset = 0;
    std::size_t bit_width = 0;
    std::string raw;
    std::string resolved;
    bool in_string_table = false;
};

using Trace = std::vector<TraceEntry>;

namespace detail {

inline std::string hex(std::span<const std::uint8_t> bytes, std::size_t max = 32) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < bytes.size() && i < max; ++i) {
        if (i) s += ' ';
        s += digits[bytes[i] >> 4];
        s += digits[bytes[i] & 0xF];
    }
    if (bytes.size() > max) s += " ...";
    return s;
}

inline std::string quote_text(std::string_view s, std::size_t max = 80) {
    std::string out = "\"";
    for (std::size_t i = 0; i < s.size() && i < max; ++i) {
        const char c = s[i];
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02x", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    if (s.size() > max) out += "...";
    return out + "\"";
}

inline std::string format_float(float v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
    return buf;
}

inline void write_tlvs(BitWriter& w, const std::vector<TlvRecord>& records) {
    w.write_u8(static_cast<std::uint8_t>(records.size()));
    for (const auto& r : records) {
        w.write_u8(r.tag);
        w.write_u16(static_cast<std::uint16_t>(r.value.size()));
        w.write_bytes(r.value);
    }
}

inline void write_field(BitWriter& w, const SchemaField& f, const FieldValue& v) {
    switch (f.type) {
    case WireType::code4: w.write_bits(std::get<std::uint32_t>(v), 4); break;
    case WireType::u16: w.write_bits(std::get<std::uint32_t>(v), 16); break;
    case WireType::u32: w.write_u32(std::get<std::uint32_t>(v)); break;
    case WireType::f32: w.write_f32(std::get<float>(v)); break;
    case WireType::string: break;
    }
}

/// Decoder state: reader, registry and optional trace sink.
class Decoder {
public:
    Decoder(std::span<const std::uint8_t> bytes, const RegistrySet& reg, Trace* trace)
        : r_(bytes), reg_(reg), trace_(trace) {}

    GenerationManifest run();

private:
    std::uint32_t bits(unsigned width, const char* field) {
        const std::size_t at = r_.bit_position();
        const std::uint32_t v = r_.read_bits(width, field);
        last_offset_ = at;
        return v;
    }

    void note(const std::string& field, std::size_t at, std::size_t width, std::string raw, std::string resolved = {}) {
        if (trace_) trace_->push_back({section_, field, at, width, std::move(raw), std::move(resolved), false});
    }

    std::uint32_t traced_bits(unsigned width, const char* field) {
        const std::uint32_t v = bits(width, field);
        note(field, last_offset_, width, std::to_string(v));
        return v;
    }

    /// Reads a code and resolves it through a registry table.
    std::uint32_t code(unsigned width, const char* field, Table table) {
        const std::uint32_t v = bits(width, field);
        note(field, last_offset_, width, std::to_string(v), resolve(table, v, last_offset_));
        return v;
    }

    std::string resolve(Table table, ExpCodeValue v, std::size_t bit_at) {
        try {
            return reg_.name_of(table, v);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " at byte " + std::to_string(bit_at / 8), e.field(),
                        bit_at / 8, v);
        }
    }

    void zero_padding(const char* where) {
        const std::size_t at = r_.bit_position();
        if (r_.align() != 0) {
            throw Error(Errc::invalid_value, std::string("nonzero padding bits in ") + where, where, at / 8);
        }
    }

    std::vector<TlvRecord> tlvs(const std::string& what) {
        const std::size_t at = r_.bit_position();
        const std::uint8_t count = r_.read_u8(what + " count");
        note(what + " count", at, 8, std::to_string(count));
        std::vector<TlvRecord> out;
        for (std::uint8_t i = 0; i < count; ++i) {
            const std::string name = what + "[" + std::to_string(i) + "]";
            const std::size_t rec_at = r_.bit_position();
            TlvRecord rec;
            rec.tag = r_.read_u8(name + " tag");
            const std::uint16_t len = r_.read_u16(name + " length");
            auto value = r_.read_bytes(len, name + " value");
            rec.value.assign(value.begin(), value.end());
            note(name, rec_at, r_.bit_position() - rec_at,
                 "tag " + std::to_string(rec.tag) + " len " + std::to_string(len),
                 tlv_tag_name(rec.tag) + (len ? ": " + hex(rec.value) : std::string()));
            out.push_back(std::move(rec));
        }
        return out;
    }

    static std::string tlv_tag_name(std::uint8_t tag);

    FieldValue schema_value(const SchemaField& f) {
        const std::size_t at = r_.bit_position();
        switch (f.type) {
        case WireType::code4: {
            const std::uint32_t v = r_.read_bits(4, f.name);
            note(f.name, at, 4, std::to_string(v), f.name == "scheduler" ? resolve(Table::scheduler, v, at) : "");
            return v;
        }
        case WireType::u16:
        case WireType::u32: {
            const std::uint32_t v = r_.read_bits(wire_bits(f.type), f.name);
            note(f.name, at, wire_bits(f.type), std::to_string(v));
            return v;
        }
        case WireType::f32: {
            const float v = r_.read_f32(f.name);
            note(f.name, at, 32, "0x" + hex_u32(std::bit_cast<std::uint32_t>(v)), format_float(v));
            return v;
        }
        case WireType::string: break;
        }
        return std::string();
    }

    static std::string hex_u32(std::uint32_t v) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%08x", v);
        return buf;
    }

    Bytes payload(const std::string& name) {
        const std::size_t at = r_.bit_position();
        const std::uint32_t len = r_.read_u32(name + " length");
        auto bytes = r_.read_bytes(len, name);
        note(name, at, r_.bit_position() - at, std::to_string(len) + " bytes", hex(bytes, 16));
        return Bytes(bytes.begin(), bytes.end());
    }

    BitReader r_;
    const RegistrySet& reg_;
    Trace* trace_;
    std::string section_;
    std::size_t last_offset_ = 0;
};

inline std::string Decoder::tlv_tag_name(std::uint8_t tag) {
    switch (tag) {
    case 0x01: return "software";
    case 0x02: return "library-version";
    case 0x03: return "comment";
    default: return "unknown";
    }
}

inline GenerationManifest Decoder::run() {
    GenerationManifest m;

    section_ = "header";
    {
        const std::size_t avail = std::min(r_.bytes_remaining(), kMagic.size());
        auto head = r_.read_bytes(avail, "magic");
        if (!std::equal(head.begin(), head.end(), kMagic.begin())) {
            throw Error(Errc::bad_magic, "bad magic " + hex(head) + ", expected 41 49 47 46 (\"AIGF\")", "magic", 0);
        }
        if (avail < kMagic.size()) throw r_.truncation("magic", "4-byte field");
        note("magic", 0, 32, hex(head), "\"AIGF\"");
        const std::uint8_t version = r_.read_u8("version");
        if (version != kFormatVersion) {
            throw Error(Errc::unsupported_version, "unsupported format version " + std::to_string(version), "version",
                        4, version);
        }
        note("version", 32, 8, std::to_string(version));
    }

    section_ = "options";
    {
        auto& o = m.options;
        const std::size_t at = r_.bit_position();
        o.saving_pixels = bits(1, "saving pixels") != 0;
        note("saving pixels", at, 1, std::to_string(o.saving_pixels), o.saving_pixels ? "Yes" : "No");
        o.pixel_compressor = static_cast<std::uint8_t>(code(4, "pixel compressor", Table::pixel_compressor));
        o.text_compressor = static_cast<std::uint8_t>(code(4, "text compressor", Table::text_compressor));
        const std::size_t at2 = r_.bit_position();
        o.saving_model = bits(1, "saving model") != 0;
        note("saving model", at2, 1, std::to_string(o.saving_model), o.saving_model ? "Yes" : "No");
        o.model_compressor = static_cast<std::uint8_t>(code(4, "model compressor", Table::model_compressor));
        zero_padding("options");
    }

    section_ = "platform";
    {
        auto& p = m.platform;
        p.device = static_cast<std::uint8_t>(code(4, "device", Table::device));
        zero_padding("platform");
        const std::size_t gpu_at = r_.bit_position();
        p.gpu = static_cast<std::uint8_t>(code(8, "gpu", Table::gpu));
        p.cuda = static_cast<std::uint8_t>(code(8, "cuda", Table::cuda));
        if (p.device == codes::kCpu && (p.gpu != 0 || p.cuda != 0)) {
            throw Error(Errc::consistency, "CPU platform carries nonzero gpu/cuda code", "gpu", gpu_at / 8);
        }
        p.extras = tlvs("platform extras");
    }

    section_ = "model";
    ModelSchema schema;
    {
        auto& mc = m.model;
        const std::size_t at = r_.bit_position();
        mc.model_id = decode_exp_code(r_, "model ID");
        const std::size_t width = r_.bit_position() - at;
        note("model ID", at, width, std::to_string(mc.model_id), resolve(Table::model, mc.model_id, at));
        schema = reg_.schema_for(mc.model_id);
        mc.data_type = static_cast<std::uint8_t>(code(4, "data type", Table::data_type));
        const auto fields = schema.section_fields(FieldSection::model);
        std::size_t first = 0;
        if (!fields.empty() && fields.front().type == WireType::code4) {
            mc.fields.push_back(schema_value(fields.front()));
            first = 1;
        } else {
            zero_padding("model");
        }
        for (std::size_t i = first; i < fields.size(); ++i) {
            if (fields[i].type != WireType::string) mc.fields.push_back(schema_value(fields[i]));
        }
        zero_padding("model");
    }

    section_ = "data";
    const auto data_fields = schema.section_fields(FieldSection::data);
    {
        auto& d = m.data;
        d.height = traced_bits(32, "height");
        d.width = traced_bits(32, "width");
        d.seed = traced_bits(32, "seed");
        for (const auto& f : data_fields) {
            if (f.type != WireType::string) d.fields.push_back(schema_value(f));
        }
        zero_padding("data");
        m.extensions = tlvs("data extensions");
    }

    section_ = "strings";
    {
        const std::size_t at = r_.bit_position();
        const std::uint32_t len = r_.read_u32("string block length");
        auto block = r_.read_bytes(len, "string block");
        note("string block", at, r_.bit_position() - at, std::to_string(len) + " bytes",
             reg_.name_of(Table::text_compressor, m.options.text_compressor));
        auto strings = decompress_string_block(block, m.options.text_compressor);

        std::size_t expected = 2;
        for (const auto& f : schema.fields) expected += f.type == WireType::string;
        if (strings.size() != expected) {
            throw Error(Errc::schema_mismatch,
                        "string block holds " + std::to_string(strings.size()) + " strings, schema expects " +
                            std::to_string(expected),
                        "string block", at / 8);
        }
        if (trace_) {
            std::size_t off = 16;
            const auto name_of = [&](std::size_t i) -> std::string {
                if (i == 0) return "prompt";
                if (i == 1) return "negative prompt";
                std::size_t k = 2;
                for (const auto& f : schema.fields) {
                    if (f.type == WireType::string && k++ == i) return f.name;
                }
                return "string " + std::to_string(i);
            };
            for (std::size_t i = 0; i < strings.size(); ++i) {
                trace_->push_back({section_, name_of(i), off, 32 + strings[i].size() * 8,
                                   std::to_string(strings[i].size()) + " bytes", quote_text(strings[i]), true});
                off += 32 + strings[i].size() * 8;
            }
        }

        m.data.prompt = std::move(strings[0]);
        m.data.negative_prompt = std::move(strings[1]);
        std::size_t next = 2, mi = 0, di = 0;
        for (const auto& f : schema.fields) {
            auto& values = f.section == FieldSection::model ? m.model.fields : m.data.fields;
            std::size_t& idx = f.section == FieldSection::model ? mi : di;
            if (f.type == WireType::string) {
                values.insert(values.begin() + static_cast<std::ptrdiff_t>(idx), std::move(strings[next++]));
            }
            ++idx;
        }
    }

    section_ = "payloads";
    if (m.options.saving_model) m.model_payload = payload("model payload");
    if (m.options.saving_pixels) m.pixel_payload = payload("pixel payload");

    if (!r_.at_end()) {
        throw Error(Errc::trailing_data,
                    std::to_string(r_.bytes_remaining()) + " trailing bytes after last section at byte " +
                        std::to_string(r_.byte_position()),
                    "trailing data", r_.byte_position());
    }

    validate(m, reg_);
    return m;
}

} // namespace detail

/// Strings in string-block order: prompt, negative prompt, then schema
/// string fields in schema order.
inline std::vector<std::string> collect_strings(const GenerationManifest& m, const ModelSchema& schema) {
    std::vector<std::string> out{m.data.prompt, m.data.negative_prompt};
    std::size_t mi = 0, di = 0;
    for (const auto& f : schema.fields) {
        const auto& values = f.section == FieldSection::model ? m.model.fields : m.data.fields;
        std::size_t& idx = f.section == FieldSection::model ? mi : di;
        if (f.type == WireType::string) out.push_back(std::get<std::string>(values[idx]));
        ++idx;
    }
    return out;
}

/// Serializes a manifest. The output is canonical: equal manifests give
/// identical bytes.
inline Bytes encode(const GenerationManifest& m, const RegistrySet& reg) {
    validate(m, reg);
    const ModelSchema schema = reg.schema_for(m.model.model_id);
    BitWriter w;

    w.write_bytes(kMagic);
    w.write_u8(kFormatVersion);

    const auto& o = m.options;
    w.write_bits(o.saving_pixels ? 1 : 0, 1);
    w.write_bits(o.pixel_compressor, 4);
    w.write_bits(o.text_compressor, 4);
    w.write_bits(o.saving_model ? 1 : 0, 1);
    w.write_bits(o.model_compressor, 4);
    w.align();

    const auto& p = m.platform;
    w.write_bits(p.device, 4);
    w.align();
    w.write_u8(p.gpu);
    w.write_u8(p.cuda);
    detail::write_tlvs(w, p.extras);

    write_exp_code(w, m.model.model_id);
    w.write_bits(m.model.data_type, 4);
    {
        const auto fields = schema.section_fields(FieldSection::model);
        std::size_t first = 0;
        if (!fields.empty() && fields.front().type == WireType::code4) {
            detail::write_field(w, fields.front(), m.model.fields.front());
            first = 1;
        } else {
            w.align();
        }
        for (std::size_t i = first; i < fields.size(); ++i) detail::write_field(w, fields[i], m.model.fields[i]);
        w.align();
    }

    w.write_u32(m.data.height);
    w.write_u32(m.data.width);
    w.write_u32(m.data.seed);
    {
        const auto fields = schema.section_fields(FieldSection::data);
        for (std::size_t i = 0; i < fields.size(); ++i) detail::write_field(w, fields[i], m.data.fields[i]);
        w.align();
    }
    detail::write_tlvs(w, m.extensions);

    const Bytes block = compress_string_block(collect_strings(m, schema), o.text_compressor);
    if (block.size() > 0xFFFFFFFFu) throw Error(Errc::encoding, "string block exceeds 4 GiB", "string block");
    w.write_u32(static_cast<std::uint32_t>(block.size()));
    w.write_bytes(block);

    if (m.model_payload) {
        w.write_u32(static_cast<std::uint32_t>(m.model_payload->size()));
        w.write_bytes(*m.model_payload);
    }
    if (m.pixel_payload) {
        w.write_u32(static_cast<std::uint32_t>(m.pixel_payload->size()));
        w.write_bytes(*m.pixel_payload);
    }
    return std::move(w).take();
}

/// Parses and fully validates an AIGIF file. Any input yields either a
/// manifest or an `aigif::Error`.
inline GenerationManifest decode(std::span<const std::uint8_t> bytes, const RegistrySet& reg, Trace* trace = nullptr) {
    return detail::Decoder(bytes, reg, trace).run();
}

struct SizeReport {
    std::size_t encoded_bytes = 0;
    std::uint64_t raw_pixel_bytes = 0;
    double ratio = 0.0; // raw / encoded
};

inline SizeReport size_report(const GenerationManifest& m, const RegistrySet& reg) {
    SizeReport r;
    r.encoded_bytes = encode(m, reg).size();
    r.raw_pixel_bytes = std::uint64_t{m.data.height} * m.data.width * 3;
    r.ratio = static_cast<double>(r.raw_pixel_bytes) / static_cast<double>(r.encoded_bytes);
    return r;
}

} // namespace aigif
