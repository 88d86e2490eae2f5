#pragma once

#include <aigif/error.hpp>
#include <aigif/manifest.hpp>
#include <aigif/registry.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>

namespace aigif {

/// A manifest as carried in JSON. Payload bytes are not inline; the document
/// references external files instead.
struct ManifestDocument {
    GenerationManifest manifest;
    std::optional<std::string> pixel_payload_file;
    std::optional<std::string> model_payload_file;
};

inline constexpr std::string_view kManifestFormatTag = "aigif-manifest";
inline constexpr int kManifestJsonVersion = 1;

namespace json_detail {

using nlohmann::json;

inline Error bad(const std::string& path, const std::string& what) {
    return Error(Errc::parse, "manifest " + path + ": " + what, path);
}

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw bad(path + "." + key, "missing");
    return *it;
}

inline void only_keys(const json& obj, std::initializer_list<std::string_view> keys, const std::string& path) {
    if (!obj.is_object()) throw bad(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (auto k : keys) known = known || it.key() == k;
        if (!known) throw bad(path + "." + it.key(), "unknown key");
    }
}

inline std::uint64_t uint_in(const json& v, std::uint64_t max, const std::string& path) {
    if (!v.is_number_integer()) throw bad(path, "expected a non-negative integer");
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > max) throw bad(path, std::to_string(u) + " exceeds " + std::to_string(max));
        return u;
    }
    const auto s = v.get<std::int64_t>();
    if (s < 0) throw bad(path, "negative value");
    if (static_cast<std::uint64_t>(s) > max) throw bad(path, std::to_string(s) + " exceeds " + std::to_string(max));
    return static_cast<std::uint64_t>(s);
}

inline bool boolean(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw bad(path, "expected true or false");
    return v.get<bool>();
}

inline std::string string(const json& v, const std::string& path) {
    if (!v.is_string()) throw bad(path, "expected a string");
    return v.get<std::string>();
}

inline ExpCodeValue named_code(const json& v, Table t, const RegistrySet& reg, const std::string& path) {
    const std::string name = string(v, path);
    if (!reg.table(t).contains_name(name)) {
        std::string known;
        for (const auto& [code, n] : reg.table(t).entries()) known += (known.empty() ? "" : ", ") + n;
        throw Error(t == Table::model ? Errc::unknown_model : Errc::unknown_code,
                    "manifest " + path + ": unknown " + std::string(table_name(t)) + " '" + name + "' (known: " +
                        known + ")",
                    path);
    }
    return reg.code_of(t, name);
}

inline json tlvs_to_json(const std::vector<TlvRecord>& records) {
    json arr = json::array();
    static constexpr char digits[] = "0123456789abcdef";
    for (const auto& r : records) {
        std::string hex;
        for (auto b : r.value) {
            hex += digits[b >> 4];
            hex += digits[b & 0xF];
        }
        arr.push_back({{"tag", r.tag}, {"hex", hex}});
    }
    return arr;
}

inline std::vector<TlvRecord> tlvs_from_json(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw bad(path, "expected an array");
    std::vector<TlvRecord> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        only_keys(arr[i], {"tag", "hex"}, p);
        TlvRecord r;
        r.tag = static_cast<std::uint8_t>(uint_in(member(arr[i], "tag", p), 0xFF, p + ".tag"));
        const std::string hex = string(member(arr[i], "hex", p), p + ".hex");
        if (hex.size() % 2) throw bad(p + ".hex", "odd number of hex digits");
        const auto nibble = [&](char c) -> std::uint8_t {
            if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
            throw bad(p + ".hex", "invalid hex digit");
        };
        for (std::size_t k = 0; k < hex.size(); k += 2) {
            r.value.push_back(static_cast<std::uint8_t>((nibble(hex[k]) << 4) | nibble(hex[k + 1])));
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline json field_to_json(const SchemaField& f, const FieldValue& v, const RegistrySet& reg) {
    switch (f.type) {
    case WireType::code4:
        if (f.name == "scheduler") return reg.name_of(Table::scheduler, std::get<std::uint32_t>(v));
        return std::get<std::uint32_t>(v);
    case WireType::u16:
    case WireType::u32: return std::get<std::uint32_t>(v);
    case WireType::f32: return static_cast<double>(std::get<float>(v));
    case WireType::string: return std::get<std::string>(v);
    }
    return nullptr;
}

inline FieldValue field_from_json(const SchemaField& f, const json& v, const RegistrySet& reg, const std::string& path) {
    switch (f.type) {
    case WireType::code4:
        if (f.name == "scheduler") return static_cast<std::uint32_t>(named_code(v, Table::scheduler, reg, path));
        return static_cast<std::uint32_t>(uint_in(v, 15, path));
    case WireType::u16: return static_cast<std::uint32_t>(uint_in(v, 0xFFFF, path));
    case WireType::u32: return static_cast<std::uint32_t>(uint_in(v, 0xFFFFFFFFu, path));
    case WireType::f32: {
        if (!v.is_number()) throw bad(path, "expected a number");
        const double d = v.get<double>();
        const float x = static_cast<float>(d);
        if (!std::isfinite(x)) throw bad(path, "not representable as a finite 32-bit float");
        return x;
    }
    case WireType::string: return string(v, path);
    }
    return std::uint32_t{0};
}

inline json fields_to_json(const std::vector<SchemaField>& schema, const std::vector<FieldValue>& values,
                           const RegistrySet& reg) {
    json obj = json::object();
    for (std::size_t i = 0; i < schema.size() && i < values.size(); ++i) {
        obj[schema[i].name] = field_to_json(schema[i], values[i], reg);
    }
    return obj;
}

inline std::vector<FieldValue> fields_from_json(const std::vector<SchemaField>& schema, const json& obj,
                                                const RegistrySet& reg, const std::string& path) {
    if (!obj.is_object()) throw bad(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& f : schema) known = known || f.name == it.key();
        if (!known) throw bad(path + "." + it.key(), "field not in the model schema");
    }
    std::vector<FieldValue> out;
    for (const auto& f : schema) out.push_back(field_from_json(f, member(obj, f.name, path), reg, path + "." + f.name));
    return out;
}

} // namespace json_detail

/// Renders a manifest as interchange JSON. Codes are written as registry
/// names; payloads appear only as file references.
inline nlohmann::json manifest_to_json(const GenerationManifest& m, const RegistrySet& reg,
                                       const std::optional<std::string>& pixel_payload_file = std::nullopt,
                                       const std::optional<std::string>& model_payload_file = std::nullopt) {
    using nlohmann::json;
    using namespace json_detail;
    const ModelSchema schema = reg.schema_for(m.model.model_id);
    json j;
    j["format"] = kManifestFormatTag;
    j["version"] = kManifestJsonVersion;
    j["options"] = {
        {"saving_pixels", m.options.saving_pixels},
        {"pixel_compressor", reg.name_of(Table::pixel_compressor, m.options.pixel_compressor)},
        {"text_compressor", reg.name_of(Table::text_compressor, m.options.text_compressor)},
        {"saving_model", m.options.saving_model},
        {"model_compressor", reg.name_of(Table::model_compressor, m.options.model_compressor)},
    };
    j["platform"] = {
        {"device", reg.name_of(Table::device, m.platform.device)},
        {"gpu", reg.name_of(Table::gpu, m.platform.gpu)},
        {"cuda", reg.name_of(Table::cuda, m.platform.cuda)},
        {"extras", tlvs_to_json(m.platform.extras)},
    };
    j["model"] = {
        {"name", reg.name_of(Table::model, m.model.model_id)},
        {"data_type", reg.name_of(Table::data_type, m.model.data_type)},
        {"fields", fields_to_json(schema.section_fields(FieldSection::model), m.model.fields, reg)},
    };
    j["data"] = {
        {"prompt", m.data.prompt},
        {"negative_prompt", m.data.negative_prompt},
        {"height", m.data.height},
        {"width", m.data.width},
        {"seed", m.data.seed},
        {"fields", fields_to_json(schema.section_fields(FieldSection::data), m.data.fields, reg)},
        {"extensions", tlvs_to_json(m.extensions)},
    };
    j["pixel_payload"] = pixel_payload_file ? json{{"file", *pixel_payload_file}} : json(nullptr);
    j["model_payload"] = model_payload_file ? json{{"file", *model_payload_file}} : json(nullptr);
    return j;
}

/// Parses interchange JSON. Structure, names and ranges are checked here;
/// flag/payload consistency is checked once payload bytes are attached
/// (see `validate`).
inline ManifestDocument manifest_from_json(const nlohmann::json& j, const RegistrySet& reg) {
    using namespace json_detail;
    only_keys(j, {"format", "version", "options", "platform", "model", "data", "pixel_payload", "model_payload"},
              "$");
    if (string(member(j, "format", "$"), "$.format") != kManifestFormatTag) {
        throw bad("$.format", "expected \"aigif-manifest\"");
    }
    if (uint_in(member(j, "version", "$"), 0xFF, "$.version") != kManifestJsonVersion) {
        throw bad("$.version", "unsupported manifest version");
    }

    ManifestDocument doc;
    GenerationManifest& m = doc.manifest;

    const auto& o = member(j, "options", "$");
    only_keys(o, {"saving_pixels", "pixel_compressor", "text_compressor", "saving_model", "model_compressor"},
              "$.options");
    m.options.saving_pixels = boolean(member(o, "saving_pixels", "$.options"), "$.options.saving_pixels");
    m.options.pixel_compressor = static_cast<std::uint8_t>(
        named_code(member(o, "pixel_compressor", "$.options"), Table::pixel_compressor, reg, "$.options.pixel_compressor"));
    m.options.text_compressor = static_cast<std::uint8_t>(
        named_code(member(o, "text_compressor", "$.options"), Table::text_compressor, reg, "$.options.text_compressor"));
    m.options.saving_model = boolean(member(o, "saving_model", "$.options"), "$.options.saving_model");
    m.options.model_compressor = static_cast<std::uint8_t>(
        named_code(member(o, "model_compressor", "$.options"), Table::model_compressor, reg, "$.options.model_compressor"));

    const auto& p = member(j, "platform", "$");
    only_keys(p, {"device", "gpu", "cuda", "extras"}, "$.platform");
    m.platform.device = static_cast<std::uint8_t>(named_code(member(p, "device", "$.platform"), Table::device, reg, "$.platform.device"));
    m.platform.gpu = static_cast<std::uint8_t>(named_code(member(p, "gpu", "$.platform"), Table::gpu, reg, "$.platform.gpu"));
    m.platform.cuda = static_cast<std::uint8_t>(named_code(member(p, "cuda", "$.platform"), Table::cuda, reg, "$.platform.cuda"));
    if (p.contains("extras")) m.platform.extras = tlvs_from_json(p["extras"], "$.platform.extras");

    const auto& mo = member(j, "model", "$");
    only_keys(mo, {"name", "data_type", "fields"}, "$.model");
    m.model.model_id = named_code(member(mo, "name", "$.model"), Table::model, reg, "$.model.name");
    m.model.data_type = static_cast<std::uint8_t>(
        named_code(member(mo, "data_type", "$.model"), Table::data_type, reg, "$.model.data_type"));
    const ModelSchema schema = reg.schema_for(m.model.model_id);
    m.model.fields = fields_from_json(schema.section_fields(FieldSection::model),
                                      mo.contains("fields") ? mo["fields"] : nlohmann::json::object(), reg,
                                      "$.model.fields");

    const auto& d = member(j, "data", "$");
    only_keys(d, {"prompt", "negative_prompt", "height", "width", "seed", "fields", "extensions"}, "$.data");
    m.data.prompt = string(member(d, "prompt", "$.data"), "$.data.prompt");
    m.data.negative_prompt = string(member(d, "negative_prompt", "$.data"), "$.data.negative_prompt");
    m.data.height = static_cast<std::uint32_t>(uint_in(member(d, "height", "$.data"), 0xFFFFFFFFu, "$.data.height"));
    m.data.width = static_cast<std::uint32_t>(uint_in(member(d, "width", "$.data"), 0xFFFFFFFFu, "$.data.width"));
    m.data.seed = static_cast<std::uint32_t>(uint_in(member(d, "seed", "$.data"), 0xFFFFFFFFu, "$.data.seed"));
    m.data.fields = fields_from_json(schema.section_fields(FieldSection::data),
                                     d.contains("fields") ? d["fields"] : nlohmann::json::object(), reg,
                                     "$.data.fields");
    if (d.contains("extensions")) m.extensions = tlvs_from_json(d["extensions"], "$.data.extensions");

    const auto payload_ref = [&](const char* key) -> std::optional<std::string> {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) return std::nullopt;
        const std::string path = std::string("$.") + key;
        only_keys(*it, {"file"}, path);
        return string(member(*it, "file", path), path + ".file");
    };
    doc.pixel_payload_file = payload_ref("pixel_payload");
    doc.model_payload_file = payload_ref("model_payload");
    return doc;
}

inline ManifestDocument manifest_from_json_text(std::string_view text, const RegistrySet& reg) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::parse, std::string("manifest is not valid JSON: ") + e.what(), "$");
    }
    return manifest_from_json(j, reg);
}

} // namespace aigif
