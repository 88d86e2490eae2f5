#pragma once

#include <aigif/bitstream.hpp>
#include <aigif/error.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace aigif {

enum class Table {
    pixel_compressor,
    text_compressor,
    model_compressor,
    device,
    gpu,
    cuda,
    data_type,
    model,
    scheduler,
};

inline constexpr std::array kAllTables = {
    Table::pixel_compressor, Table::text_compressor, Table::model_compressor,
    Table::device,           Table::gpu,             Table::cuda,
    Table::data_type,        Table::model,           Table::scheduler,
};

inline constexpr std::string_view table_name(Table t) noexcept {
    switch (t) {
    case Table::pixel_compressor: return "pixel_compressor";
    case Table::text_compressor: return "text_compressor";
    case Table::model_compressor: return "model_compressor";
    case Table::device: return "device";
    case Table::gpu: return "gpu";
    case Table::cuda: return "cuda";
    case Table::data_type: return "data_type";
    case Table::model: return "model";
    case Table::scheduler: return "scheduler";
    }
    return "?";
}

inline std::optional<Table> table_from_name(std::string_view name) noexcept {
    for (Table t : kAllTables) {
        if (table_name(t) == name) return t;
    }
    return std::nullopt;
}

/// Model codes are capped so an encoded ID stays a few KiB at most.
inline constexpr ExpCodeValue kMaxModelCode = ExpCodeValue{1} << 20;

/// Exclusive upper bound on codes for a table. Byte tables keep 0xFF free
/// as a future escape, the same way model IDs use it.
inline constexpr ExpCodeValue table_code_limit(Table t) noexcept {
    switch (t) {
    case Table::gpu:
    case Table::cuda: return 255;
    case Table::model: return kMaxModelCode + 1;
    default: return 16;
    }
}

// Well-known codes used throughout the codec.
namespace codes {
inline constexpr std::uint8_t kNone = 0;
inline constexpr std::uint8_t kPng = 1;
inline constexpr std::uint8_t kZlib = 1;
inline constexpr std::uint8_t kCpu = 0;
inline constexpr std::uint8_t kGpu = 1;
} // namespace codes

enum class WireType { u16, u32, f32, code4, string };
enum class FieldSection { model, data };

inline constexpr std::string_view wire_type_name(WireType t) noexcept {
    switch (t) {
    case WireType::u16: return "u16";
    case WireType::u32: return "u32";
    case WireType::f32: return "f32";
    case WireType::code4: return "code4";
    case WireType::string: return "string";
    }
    return "?";
}

inline std::optional<WireType> wire_type_from_name(std::string_view s) noexcept {
    for (WireType t : {WireType::u16, WireType::u32, WireType::f32, WireType::code4, WireType::string}) {
        if (wire_type_name(t) == s) return t;
    }
    return std::nullopt;
}

/// Bits a field occupies in its section; strings live in the string block.
inline constexpr unsigned wire_bits(WireType t) noexcept {
    switch (t) {
    case WireType::u16: return 16;
    case WireType::u32:
    case WireType::f32: return 32;
    case WireType::code4: return 4;
    case WireType::string: return 0;
    }
    return 0;
}

struct SchemaField {
    std::string name;
    WireType type;
    FieldSection section;

    bool operator==(const SchemaField&) const = default;
};

/// code4 fields default to the model section, everything else to data.
inline constexpr FieldSection default_section(WireType t) noexcept {
    return t == WireType::code4 ? FieldSection::model : FieldSection::data;
}

/// Ordered model-dependent fields. The order is the wire order.
struct ModelSchema {
    ExpCodeValue model_id = 0;
    std::vector<SchemaField> fields;

    std::vector<SchemaField> section_fields(FieldSection s) const {
        std::vector<SchemaField> out;
        for (const auto& f : fields) {
            if (f.section == s) out.push_back(f);
        }
        return out;
    }

    bool operator==(const ModelSchema&) const = default;
};

/// Fields used by every built-in text-to-image model and by models
/// registered without explicit schema records.
inline std::vector<SchemaField> standard_text_to_image_fields() {
    return {
        {"scheduler", WireType::code4, FieldSection::model},
        {"diffusion_steps", WireType::u16, FieldSection::data},
        {"guidance_scale", WireType::f32, FieldSection::data},
    };
}

/// One code <-> name table. Names are unique within a table.
class CodeTable {
public:
    explicit CodeTable(Table id) : id_(id) {}

    Table id() const noexcept { return id_; }
    bool contains(ExpCodeValue code) const { return by_code_.count(code) != 0; }
    bool contains_name(std::string_view name) const { return by_name_.find(name) != by_name_.end(); }
    std::size_t size() const noexcept { return by_code_.size(); }
    const std::map<ExpCodeValue, std::string>& entries() const noexcept { return by_code_; }

    const std::string& name_of(ExpCodeValue code) const {
        auto it = by_code_.find(code);
        if (it == by_code_.end()) {
            throw Error(id_ == Table::model ? Errc::unknown_model : Errc::unknown_code,
                        "unknown " + std::string(table_name(id_)) + " code " + std::to_string(code),
                        std::string(table_name(id_)), std::nullopt, code);
        }
        return it->second;
    }

    ExpCodeValue code_of(std::string_view name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) {
            throw Error(id_ == Table::model ? Errc::unknown_model : Errc::unknown_code,
                        "unknown " + std::string(table_name(id_)) + " name '" + std::string(name) + "'",
                        std::string(table_name(id_)));
        }
        return it->second;
    }

    void bind(ExpCodeValue code, const std::string& name) {
        if (code >= table_code_limit(id_)) {
            throw Error(Errc::width_overflow,
                        "code " + std::to_string(code) + " does not fit table " + std::string(table_name(id_)),
                        std::string(table_name(id_)), std::nullopt, code);
        }
        if (name.empty()) {
            throw Error(Errc::parse, "empty name for " + std::string(table_name(id_)) + " code " +
                                         std::to_string(code), std::string(table_name(id_)));
        }
        if (contains(code)) {
            throw Error(Errc::duplicate_code,
                        std::string(table_name(id_)) + " code " + std::to_string(code) + " already bound to '" +
                            by_code_.at(code) + "'",
                        std::string(table_name(id_)), std::nullopt, code);
        }
        if (contains_name(name)) {
            throw Error(Errc::duplicate_code,
                        std::string(table_name(id_)) + " name '" + name + "' already bound",
                        std::string(table_name(id_)), std::nullopt, code);
        }
        by_code_.emplace(code, name);
        by_name_.emplace(name, code);
    }

private:
    Table id_;
    std::map<ExpCodeValue, std::string> by_code_;
    std::map<std::string, ExpCodeValue, std::less<>> by_name_;
};

struct RegistryAddition {
    Table table;
    ExpCodeValue code;
    std::string name;
};

/// Immutable set of code tables plus per-model schemas. Copies are cheap
/// enough for the handful of extension calls a process makes.
class RegistrySet {
public:
    const CodeTable& table(Table t) const { return tables_[static_cast<std::size_t>(t)]; }

    const std::string& name_of(Table t, ExpCodeValue code) const { return table(t).name_of(code); }
    ExpCodeValue code_of(Table t, std::string_view name) const { return table(t).code_of(name); }
    bool contains(Table t, ExpCodeValue code) const { return table(t).contains(code); }

    /// Schema for a registered model. Models registered without schema
    /// records use the standard text-to-image field list.
    ModelSchema schema_for(ExpCodeValue model_id) const {
        if (!contains(Table::model, model_id)) {
            throw Error(Errc::unknown_model, "unknown model ID " + std::to_string(model_id), "model ID",
                        std::nullopt, model_id);
        }
        if (auto it = schemas_.find(model_id); it != schemas_.end()) return {model_id, it->second};
        return {model_id, standard_text_to_image_fields()};
    }

    bool has_explicit_schema(ExpCodeValue model_id) const { return schemas_.count(model_id) != 0; }

    friend RegistrySet extend_registry(const RegistrySet& base, std::span<const RegistryAddition> additions);
    friend RegistrySet extend_schema(const RegistrySet& base, ExpCodeValue model_id,
                                     std::span<const SchemaField> fields);

private:
    std::array<CodeTable, kAllTables.size()> tables_{
        CodeTable(Table::pixel_compressor), CodeTable(Table::text_compressor),
        CodeTable(Table::model_compressor), CodeTable(Table::device),
        CodeTable(Table::gpu),              CodeTable(Table::cuda),
        CodeTable(Table::data_type),        CodeTable(Table::model),
        CodeTable(Table::scheduler),
    };
    std::map<ExpCodeValue, std::vector<SchemaField>> schemas_;
};

/// Returns a new registry with `additions` bound; `base` is untouched.
inline RegistrySet extend_registry(const RegistrySet& base, std::span<const RegistryAddition> additions) {
    RegistrySet out = base;
    for (const auto& a : additions) {
        out.tables_[static_cast<std::size_t>(a.table)].bind(a.code, a.name);
    }
    return out;
}

inline void validate_schema_fields(ExpCodeValue model_id, std::span<const SchemaField> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].name.empty()) {
            throw Error(Errc::parse, "empty field name in schema for model " + std::to_string(model_id), "schema");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (fields[j].name == fields[i].name) {
                throw Error(Errc::duplicate_code,
                            "field '" + fields[i].name + "' repeated in schema for model " + std::to_string(model_id),
                            "schema", std::nullopt, model_id);
            }
        }
        if (fields[i].name == "scheduler" && fields[i].type != WireType::code4) {
            throw Error(Errc::parse, "scheduler field must be code4", "schema", std::nullopt, model_id);
        }
    }
}

/// Attaches an explicit schema to a registered model. Each model's schema may
/// be set once.
inline RegistrySet extend_schema(const RegistrySet& base, ExpCodeValue model_id,
                                 std::span<const SchemaField> fields) {
    if (!base.contains(Table::model, model_id)) {
        throw Error(Errc::unknown_model, "schema for unregistered model " + std::to_string(model_id), "schema",
                    std::nullopt, model_id);
    }
    if (base.has_explicit_schema(model_id)) {
        throw Error(Errc::duplicate_code, "schema for model " + std::to_string(model_id) + " already defined",
                    "schema", std::nullopt, model_id);
    }
    validate_schema_fields(model_id, fields);
    RegistrySet out = base;
    out.schemas_.emplace(model_id, std::vector<SchemaField>(fields.begin(), fields.end()));
    return out;
}

// ---------------------------------------------------------------------------
// Text formats
//
// Registry file: one `table:code:name` record per line. Lines of the form
// `schema:model_code:field_name:wire_type[:section]` add schema fields.
// Schema file: `model_code:field_name:wire_type[:section]` records.
// Blank lines and lines starting with '#' are ignored everywhere.

struct SchemaRecord {
    ExpCodeValue model_id;
    SchemaField field;
};

struct RegistryRecords {
    std::vector<RegistryAddition> additions;
    std::vector<SchemaRecord> schema;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep, std::size_t max_parts) {
    std::vector<std::string_view> parts;
    while (parts.size() + 1 < max_parts) {
        auto pos = s.find(sep);
        if (pos == std::string_view::npos) break;
        parts.push_back(s.substr(0, pos));
        s.remove_prefix(pos + 1);
    }
    parts.push_back(s);
    return parts;
}

inline Error line_error(std::size_t line_no, const std::string& what) {
    return Error(Errc::parse, "line " + std::to_string(line_no) + ": " + what, "line " + std::to_string(line_no));
}

inline ExpCodeValue parse_code(std::string_view s, std::size_t line_no) {
    s = trim(s);
    ExpCodeValue v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw line_error(line_no, "bad code '" + std::string(s) + "'");
    }
    return v;
}

inline SchemaRecord parse_schema_parts(std::span<const std::string_view> parts, std::size_t line_no) {
    if (parts.size() < 3 || parts.size() > 4) {
        throw line_error(line_no, "expected model_code:field_name:wire_type[:section]");
    }
    SchemaRecord rec{parse_code(parts[0], line_no), {}};
    rec.field.name = std::string(trim(parts[1]));
    auto type = wire_type_from_name(trim(parts[2]));
    if (!type) throw line_error(line_no, "unknown wire type '" + std::string(trim(parts[2])) + "'");
    rec.field.type = *type;
    rec.field.section = default_section(*type);
    if (parts.size() == 4) {
        auto sec = trim(parts[3]);
        if (sec == "model") {
            rec.field.section = FieldSection::model;
        } else if (sec == "data") {
            rec.field.section = FieldSection::data;
        } else {
            throw line_error(line_no, "unknown section '" + std::string(sec) + "'");
        }
    }
    if (rec.field.name.empty()) throw line_error(line_no, "empty field name");
    return rec;
}

template <class Fn>
void for_each_record(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        fn(line, line_no);
    }
}

} // namespace detail

inline std::vector<SchemaRecord> parse_schema_text(std::string_view text) {
    std::vector<SchemaRecord> out;
    detail::for_each_record(text, [&](std::string_view line, std::size_t line_no) {
        auto parts = detail::split(line, ':', 5);
        out.push_back(detail::parse_schema_parts(parts, line_no));
    });
    return out;
}

inline RegistryRecords parse_registry_text(std::string_view text) {
    RegistryRecords out;
    detail::for_each_record(text, [&](std::string_view line, std::size_t line_no) {
        auto head = detail::split(line, ':', 2);
        auto table = detail::trim(head[0]);
        if (table == "schema") {
            if (head.size() < 2) throw detail::line_error(line_no, "empty schema record");
            auto parts = detail::split(head[1], ':', 5);
            out.schema.push_back(detail::parse_schema_parts(parts, line_no));
            return;
        }
        auto parts = detail::split(line, ':', 3);
        if (parts.size() != 3) throw detail::line_error(line_no, "expected table:code:name");
        auto t = table_from_name(table);
        if (!t) throw detail::line_error(line_no, "unknown table '" + std::string(table) + "'");
        out.additions.push_back({*t, detail::parse_code(parts[1], line_no), std::string(detail::trim(parts[2]))});
    });
    return out;
}

/// Applies parsed records: code bindings first, then schemas grouped per model
/// in file order.
inline RegistrySet apply_records(const RegistrySet& base, const RegistryRecords& records) {
    RegistrySet out = extend_registry(base, records.additions);
    std::map<ExpCodeValue, std::vector<SchemaField>> grouped;
    std::vector<ExpCodeValue> order;
    for (const auto& rec : records.schema) {
        auto [it, inserted] = grouped.try_emplace(rec.model_id);
        if (inserted) order.push_back(rec.model_id);
        it->second.push_back(rec.field);
    }
    for (ExpCodeValue id : order) out = extend_schema(out, id, grouped.at(id));
    return out;
}

inline RegistrySet load_registry_text(const RegistrySet& base, std::string_view text) {
    return apply_records(base, parse_registry_text(text));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open '" + path + "'", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RegistrySet load_registry_file(const RegistrySet& base, const std::string& path) {
    try {
        return load_registry_text(base, read_text_file(path));
    } catch (const Error& e) {
        if (e.code() == Errc::io) throw;
        throw Error(e.code(), path + ": " + e.what(), e.field(), e.offset(), e.raw_value());
    }
}

// Shipped contents; kept byte-identical to data/builtin_registry.txt and
// data/builtin_schema.txt.
inline constexpr std::string_view kBuiltinRegistryText = R"(# AIGIF built-in registry: table:code:name
pixel_compressor:0:None
pixel_compressor:1:png
text_compressor:0:None
text_compressor:1:zlib
model_compressor:0:None
model_compressor:1:int8
device:0:CPU
device:1:GPU
gpu:0:None
gpu:1:NVIDIAGeForceGTX1080Ti
gpu:2:NVIDIAGeForceRTX3090
cuda:0:None
cuda:1:cu121
data_type:0:float32
data_type:1:float16
model:0:stable-diffusion-v1-5
model:1:stable-diffusion-v2-1
model:2:sdxl
scheduler:0:DDIM
scheduler:1:DPM++2M
)";

inline constexpr std::string_view kBuiltinSchemaText = R"(# AIGIF built-in model schemas: model_code:field_name:wire_type[:section]
0:scheduler:code4
0:diffusion_steps:u16
0:guidance_scale:f32
1:scheduler:code4
1:diffusion_steps:u16
1:guidance_scale:f32
2:scheduler:code4
2:diffusion_steps:u16
2:guidance_scale:f32
)";

inline RegistrySet builtin_registry() {
    static const RegistrySet instance = [] {
        RegistryRecords records = parse_registry_text(kBuiltinRegistryText);
        records.schema = parse_schema_text(kBuiltinSchemaText);
        return apply_records(RegistrySet{}, records);
    }();
    return instance;
}

} // namespace aigif
