#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aigif {

/// Error categories raised by the codec. Every failure path in the library
/// throws `aigif::Error` carrying one of these.
enum class Errc {
    encoding,            // value does not fit its field
    truncated,           // input ended inside a field
    bad_magic,
    unsupported_version,
    unknown_code,        // code not bound in a registry table
    unknown_model,
    schema_mismatch,     // model field values disagree with the model schema
    consistency,         // flag/payload disagreement, CPU with gpu code, ...
    compression,         // string block (de)compression failure
    trailing_data,
    invalid_value,       // out-of-domain value (zero height, NaN, bad padding, bad UTF-8)
    duplicate_code,
    width_overflow,      // registry code does not fit the table width
    parse,               // text input (registry file, JSON manifest) malformed
    dimension_mismatch,
    io,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
    case Errc::encoding: return "encoding";
    case Errc::truncated: return "truncated";
    case Errc::bad_magic: return "bad-magic";
    case Errc::unsupported_version: return "unsupported-version";
    case Errc::unknown_code: return "unknown-code";
    case Errc::unknown_model: return "unknown-model";
    case Errc::schema_mismatch: return "schema-mismatch";
    case Errc::consistency: return "consistency";
    case Errc::compression: return "compression";
    case Errc::trailing_data: return "trailing-data";
    case Errc::invalid_value: return "invalid-value";
    case Errc::duplicate_code: return "duplicate-code";
    case Errc::width_overflow: return "width-overflow";
    case Errc::parse: return "parse";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::io: return "io";
    }
    return "unknown";
}

/// Structured codec error. `field()` names the field (or registry table)
/// involved; `offset()` is a byte offset into the input when one applies.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, std::string field = {},
          std::optional<std::size_t> offset = std::nullopt,
          std::optional<std::uint64_t> raw_value = std::nullopt)
        : std::runtime_error(message), code_(code), field_(std::move(field)),
          offset_(offset), raw_value_(raw_value) {}

    Errc code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }
    std::optional<std::size_t> offset() const noexcept { return offset_; }
    std::optional<std::uint64_t> raw_value() const noexcept { return raw_value_; }

private:
    Errc code_;
    std::string field_;
    std::optional<std::size_t> offset_;
    std::optional<std::uint64_t> raw_value_;
};

} // namespace aigif
