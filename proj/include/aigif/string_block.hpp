#pragma once

#include <aigif/bitstream.hpp>
#include <aigif/error.hpp>
#include <aigif/manifest.hpp>
#include <aigif/registry.hpp>

#include <zlib.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aigif {

/// Upper bound on the decompressed string table.
inline constexpr std::size_t kMaxStringTable = std::size_t{64} << 20;

/// Inner table: u16 count, then per string u32 length + UTF-8 bytes.
inline Bytes build_string_table(std::span<const std::string> strings) {
    if (strings.size() > 0xFFFF) throw Error(Errc::encoding, "more than 65535 strings", "string block");
    BitWriter w;
    w.write_u16(static_cast<std::uint16_t>(strings.size()));
    for (const auto& s : strings) {
        if (s.size() > 0xFFFFFFFFu) throw Error(Errc::encoding, "string longer than 4 GiB", "string block");
        w.write_u32(static_cast<std::uint32_t>(s.size()));
        w.write_bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    }
    if (w.byte_size() > kMaxStringTable) throw Error(Errc::encoding, "string table exceeds 64 MiB", "string block");
    return std::move(w).take();
}

inline std::vector<std::string> parse_string_table(std::span<const std::uint8_t> table) {
    BitReader r(table);
    const std::uint16_t count = r.read_u16("string count");
    std::vector<std::string> out;
    out.reserve(count);
    for (std::uint16_t i = 0; i < count; ++i) {
        const std::string name = "string " + std::to_string(i);
        const std::uint32_t len = r.read_u32(name + " length");
        auto bytes = r.read_bytes(len, name);
        std::string s(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        if (!valid_utf8(s)) throw Error(Errc::invalid_value, name + " is not valid UTF-8", name);
        out.push_back(std::move(s));
    }
    if (!r.at_end()) {
        throw Error(Errc::trailing_data, "trailing bytes inside string table", "string block", r.byte_position());
    }
    return out;
}

inline Bytes zlib_compress(std::span<const std::uint8_t> raw) {
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    Bytes out(bound);
    const int rc = compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), Z_BEST_COMPRESSION);
    if (rc != Z_OK) throw Error(Errc::compression, "zlib compression failed (" + std::to_string(rc) + ")", "string block");
    out.resize(bound);
    return out;
}

/// Inflates one complete RFC-1950 stream that must span all of `stream`.
inline Bytes zlib_decompress(std::span<const std::uint8_t> stream, std::size_t limit) {
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw Error(Errc::compression, "inflateInit failed", "string block");
    struct Guard {
        z_stream* s;
        ~Guard() { inflateEnd(s); }
    } guard{&zs};

    zs.next_in = const_cast<Bytef*>(stream.data());
    zs.avail_in = static_cast<uInt>(stream.size());
    Bytes out;
    std::uint8_t chunk[16384];
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk;
        zs.avail_out = sizeof chunk;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            std::string why = zs.msg ? zs.msg : (rc == Z_BUF_ERROR ? "stream ends early" : "inflate error");
            throw Error(Errc::compression, "string block decompression failed: " + why, "string block");
        }
        out.insert(out.end(), chunk, chunk + (sizeof chunk - zs.avail_out));
        if (out.size() > limit) throw Error(Errc::compression, "string block inflates past limit", "string block");
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            throw Error(Errc::compression, "string block decompression failed: stream ends early", "string block");
        }
    }
    if (zs.avail_in != 0) {
        throw Error(Errc::trailing_data, "bytes after end of zlib stream in string block", "string block");
    }
    return out;
}

/// Builds the inner string table and applies the declared text compressor.
inline Bytes compress_string_block(std::span<const std::string> strings, std::uint8_t text_compressor) {
    Bytes table = build_string_table(strings);
    switch (text_compressor) {
    case codes::kNone: return table;
    case codes::kZlib: return zlib_compress(table);
    default:
        throw Error(Errc::unknown_code, "unsupported text compressor code " + std::to_string(text_compressor),
                    "text_compressor", std::nullopt, text_compressor);
    }
}

inline std::vector<std::string> decompress_string_block(std::span<const std::uint8_t> block,
                                                        std::uint8_t text_compressor) {
    switch (text_compressor) {
    case codes::kNone: return parse_string_table(block);
    case codes::kZlib: {
        Bytes table = zlib_decompress(block, kMaxStringTable);
        return parse_string_table(table);
    }
    default:
        throw Error(Errc::unknown_code, "unsupported text compressor code " + std::to_string(text_compressor),
                    "text_compressor", std::nullopt, text_compressor);
    }
}

} // namespace aigif
