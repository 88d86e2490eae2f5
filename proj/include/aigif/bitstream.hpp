#pragma once

#include <aigif/error.hpp>

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aigif {

/// Model identifiers and other unbounded registry indices.
using ExpCodeValue = std::uint64_t;

inline constexpr std::uint8_t kExpEscape = 0xFF;

/// MSB-first bit writer. Bit 7 of each byte is filled first; multi-byte
/// integers are big-endian.
class BitWriter {
public:
    void write_bits(std::uint32_t value, unsigned width) {
        if (width < 1 || width > 32) {
            throw Error(Errc::encoding, "bit field width " + std::to_string(width) + " outside 1..32");
        }
        if (width < 32 && (value >> width) != 0) {
            throw Error(Errc::encoding, "value " + std::to_string(value) + " does not fit in " +
                                            std::to_string(width) + " bits");
        }
        for (unsigned i = width; i-- > 0;) {
            put_bit((value >> i) & 1u);
        }
    }

    void write_u8(std::uint8_t v) { write_bits(v, 8); }
    void write_u16(std::uint16_t v) { write_bits(v, 16); }
    void write_u32(std::uint32_t v) { write_bits(v, 32); }
    void write_f32(float v) { write_bits(std::bit_cast<std::uint32_t>(v), 32); }

    void write_bytes(std::span<const std::uint8_t> bytes) {
        require_aligned("byte run");
        buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
        bit_position_ += bytes.size() * 8;
    }

    /// Pads with zero bits up to the next byte boundary.
    void align() {
        while (bit_position_ % 8 != 0) put_bit(0);
    }

    bool aligned() const noexcept { return bit_position_ % 8 == 0; }
    std::size_t bit_position() const noexcept { return bit_position_; }
    std::size_t byte_size() const noexcept { return buffer_.size(); }
    const std::vector<std::uint8_t>& bytes() const noexcept { return buffer_; }
    std::vector<std::uint8_t> take() && { return std::move(buffer_); }

private:
    void put_bit(unsigned bit) {
        if (bit_position_ % 8 == 0) buffer_.push_back(0);
        if (bit) buffer_.back() |= static_cast<std::uint8_t>(0x80u >> (bit_position_ % 8));
        ++bit_position_;
    }

    void require_aligned(std::string_view what) const {
        if (!aligned()) {
            throw Error(Errc::encoding, std::string(what) + " must start on a byte boundary");
        }
    }

    std::vector<std::uint8_t> buffer_;
    std::size_t bit_position_ = 0;
};

/// MSB-first bit reader over a borrowed buffer. Never reads past the end of
/// the span; running out raises `Errc::truncated` naming the field.
class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> buffer) noexcept : buffer_(buffer) {}

    std::uint32_t read_bits(unsigned width, std::string_view field = {}) {
        if (width < 1 || width > 32) {
            throw Error(Errc::encoding, "bit field width " + std::to_string(width) + " outside 1..32",
                        std::string(field));
        }
        if (bits_remaining() < width) {
            throw truncation(field, std::to_string(width) + "-bit field");
        }
        std::uint32_t value = 0;
        for (unsigned i = 0; i < width; ++i) {
            const std::size_t byte = bit_position_ / 8;
            const unsigned shift = 7u - static_cast<unsigned>(bit_position_ % 8);
            value = (value << 1) | ((buffer_[byte] >> shift) & 1u);
            ++bit_position_;
        }
        return value;
    }

    std::uint8_t read_u8(std::string_view field = {}) { return static_cast<std::uint8_t>(read_bits(8, field)); }
    std::uint16_t read_u16(std::string_view field = {}) { return static_cast<std::uint16_t>(read_bits(16, field)); }
    std::uint32_t read_u32(std::string_view field = {}) { return read_bits(32, field); }
    float read_f32(std::string_view field = {}) { return std::bit_cast<float>(read_bits(32, field)); }

    /// Borrows `count` whole bytes from the buffer.
    std::span<const std::uint8_t> read_bytes(std::size_t count, std::string_view field = {}) {
        require_aligned(field);
        if (bits_remaining() / 8 < count) {
            throw truncation(field, std::to_string(count) + "-byte field");
        }
        auto out = buffer_.subspan(bit_position_ / 8, count);
        bit_position_ += count * 8;
        return out;
    }

    /// Skips to the next byte boundary and returns the skipped bits.
    std::uint32_t align() {
        const unsigned pad = static_cast<unsigned>((8 - bit_position_ % 8) % 8);
        return pad == 0 ? 0u : read_bits(pad, "padding");
    }

    void require_aligned(std::string_view field) const {
        if (!aligned()) {
            throw Error(Errc::invalid_value, "field must start on a byte boundary", std::string(field),
                        bit_position_ / 8);
        }
    }

    bool aligned() const noexcept { return bit_position_ % 8 == 0; }
    std::size_t bit_position() const noexcept { return bit_position_; }
    std::size_t byte_position() const noexcept { return bit_position_ / 8; }
    std::size_t bits_remaining() const noexcept { return buffer_.size() * 8 - bit_position_; }
    std::size_t bytes_remaining() const noexcept { return bits_remaining() / 8; }
    bool at_end() const noexcept { return bits_remaining() == 0; }

    Error truncation(std::string_view field, const std::string& expected) const {
        std::string msg = "truncated at byte " + std::to_string(bit_position_ / 8);
        if (bit_position_ % 8) msg += " bit " + std::to_string(bit_position_ % 8);
        msg += " while reading ";
        msg += field.empty() ? expected : "'" + std::string(field) + "' (" + expected + ")";
        return Error(Errc::truncated, msg, field.empty() ? expected : std::string(field), bit_position_ / 8);
    }

private:
    std::span<const std::uint8_t> buffer_;
    std::size_t bit_position_ = 0;
};

/// Number of bytes `encode_exp_code(value)` produces.
constexpr std::size_t exp_code_length(ExpCodeValue value) noexcept {
    return static_cast<std::size_t>(value / 255) + 1;
}

/// Expandable code: value / 255 escape bytes (0xFF) then one byte value % 255.
inline std::vector<std::uint8_t> encode_exp_code(ExpCodeValue value) {
    std::vector<std::uint8_t> out(exp_code_length(value) - 1, kExpEscape);
    out.push_back(static_cast<std::uint8_t>(value % 255));
    return out;
}

inline void write_exp_code(BitWriter& w, ExpCodeValue value) {
    if (!w.aligned()) throw Error(Errc::encoding, "exp code must start on a byte boundary");
    for (ExpCodeValue n = value / 255; n > 0; --n) w.write_u8(kExpEscape);
    w.write_u8(static_cast<std::uint8_t>(value % 255));
}

inline ExpCodeValue decode_exp_code(BitReader& r, std::string_view field = "exp code") {
    r.require_aligned(field);
    ExpCodeValue escapes = 0;
    for (;;) {
        const std::uint8_t b = r.read_u8(field);
        if (b != kExpEscape) return escapes * 255 + b;
        ++escapes;
    }
}

} // namespace aigif
