#include <aigif/container.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <zlib.h>

#include <limits>
#include <string>
#include <vector>

using aigif::Bytes;
using aigif::Errc;

namespace {

template <class Fn>
aigif::Error error_of(Fn&& fn) {
    try {
        fn();
    } catch (const aigif::Error& e) {
        return e;
    }
    ADD_FAILURE() << "expected aigif::Error";
    return aigif::Error(Errc::io, "none");
}

Bytes hex_bytes(std::string_view hex) {
    Bytes out;
    std::string digits;
    for (char c : hex) {
        if (c != ' ' && c != '|') digits += c;
    }
    for (std::size_t i = 0; i < digits.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
    }
    return out;
}

} // namespace

TEST(Encode, CatExampleIsSmall) {
    const auto reg = aigif::builtin_registry();
    const auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    EXPECT_LT(bytes.size(), 256u);
    EXPECT_EQ(bytes.size(), oracle::file_size(fixtures::layout_of(fixtures::cat_manifest(), reg)));
}

TEST(Encode, CatExampleFixedPrefixMatchesHandLayout) {
    // magic+version | options | platform | model | data fixed fields | ext count
    const Bytes expected = hex_bytes("41494746 01 | 0880 | 10 01 01 00 | 00 00 |"
                                     " 00000400 00000400 31720ac1 0019 40f00000 | 00");
    const auto bytes = aigif::encode(fixtures::cat_manifest(), aigif::builtin_registry());
    ASSERT_GE(bytes.size(), expected.size() + 4);
    EXPECT_EQ(Bytes(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(expected.size())), expected);

    // String block: u32 length then a zlib stream over the inner table.
    const auto table = oracle::string_table({"A cute cat", "worst quality"});
    const auto block = oracle::zlib_deflate(table);
    const std::size_t at = expected.size();
    const std::uint32_t len = (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
                              (std::uint32_t{bytes[at + 2]} << 8) | bytes[at + 3];
    EXPECT_EQ(len, block.size());
    EXPECT_EQ(Bytes(bytes.begin() + static_cast<std::ptrdiff_t>(at + 4), bytes.end()), block);
}

TEST(Encode, EmptyStringsGiveFixedLayoutSize) {
    const auto reg = aigif::builtin_registry();
    auto m = fixtures::cat_manifest();
    m.data.prompt.clear();
    m.data.negative_prompt.clear();

    m.options.text_compressor = aigif::codes::kNone;
    // 5 + 2 + 4 + 2 + (12 + 6 + 1) + 4 + 10 (u16 count + two zero lengths)
    EXPECT_EQ(aigif::encode(m, reg).size(), 46u);

    m.options.text_compressor = aigif::codes::kZlib;
    const std::size_t zlen = oracle::zlib_deflate(oracle::string_table({"", ""})).size();
    EXPECT_EQ(aigif::encode(m, reg).size(), 36u + zlen);
}

TEST(Encode, PayloadFlagsMustMatchPayloads) {
    const auto reg = aigif::builtin_registry();
    auto m = fixtures::cat_manifest();
    m.options.saving_pixels = true;
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);
    m.options.saving_pixels = false;
    m.pixel_payload = Bytes{1, 2, 3};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);
    m.pixel_payload.reset();
    m.options.saving_model = true;
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);
}

TEST(Encode, PngPayloadNeedsSignatureAndRawNeedsExactSize) {
    const auto reg = aigif::builtin_registry();
    auto m = fixtures::cat_manifest();
    m.options.saving_pixels = true;
    m.pixel_payload = Bytes{'n', 'o', 't', 'p', 'n', 'g', 0, 0, 0};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);

    m.options.pixel_compressor = aigif::codes::kNone;
    m.data.height = 2;
    m.data.width = 3;
    m.pixel_payload = Bytes(17);
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);
    m.pixel_payload = Bytes(18);
    EXPECT_NO_THROW(aigif::encode(m, reg));
}

TEST(Encode, RejectsInvalidManifests) {
    const auto reg = aigif::builtin_registry();
    const auto base = fixtures::cat_manifest();

    auto m = base;
    m.data.height = 0;
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::invalid_value);
    m = base;
    m.data.fields[0] = std::uint32_t{0};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).field(), "diffusion_steps");
    m = base;
    m.data.fields[1] = std::uint32_t{7};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::schema_mismatch);
    m = base;
    m.data.fields.pop_back();
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::schema_mismatch);
    m = base;
    m.model.fields[0] = std::uint32_t{9};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::unknown_code);
    m = base;
    m.model.model_id = 77;
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::unknown_model);
    m = base;
    m.platform = {aigif::codes::kCpu, 1, 0, {}};
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::consistency);
    m = base;
    m.data.prompt = "\xff\xfe";
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::invalid_value);
    m = base;
    m.data.fields[1] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::invalid_value);
    m = base;
    m.extensions.resize(256);
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::encoding);
    m = base;
    m.platform.extras.push_back({1, Bytes(70000)});
    EXPECT_EQ(error_of([&] { aigif::encode(m, reg); }).code(), Errc::encoding);
}

TEST(Decode, CatExampleRoundTrip) {
    const auto reg = aigif::builtin_registry();
    const auto m = fixtures::cat_manifest();
    const auto bytes = aigif::encode(m, reg);
    EXPECT_EQ(aigif::decode(bytes, reg), m);
}

TEST(Decode, AcceptsOtherZlibSettings) {
    const auto& reg = aigif::builtin_registry();
    auto m = fixtures::cat_manifest();
    const auto table = oracle::string_table({m.data.prompt, m.data.negative_prompt});
    // Level 1 output differs from what the encoder writes but is still zlib.
    Bytes z(compressBound(table.size()));
    uLongf zlen = z.size();
    ASSERT_EQ(compress2(z.data(), &zlen, table.data(), table.size(), 1), Z_OK);
    z.resize(zlen);

    const auto canonical = aigif::encode(m, reg);
    Bytes other(canonical.begin(), canonical.begin() + 32);
    for (int s = 24; s >= 0; s -= 8) other.push_back(static_cast<std::uint8_t>(zlen >> s));
    other.insert(other.end(), z.begin(), z.end());
    ASSERT_NE(other, canonical);
    EXPECT_EQ(aigif::decode(other, reg), m);
    EXPECT_EQ(aigif::encode(aigif::decode(other, reg), reg), canonical);
}

TEST(Decode, BadMagicAndVersion) {
    const auto reg = aigif::builtin_registry();
    const Bytes png = {'P', 'N', 'G', 0x89, 0x01, 0, 0, 0, 0, 0};
    EXPECT_EQ(error_of([&] { aigif::decode(png, reg); }).code(), Errc::bad_magic);
    const Bytes short_png = {'P', 'N'};
    EXPECT_EQ(error_of([&] { aigif::decode(short_png, reg); }).code(), Errc::bad_magic);

    auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[4] = 2;
    const auto e = error_of([&] { aigif::decode(bytes, reg); });
    EXPECT_EQ(e.code(), Errc::unsupported_version);
    EXPECT_EQ(e.offset(), 4u);
}

TEST(Decode, UnknownCodeReportsTableValueAndOffset) {
    const auto reg = aigif::builtin_registry();
    auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[8] = 0x07; // gpu byte
    const auto e = error_of([&] { aigif::decode(bytes, reg); });
    EXPECT_EQ(e.code(), Errc::unknown_code);
    EXPECT_EQ(e.field(), "gpu");
    EXPECT_EQ(e.raw_value(), 7u);
    EXPECT_EQ(e.offset(), 8u);

    bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[11] = 0x09; // model ID
    const auto me = error_of([&] { aigif::decode(bytes, reg); });
    EXPECT_EQ(me.code(), Errc::unknown_model);
    EXPECT_EQ(me.raw_value(), 9u);
}

TEST(Decode, NonzeroPaddingRejected) {
    const auto reg = aigif::builtin_registry();
    auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[6] |= 0x01; // options pad bits
    EXPECT_EQ(error_of([&] { aigif::decode(bytes, reg); }).code(), Errc::invalid_value);
    bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[7] |= 0x01; // device nibble pad
    EXPECT_EQ(error_of([&] { aigif::decode(bytes, reg); }).code(), Errc::invalid_value);
}

TEST(Decode, TrailingGarbage) {
    const auto reg = aigif::builtin_registry();
    auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes.push_back(0);
    const auto e = error_of([&] { aigif::decode(bytes, reg); });
    EXPECT_EQ(e.code(), Errc::trailing_data);
    EXPECT_EQ(e.offset(), bytes.size() - 1);
}

TEST(Decode, CorruptStringBlock) {
    const auto reg = aigif::builtin_registry();
    auto bytes = aigif::encode(fixtures::cat_manifest(), reg);
    bytes[bytes.size() - 3] ^= 0x5A; // inside the zlib stream / adler
    EXPECT_EQ(error_of([&] { aigif::decode(bytes, reg); }).code(), Errc::compression);
}

TEST(Decode, EveryPrefixIsATruncation) {
    const auto reg = fixtures::test_registry();
    fixtures::ManifestGenerator gen(11);
    for (int i = 0; i < 40; ++i) {
        const auto bytes = aigif::encode(gen.next(), reg);
        for (std::size_t n = 0; n < bytes.size(); ++n) {
            const auto e = error_of([&] { aigif::decode(std::span(bytes).first(n), reg); });
            ASSERT_EQ(e.code(), Errc::truncated) << "prefix " << n << "/" << bytes.size() << ": " << e.what();
            ASSERT_FALSE(e.field().empty());
            ASSERT_TRUE(e.offset().has_value());
        }
    }
}

TEST(Decode, UnknownTlvTagsPreserved) {
    const auto reg = aigif::builtin_registry();
    auto m = fixtures::cat_manifest();
    m.platform.extras = {{0x7F, {1, 2, 3}}, {0x01, {}}};
    m.extensions = {{0xEE, Bytes(300, 0xAB)}};
    const auto bytes = aigif::encode(m, reg);
    const auto back = aigif::decode(bytes, reg);
    EXPECT_EQ(back, m);
    EXPECT_EQ(aigif::encode(back, reg), bytes);
}

TEST(RoundTripProperty, RandomManifests) {
    const auto reg = fixtures::test_registry();
    fixtures::ManifestGenerator gen(2024);
    bool saw_multibyte = false, saw_payload = false, saw_empty = false, saw_tlv = false;
    for (int i = 0; i < 1000; ++i) {
        const auto m = gen.next();
        const auto bytes = aigif::encode(m, reg);
        ASSERT_EQ(bytes.size(), oracle::file_size(fixtures::layout_of(m, reg))) << i;
        const auto back = aigif::decode(bytes, reg);
        ASSERT_EQ(back, m) << i;
        ASSERT_EQ(aigif::encode(back, reg), bytes) << i;
        if (m.pixel_payload) {
            ASSERT_EQ(*back.pixel_payload, *m.pixel_payload);
        }
        saw_multibyte |= m.model.model_id >= 255;
        saw_payload |= m.pixel_payload && m.model_payload;
        saw_empty |= m.data.prompt.empty();
        saw_tlv |= m.platform.extras.size() == 8;
    }
    EXPECT_TRUE(saw_multibyte && saw_payload && saw_empty && saw_tlv);
}

TEST(StringBlock, EmptyPairRaw) {
    const std::vector<std::string> s = {"", ""};
    const auto block = aigif::compress_string_block(s, aigif::codes::kNone);
    EXPECT_EQ(block.size(), 10u);
    EXPECT_EQ(block, oracle::string_table(s));
}

TEST(StringBlock, ZlibRoundTrip) {
    const std::vector<std::string> s = {"A cute cat", "worst quality"};
    const auto block = aigif::compress_string_block(s, aigif::codes::kZlib);
    EXPECT_EQ(block[0] & 0x0F, 8); // CM = deflate (RFC 1950)
    EXPECT_EQ(((block[0] << 8) | block[1]) % 31, 0);
    EXPECT_EQ(aigif::decompress_string_block(block, aigif::codes::kZlib), s);
}

TEST(StringBlock, RepetitiveTextCompresses) {
    std::string prompt;
    while (prompt.size() < 10240) prompt += "a highly detailed oil painting of a cat, ";
    const std::vector<std::string> s = {prompt, "blurry"};
    const auto raw = aigif::compress_string_block(s, aigif::codes::kNone);
    const auto z = aigif::compress_string_block(s, aigif::codes::kZlib);
    EXPECT_LT(z.size(), raw.size());
    EXPECT_EQ(z, oracle::zlib_deflate(oracle::string_table(s)));
}

TEST(StringBlock, UnsupportedCompressor) {
    const std::vector<std::string> s = {"", ""};
    EXPECT_EQ(error_of([&] { aigif::compress_string_block(s, 5); }).code(), Errc::unknown_code);
}

TEST(StringBlock, DecoderRejectsGarbageAfterStream) {
    auto block = aigif::compress_string_block(std::vector<std::string>{"x", "y"}, aigif::codes::kZlib);
    block.push_back(0);
    EXPECT_EQ(error_of([&] { aigif::decompress_string_block(block, aigif::codes::kZlib); }).code(),
              Errc::trailing_data);
}

TEST(SizeReport, CatExample) {
    const auto r = aigif::size_report(fixtures::cat_manifest(), aigif::builtin_registry());
    EXPECT_EQ(r.raw_pixel_bytes, 3145728u);
    EXPECT_GT(r.ratio, 10000.0);
    EXPECT_DOUBLE_EQ(r.ratio, 3145728.0 / static_cast<double>(r.encoded_bytes));
}

TEST(SizeReport, OnePixelImage) {
    auto m = fixtures::cat_manifest();
    m.data.height = 1;
    m.data.width = 1;
    const auto r = aigif::size_report(m, aigif::builtin_registry());
    EXPECT_EQ(r.raw_pixel_bytes, 3u);
    EXPECT_LT(r.ratio, 1.0);
    EXPECT_GT(r.ratio, 0.0);
}
