#pragma once

#include <aigif/error.hpp>
#include <aigif/manifest.hpp>
#include <aigif/registry.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

// Deterministic stand-in for a text-to-image model.
//
// Key derivation (all arithmetic mod 2^64):
//   mix(x)      = splitmix64 finalizer of x
//   text_hash   = FNV-1a-64 over u32be(len(prompt)) prompt u32be(len(neg)) neg
//   key         = 0; for v in (seed, height, width, model_id, diffusion_steps,
//                              text_hash, bits(guidance_scale)):
//                   key = mix((key ^ v) + GAMMA)
// Pixel byte k is byte (k % 8) (little-endian) of mix(key + (k / 8 + 1) * GAMMA),
// i.e. the (k / 8)-th output of a splitmix64 generator seeded with key.
// Drift offset for byte k is (mix(dkey + (k + 1) * GAMMA) % (2A + 1)) - A with
// dkey = mix(key ^ 0x6472696674), result clamped to [0, 255].
// Missing schema fields (diffusion_steps, guidance_scale) contribute 0.

namespace aigif {

struct MockImage {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::vector<std::uint8_t> pixels; // row-major RGB

    bool operator==(const MockImage&) const = default;
};

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
inline constexpr std::uint64_t kMaxMockBytes = std::uint64_t{1} << 30;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// i-th output (0-based) of splitmix64 seeded with `state`.
constexpr std::uint64_t splitmix64_at(std::uint64_t state, std::uint64_t i) noexcept {
    return splitmix64_mix(state + (i + 1) * kGamma);
}

class Fnv1a64 {
public:
    void update(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            h_ ^= c;
            h_ *= 0x100000001B3ull;
        }
    }
    void update_u32be(std::uint32_t v) noexcept {
        const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                           static_cast<char>(v)};
        update({b, 4});
    }
    std::uint64_t digest() const noexcept { return h_; }

private:
    std::uint64_t h_ = 0xCBF29CE484222325ull;
};

inline std::uint64_t mock_key(const GenerationManifest& m, const RegistrySet& reg) {
    std::uint64_t steps = 0, guidance_bits = 0;
    if (const auto* v = find_field(m, reg, "diffusion_steps")) {
        if (const auto* n = std::get_if<std::uint32_t>(v)) steps = *n;
    }
    if (const auto* v = find_field(m, reg, "guidance_scale")) {
        if (const auto* x = std::get_if<float>(v)) guidance_bits = std::bit_cast<std::uint32_t>(*x);
    }
    Fnv1a64 text;
    text.update_u32be(static_cast<std::uint32_t>(m.data.prompt.size()));
    text.update(m.data.prompt);
    text.update_u32be(static_cast<std::uint32_t>(m.data.negative_prompt.size()));
    text.update(m.data.negative_prompt);

    std::uint64_t key = 0;
    for (std::uint64_t v : {std::uint64_t{m.data.seed}, std::uint64_t{m.data.height}, std::uint64_t{m.data.width},
                            m.model.model_id, steps, text.digest(), guidance_bits}) {
        key = splitmix64_mix((key ^ v) + kGamma);
    }
    return key;
}

namespace mock_detail {

inline std::size_t checked_size(std::uint32_t height, std::uint32_t width) {
    if (height == 0 || width == 0) {
        throw Error(Errc::invalid_value, "mock image needs nonzero height and width", height == 0 ? "height" : "width");
    }
    const std::uint64_t n = std::uint64_t{height} * width * 3;
    if (n > kMaxMockBytes) throw Error(Errc::invalid_value, "mock image larger than 1 GiB", "height");
    return static_cast<std::size_t>(n);
}

/// Runs fn(begin, end) over byte ranges split on row boundaries.
template <class Fn>
void for_rows(std::uint32_t height, std::uint32_t width, unsigned threads, Fn&& fn) {
    const std::size_t row = std::size_t{width} * 3;
    threads = std::max(1u, std::min<unsigned>(threads, height));
    if (threads == 1) {
        fn(std::size_t{0}, row * height);
        return;
    }
    std::vector<std::thread> pool;
    const std::uint32_t per = (height + threads - 1) / threads;
    for (std::uint32_t r0 = 0; r0 < height; r0 += per) {
        const std::uint32_t r1 = std::min(height, r0 + per);
        pool.emplace_back([&, r0, r1] { fn(row * r0, row * r1); });
    }
    for (auto& t : pool) t.join();
}

} // namespace mock_detail

/// Produces the mock image for a manifest. `threads` splits the work by rows;
/// the output does not depend on it.
inline MockImage generate(const GenerationManifest& m, const RegistrySet& reg = builtin_registry(),
                          unsigned threads = 1) {
    MockImage img{m.data.height, m.data.width, {}};
    img.pixels.resize(mock_detail::checked_size(m.data.height, m.data.width));
    const std::uint64_t key = mock_key(m, reg);
    mock_detail::for_rows(img.height, img.width, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const std::uint64_t word = splitmix64_at(key, k / 8);
            img.pixels[k] = static_cast<std::uint8_t>(word >> (8 * (k % 8)));
        }
    });
    return img;
}

/// `generate` followed by a deterministic per-channel offset in
/// [-amplitude, +amplitude], clamped to [0, 255].
inline MockImage generate_with_drift(const GenerationManifest& m, std::uint32_t amplitude,
                                     const RegistrySet& reg = builtin_registry(), unsigned threads = 1) {
    MockImage img = generate(m, reg, threads);
    if (amplitude == 0) return img;
    const std::uint64_t dkey = splitmix64_mix(mock_key(m, reg) ^ 0x6472696674ull);
    const std::uint64_t span = 2 * std::uint64_t{amplitude} + 1;
    mock_detail::for_rows(img.height, img.width, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto offset = static_cast<std::int64_t>(splitmix64_at(dkey, k) % span) - std::int64_t{amplitude};
            const std::int64_t v = std::clamp<std::int64_t>(img.pixels[k] + offset, 0, 255);
            img.pixels[k] = static_cast<std::uint8_t>(v);
        }
    });
    return img;
}

/// PSNR in dB; empty when the images are identical ("lossless").
struct Psnr {
    std::optional<double> db;

    bool lossless() const noexcept { return !db.has_value(); }
    std::string to_string() const {
        if (lossless()) return "lossless";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f dB", *db);
        return buf;
    }
};

inline Psnr psnr(const MockImage& a, const MockImage& b) {
    if (a.height != b.height || a.width != b.width || a.pixels.size() != b.pixels.size()) {
        throw Error(Errc::dimension_mismatch,
                    "PSNR of " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                        std::to_string(b.width) + "x" + std::to_string(b.height),
                    "image");
    }
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const int d = int{a.pixels[i]} - int{b.pixels[i]};
        sse += static_cast<std::uint64_t>(d * d);
    }
    if (sse == 0) return {};
    const double mse = static_cast<double>(sse) / static_cast<double>(a.pixels.size());
    return {10.0 * std::log10(255.0 * 255.0 / mse)};
}

/// Binary PPM (P6, maxval 255).
inline std::vector<std::uint8_t> to_ppm(const MockImage& img) {
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

} // namespace aigif
