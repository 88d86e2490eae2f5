#pragma once

#include <aigif/error.hpp>
#include <aigif/manifest.hpp>
#include <aigif/registry.hpp>

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace aigif {

enum class CompatLevel { exact, same_device_class, cross_class };
enum class FidelityExpectation { bit_exact, imperceptible_loss, perceptible_risk };

inline constexpr std::string_view to_string(CompatLevel l) noexcept {
    switch (l) {
    case CompatLevel::exact: return "Exact";
    case CompatLevel::same_device_class: return "SameDeviceClass";
    case CompatLevel::cross_class: return "CrossClass";
    }
    return "?";
}

inline constexpr std::string_view to_string(FidelityExpectation f) noexcept {
    switch (f) {
    case FidelityExpectation::bit_exact: return "BitExact";
    case FidelityExpectation::imperceptible_loss: return "ImperceptibleLoss";
    case FidelityExpectation::perceptible_risk: return "PerceptibleRisk";
    }
    return "?";
}

struct CompatReport {
    CompatLevel level = CompatLevel::exact;
    FidelityExpectation fidelity_expectation = FidelityExpectation::bit_exact;
    std::vector<std::string> notes;
};

/// PSNR above which recreation drift is treated as imperceptible.
inline constexpr double kImperceptiblePsnrDb = 50.0;

/// Classifies recreation of a file's platform on a host platform.
///
/// The fidelity column is a fixed decision table built from reference
/// measurements of SD1.5 recreation (512x512, 25 steps):
///   CPU -> other CPU        73.7 .. 80.7 dB
///   GPU -> same GPU model   lossless (DDIM), 57.9 dB (DPM++ 2M)
///   GPU -> other GPU model  58.44 dB (DDIM), 51.31 dB (DPM++ 2M)
///   CPU -> GPU              58.45 dB (DDIM), 51.31 dB (DPM++ 2M)
/// CPU models are not recorded in the file, so CPU -> CPU always compares
/// Exact.
inline CompatReport check_compat(const PlatformConfig& file, const PlatformConfig& host, const RegistrySet& reg) {
    for (const auto* p : {&file, &host}) {
        reg.name_of(Table::device, p->device);
        reg.name_of(Table::gpu, p->gpu);
        reg.name_of(Table::cuda, p->cuda);
    }
    // gpu/cuda carry no meaning on a CPU platform.
    const auto gpu_of = [](const PlatformConfig& p) { return p.device == codes::kCpu ? 0 : p.gpu; };
    const auto cuda_of = [](const PlatformConfig& p) { return p.device == codes::kCpu ? 0 : p.cuda; };

    CompatReport r;
    const bool same_device = file.device == host.device;
    const bool same_gpu = gpu_of(file) == gpu_of(host);
    const bool same_cuda = cuda_of(file) == cuda_of(host);

    if (same_device && same_gpu && same_cuda) {
        r.level = CompatLevel::exact;
        r.fidelity_expectation = FidelityExpectation::bit_exact;
        if (file.device == codes::kCpu) {
            r.notes.push_back("CPU model is not recorded; recreation on a different CPU measured 73.7-80.7 dB PSNR");
        }
        return r;
    }

    if (same_device) {
        r.level = CompatLevel::same_device_class;
        if (file.device != codes::kCpu && same_gpu) {
            r.fidelity_expectation = FidelityExpectation::bit_exact;
            r.notes.push_back("same GPU model (" + reg.name_of(Table::gpu, file.gpu) +
                              "), different CUDA build: identical GPU models recreated losslessly under DDIM");
            r.notes.push_back("multi-step schedulers such as DPM++ 2M measured 57.90 dB on the same GPU model");
        } else {
            r.fidelity_expectation = FidelityExpectation::imperceptible_loss;
            r.notes.push_back("different GPU model (" + reg.name_of(Table::gpu, file.gpu) + " -> " +
                              reg.name_of(Table::gpu, host.gpu) + "): measured 58.44 dB PSNR (DDIM)");
            r.notes.push_back("scheduler-sensitive: DPM++ 2M measured 51.31 dB PSNR across GPU models");
        }
        return r;
    }

    r.level = CompatLevel::cross_class;
    r.fidelity_expectation = FidelityExpectation::imperceptible_loss;
    r.notes.push_back(std::string("cross-device recreation (") + reg.name_of(Table::device, file.device) + " -> " +
                      reg.name_of(Table::device, host.device) + "): measured 58.45 dB PSNR (DDIM)");
    r.notes.push_back("scheduler-sensitive: DPM++ 2M measured PSNR-II 51.31 dB for CPU -> GPU, above the 50 dB "
                      "imperceptibility threshold but not bit-exact");
    return r;
}

/// Parses `device,gpu,cuda` numeric codes (the `AIGIF_HOST_PLATFORM` format).
inline PlatformConfig parse_host_platform(std::string_view spec) {
    PlatformConfig p;
    std::uint8_t* targets[3] = {&p.device, &p.gpu, &p.cuda};
    for (int i = 0; i < 3; ++i) {
        const auto comma = spec.find(',');
        const std::string_view part = i < 2 ? spec.substr(0, comma) : spec;
        if ((i < 2 && comma == std::string_view::npos) || (i == 2 && spec.find(',') != std::string_view::npos)) {
            throw Error(Errc::parse, "host platform must be 'device,gpu,cuda' codes", "host platform");
        }
        unsigned v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || v > 0xFF) {
            throw Error(Errc::parse, "bad host platform code '" + std::string(part) + "'", "host platform");
        }
        *targets[i] = static_cast<std::uint8_t>(v);
        if (i < 2) spec.remove_prefix(comma + 1);
    }
    return p;
}

} // namespace aigif
