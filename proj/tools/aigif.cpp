// aigif: pack, unpack, inspect, size-report and compat-check AIGIF files.

#include <aigif/aigif.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <unistd.h>

namespace fs = std::filesystem;

namespace {

aigif::Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw aigif::Error(aigif::Errc::io, "cannot open '" + path + "'", path);
    return aigif::Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

/// Writes via a sibling temp file and renames, so failures never leave a
/// partial output behind.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw aigif::Error(aigif::Errc::io, "cannot write '" + tmp.string() + "'", path);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw aigif::Error(aigif::Errc::io, "write to '" + tmp.string() + "' failed", path);
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw aigif::Error(aigif::Errc::io, "cannot rename onto '" + path + "'", path);
    }
}

void write_text_atomic(const std::string& path, const std::string& text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

aigif::RegistrySet load_registry(const std::string& path) {
    auto reg = aigif::builtin_registry();
    return path.empty() ? reg : aigif::load_registry_file(reg, path);
}

std::optional<aigif::PlatformConfig> host_platform(const std::string& flag) {
    if (!flag.empty()) return aigif::parse_host_platform(flag);
    if (const char* env = std::getenv("AIGIF_HOST_PLATFORM"); env && *env) return aigif::parse_host_platform(env);
    return std::nullopt;
}

std::string ratio_text(const aigif::SizeReport& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", r.ratio);
    return buf;
}

struct PackArgs {
    std::string manifest, out, pixels, model_payload, registry;
};

int run_pack(const PackArgs& a) {
    const auto reg = load_registry(a.registry);
    const std::string text = aigif::read_text_file(a.manifest);
    auto doc = aigif::manifest_from_json_text(text, reg);
    auto& m = doc.manifest;
    const fs::path base = fs::path(a.manifest).parent_path();

    const auto attach = [&](bool flag_set, const std::string& cli_path, const std::optional<std::string>& ref,
                            std::optional<aigif::Bytes>& slot, const char* what, const char* option) {
        if (!cli_path.empty() && !flag_set) {
            throw aigif::Error(aigif::Errc::consistency,
                               std::string(option) + " given but the manifest's saving flag for the " + what +
                                   " is false",
                               what);
        }
        if (!flag_set) {
            if (ref) {
                throw aigif::Error(aigif::Errc::consistency,
                                   std::string("manifest references a ") + what + " but its saving flag is false", what);
            }
            return;
        }
        std::string path = cli_path;
        if (path.empty() && ref) path = fs::path(*ref).is_absolute() ? *ref : (base / *ref).string();
        if (path.empty()) {
            throw aigif::Error(aigif::Errc::consistency,
                               std::string("saving flag set but no ") + what + " given (use " + option + ")", what);
        }
        slot = read_file(path);
    };
    attach(m.options.saving_pixels, a.pixels, doc.pixel_payload_file, m.pixel_payload, "pixel payload", "--pixels");
    attach(m.options.saving_model, a.model_payload, doc.model_payload_file, m.model_payload, "model payload",
           "--model-payload");

    const auto bytes = aigif::encode(m, reg);
    write_file_atomic(a.out, bytes);
    const aigif::SizeReport r{bytes.size(), std::uint64_t{m.data.height} * m.data.width * 3,
                              static_cast<double>(std::uint64_t{m.data.height} * m.data.width * 3) /
                                  static_cast<double>(bytes.size())};
    std::cout << "wrote " << a.out << ": " << r.encoded_bytes << " bytes (raw pixels " << r.raw_pixel_bytes
              << " bytes, ratio " << ratio_text(r) << ":1)\n";
    return 0;
}

struct UnpackArgs {
    std::string input, manifest, pixels_out, model_out, mock_recreate, registry, host;
};

int run_unpack(const UnpackArgs& a) {
    const auto reg = load_registry(a.registry);
    const auto bytes = read_file(a.input);
    const auto m = aigif::decode(bytes, reg);

    const fs::path manifest_dir = a.manifest.empty() ? fs::path() : fs::path(a.manifest).parent_path();
    const auto reference = [&](const std::string& path) {
        if (a.manifest.empty()) return path;
        return fs::path(path).lexically_proximate(manifest_dir.empty() ? fs::path(".") : manifest_dir).string();
    };
    const auto default_payload_path = [&](const char* suffix) {
        const std::string stem = a.manifest.empty() ? a.input : (manifest_dir / fs::path(a.manifest).stem()).string();
        return stem + suffix;
    };

    std::optional<std::string> pixel_ref, model_ref;
    std::string pixel_path;
    if (m.pixel_payload) {
        pixel_path = a.pixels_out.empty()
                         ? default_payload_path(m.options.pixel_compressor == aigif::codes::kPng ? ".pixels.png"
                                                                                                 : ".pixels.bin")
                         : a.pixels_out;
        write_file_atomic(pixel_path, *m.pixel_payload);
        pixel_ref = reference(pixel_path);
    } else if (!a.pixels_out.empty()) {
        std::cerr << "aigif: warning: file carries no pixel payload; --pixels-out ignored\n";
    }
    if (m.model_payload) {
        const std::string path = a.model_out.empty() ? default_payload_path(".model.bin") : a.model_out;
        write_file_atomic(path, *m.model_payload);
        model_ref = reference(path);
    }

    if (!a.mock_recreate.empty()) {
        if (auto host = host_platform(a.host)) {
            const auto report = aigif::check_compat(m.platform, *host, reg);
            if (report.level != aigif::CompatLevel::exact) {
                std::cerr << "aigif: warning: host platform is " << aigif::to_string(report.level)
                          << " to the file's platform (" << aigif::to_string(report.fidelity_expectation) << ")\n";
                if (m.pixel_payload) {
                    std::cerr << "aigif: warning: prefer the embedded pixels at " << pixel_path
                              << " for exact reproduction\n";
                }
            }
        }
        const auto image = aigif::generate(m, reg);
        write_file_atomic(a.mock_recreate, aigif::to_ppm(image));
    }

    const std::string json = aigif::manifest_to_json(m, reg, pixel_ref, model_ref).dump(2) + "\n";
    if (a.manifest.empty()) {
        std::cout << json;
    } else {
        write_text_atomic(a.manifest, json);
    }
    return 0;
}

int run_inspect(const std::string& input, const std::string& registry) {
    const auto reg = load_registry(registry);
    std::cout << aigif::inspect(read_file(input), reg);
    return 0;
}

int run_size(const std::string& input, const std::string& registry) {
    const auto reg = load_registry(registry);
    const auto bytes = read_file(input);
    const auto r = aigif::size_report(aigif::decode(bytes, reg), reg);
    std::cout << "encoded bytes: " << r.encoded_bytes << "\n"
              << "raw pixel bytes: " << r.raw_pixel_bytes << "\n"
              << "ratio: " << ratio_text(r) << "\n";
    return 0;
}

int run_compat(const std::string& input, const std::string& registry, const std::string& host_flag) {
    const auto reg = load_registry(registry);
    const auto m = aigif::decode(read_file(input), reg);
    const auto host = host_platform(host_flag);
    if (!host) {
        throw aigif::Error(aigif::Errc::parse, "no host platform: pass --host or set AIGIF_HOST_PLATFORM=device,gpu,cuda",
                           "host platform");
    }
    const auto r = aigif::check_compat(m.platform, *host, reg);
    std::cout << "file platform: " << reg.name_of(aigif::Table::device, m.platform.device) << ", "
              << reg.name_of(aigif::Table::gpu, m.platform.gpu) << ", " << reg.name_of(aigif::Table::cuda, m.platform.cuda)
              << "\n"
              << "host platform: " << reg.name_of(aigif::Table::device, host->device) << ", "
              << reg.name_of(aigif::Table::gpu, host->gpu) << ", " << reg.name_of(aigif::Table::cuda, host->cuda) << "\n"
              << "level: " << aigif::to_string(r.level) << "\n"
              << "fidelity: " << aigif::to_string(r.fidelity_expectation) << "\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"AIGIF codec: stores AI-generated images as compressed generation settings"};
    app.require_subcommand(1, 1);

    PackArgs pack;
    auto* pack_cmd = app.add_subcommand("pack", "Encode a JSON manifest into an AIGIF file");
    pack_cmd->add_option("manifest", pack.manifest, "Manifest JSON")->required();
    pack_cmd->add_option("out", pack.out, "Output AIGIF file")->required();
    pack_cmd->add_option("--pixels", pack.pixels, "Pixel payload to embed (requires saving_pixels)");
    pack_cmd->add_option("--model-payload", pack.model_payload, "Model payload to embed (requires saving_model)");
    pack_cmd->add_option("--registry", pack.registry, "Additional registry file");

    UnpackArgs unpack;
    auto* unpack_cmd = app.add_subcommand("unpack", "Decode an AIGIF file into a JSON manifest");
    unpack_cmd->add_option("input", unpack.input, "AIGIF file")->required();
    unpack_cmd->add_option("--manifest", unpack.manifest, "Write manifest JSON here (default: stdout)");
    unpack_cmd->add_option("--pixels-out", unpack.pixels_out, "Write the embedded pixel payload here");
    unpack_cmd->add_option("--model-payload-out", unpack.model_out, "Write the embedded model payload here");
    unpack_cmd->add_option("--mock-recreate", unpack.mock_recreate, "Run the mock generator and write a PPM here");
    unpack_cmd->add_option("--registry", unpack.registry, "Additional registry file");
    unpack_cmd->add_option("--host", unpack.host, "Host platform as device,gpu,cuda codes");

    std::string input, registry, host;
    auto* inspect_cmd = app.add_subcommand("inspect", "Dump every field with offsets");
    inspect_cmd->add_option("input", input, "AIGIF file")->required();
    inspect_cmd->add_option("--registry", registry, "Additional registry file");

    auto* size_cmd = app.add_subcommand("size", "Report encoded size against raw pixel size");
    size_cmd->add_option("input", input, "AIGIF file")->required();
    size_cmd->add_option("--registry", registry, "Additional registry file");

    auto* compat_cmd = app.add_subcommand("compat", "Check the file's platform against a host platform");
    compat_cmd->add_option("input", input, "AIGIF file")->required();
    compat_cmd->add_option("--registry", registry, "Additional registry file");
    compat_cmd->add_option("--host", host, "Host platform as device,gpu,cuda codes (else AIGIF_HOST_PLATFORM)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pack_cmd) return run_pack(pack);
        if (*unpack_cmd) return run_unpack(unpack);
        if (*inspect_cmd) return run_inspect(input, registry);
        if (*size_cmd) return run_size(input, registry);
        if (*compat_cmd) return run_compat(input, registry, host);
    } catch (const aigif::Error& e) {
        std::cerr << "aigif: error [" << aigif::errc_name(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "aigif: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
