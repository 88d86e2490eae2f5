#include <aigif/aigif.hpp>

#include <cstddef>
#include <cstdint>

extern "C" int LLVMFuzzerTestOneInput(const std::uint8_t* data, std::size_t size) {
    static const aigif::RegistrySet reg = aigif::builtin_registry();
    try {
        const auto m = aigif::decode({data, size}, reg);
        // Other zlib settings are accepted on input, so only the manifest is a fixpoint.
        const auto again = aigif::encode(m, reg);
        if (!(aigif::decode(again, reg) == m) || aigif::encode(m, reg) != again) __builtin_trap();
        aigif::Trace trace;
        aigif::decode({data, size}, reg, &trace);
    } catch (const aigif::Error&) {
    }
    return 0;
}
