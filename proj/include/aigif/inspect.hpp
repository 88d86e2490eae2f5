#pragma once

#include <aigif/container.hpp>
#include <aigif/registry.hpp>

#include <cstdio>
#include <span>
#include <string>

namespace aigif {

/// Human-readable field dump of an AIGIF file. Each line gives the field's
/// location as byte.bit (string-table entries are relative to the
/// decompressed table, prefixed "str"), its width in bits, the raw value and
/// the resolved name where one exists. The layout is stable.
inline std::string inspect(std::span<const std::uint8_t> bytes, const RegistrySet& reg) {
    Trace trace;
    decode(bytes, reg, &trace);

    std::string out = "AIGIF file, " + std::to_string(bytes.size()) + " bytes\n";
    std::string section;
    for (const auto& e : trace) {
        if (e.section != section) {
            section = e.section;
            out += "[" + section + "]\n";
        }
        char loc[48];
        std::snprintf(loc, sizeof loc, "%s%zu.%zu", e.in_string_table ? "str " : "", e.bit_offset / 8,
                      e.bit_offset % 8);
        char line[96];
        std::snprintf(line, sizeof line, "  %-10s %6zub  ", loc, e.bit_width);
        out += line;
        out += e.field + ": " + e.raw;
        if (!e.resolved.empty()) out += " (" + e.resolved + ")";
        out += '\n';
    }
    return out;
}

} // namespace aigif
