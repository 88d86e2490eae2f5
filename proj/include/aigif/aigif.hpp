#pragma once

#include <aigif/bitstream.hpp>
#include <aigif/compat.hpp>
#include <aigif/container.hpp>
#include <aigif/error.hpp>
#include <aigif/inspect.hpp>
#include <aigif/manifest.hpp>
#include <aigif/manifest_json.hpp>
#include <aigif/mockgen.hpp>
#include <aigif/registry.hpp>
#include <aigif/string_block.hpp>
