#pragma once

#include <string>

#include <json.hpp>

namespace nmq::detail {

// Formats a finite double with 12 significant digits via std::to_chars;
// locale-independent and byte-stable across runs.
std::string format_g12(double value);

// Serializes the document with format_g12 for every floating-point number,
// preserving ordered_json key order. Throws on non-finite numbers: reports
// must encode divergence through flags, never through inf/nan.
std::string dump_deterministic(const nlohmann::ordered_json& doc, int indent = 2);

}  // namespace nmq::detail
