#include "report_io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace nmq::detail {
namespace {

void dump_value(const nlohmann::ordered_json& v, std::string& out, int indent,
                int depth) {
  const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  const std::string closing_pad(static_cast<std::size_t>(indent) * depth, ' ');
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += nlohmann::ordered_json(key).dump();
        out += ": ";
        dump_value(item, out, indent, depth + 1);
      }
      out += "\n" + closing_pad + "}";
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump_value(item, out, indent, depth + 1);
      }
      out += "\n" + closing_pad + "]";
      return;
    }
    case nlohmann::ordered_json::value_t::number_float:
      out += format_g12(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string format_g12(double value) {
  if (!std::isfinite(value)) {
    throw std::logic_error("attempted to serialize a non-finite number");
  }
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string dump_deterministic(const nlohmann::ordered_json& doc, int indent) {
  std::string out;
  dump_value(doc, out, indent, 0);
  out += "\n";
  return out;
}

}  // namespace nmq::detail
