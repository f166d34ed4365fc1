#include "ifsrecur/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ifsrecur/errors.hpp"

namespace ifsrecur {
namespace {

void dump_impl(const Json& v, int indent, int depth, std::string& out) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };

  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += pretty ? ": " : ":";
        dump_impl(it.value(), indent, depth + 1, out);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Flat numeric arrays stay on one line to keep matrices readable.
      bool flat = true;
      for (const auto& e : v) flat = flat && e.is_primitive();
      out.push_back('[');
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += (flat && pretty) ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        dump_impl(e, indent, depth + 1, out);
      }
      if (!flat) newline(depth);
      out.push_back(']');
      return;
    }
    case Json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    default:
      out += v.dump();
      return;
  }
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const Json& value, int indent) {
  std::string out;
  dump_impl(value, indent, 0, out);
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Config, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Config, "cannot write " + path.string());
  out << text;
}

}  // namespace ifsrecur
