#include "handkin/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace handkin::toml {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Strip a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

double parse_number(const std::string& tok, int line) {
  const std::string t = trim(tok);
  if (t.empty()) fail(line, "empty number");
  double v = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) fail(line, "bad number '" + t + "'");
  return v;
}

Value parse_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty()) fail(line, "missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated array (arrays must be single-line)");
    std::vector<double> arr;
    const std::string body = v.substr(1, v.size() - 2);
    std::string tok;
    std::istringstream ss(body);
    while (std::getline(ss, tok, ',')) {
      if (trim(tok).empty() && arr.empty() && ss.eof()) break;  // "[]"
      arr.push_back(parse_number(tok, line));
    }
    return arr;
  }
  return parse_number(v, line);
}

void write_number(std::string& out, double v) {
  // Shortest representation that still round-trips exactly, so 0.3 prints as
  // "0.3" rather than "0.29999999999999999".
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(lineno, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(lineno, "bad section name '" + section + "'");
      doc[section];  // a section may legitimately be empty
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(lineno, "bad key '" + key + "'");
    auto& sec = doc[section];
    if (sec.count(key)) fail(lineno, "duplicate key '" + key + "'");
    sec[key] = parse_value(s.substr(eq + 1), lineno);
  }
  return doc;
}

std::string serialize(const Document& doc) {
  std::string out;
  auto write_section = [&out](const std::map<std::string, Value>& kv) {
    for (const auto& [key, value] : kv) {
      out += key;
      out += " = ";
      if (const auto* d = std::get_if<double>(&value)) {
        write_number(out, *d);
      } else if (const auto* b = std::get_if<bool>(&value)) {
        out += *b ? "true" : "false";
      } else if (const auto* s = std::get_if<std::string>(&value)) {
        out += '"';
        out += *s;
        out += '"';
      } else {
        const auto& arr = std::get<std::vector<double>>(value);
        out += '[';
        for (std::size_t i = 0; i < arr.size(); ++i) {
          if (i) out += ", ";
          write_number(out, arr[i]);
        }
        out += ']';
      }
      out += '\n';
    }
  };

  if (auto it = doc.find(""); it != doc.end()) write_section(it->second);
  for (const auto& [name, kv] : doc) {
    if (name.empty()) continue;
    out += "\n[";
    out += name;
    out += "]\n";
    write_section(kv);
  }
  return out;
}

}  // namespace handkin::toml
