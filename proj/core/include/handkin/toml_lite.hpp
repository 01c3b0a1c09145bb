#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace handkin::toml {

// Strict parser for the flat TOML subset the config file uses:
//   [section] headers, key = value, # comments, values that are numbers,
//   booleans, "strings", or single-line arrays of numbers.
// Anything else is a ParseError with the offending line number.

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Value = std::variant<double, bool, std::string, std::vector<double>>;

// section -> key -> value; top-level keys live under the "" section.
using Document = std::map<std::string, std::map<std::string, Value>>;

Document parse(const std::string& text);

std::string serialize(const Document& doc);

}  // namespace handkin::toml
