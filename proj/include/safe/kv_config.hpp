#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safe {

// Flat key-value text: `key = value` lines, `#` comments and `[name]` section
// headers. Keys before the first header belong to the unnamed section "".
class KeyValueDocument {
 public:
  using Section = std::map<std::string, std::string>;

  static KeyValueDocument parse(std::string_view text);  // ParseError
  static KeyValueDocument load(const std::filesystem::path& path);  // FileMissing, ParseError

  const std::vector<std::string>& section_names() const noexcept { return order_; }
  const Section* find(std::string_view name) const;

 private:
  std::map<std::string, Section, std::less<>> sections_;
  std::vector<std::string> order_;
};

double parse_double(std::string_view text, std::string_view what);  // ParseError
std::string trim(std::string_view s);

}  // namespace safe
