#include "safe/kv_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "safe/error.hpp"

namespace safe {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last) {
    fail(Errc::ParseError, "cannot parse " + std::string(what) + " from '" + t + "'");
  }
  return v;
}

KeyValueDocument KeyValueDocument::parse(std::string_view text) {
  KeyValueDocument doc;
  std::string current;
  doc.sections_[current];
  doc.order_.push_back(current);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail(Errc::ParseError, "line " + std::to_string(lineno) + ": unterminated section header");
      // Collapse runs of whitespace so "[a  b]" and "[a b]" name the same section.
      std::istringstream words(t.substr(1, t.size() - 2));
      std::string word;
      current.clear();
      while (words >> word) current += (current.empty() ? "" : " ") + word;
      if (!doc.sections_.count(current)) doc.order_.push_back(current);
      doc.sections_[current];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) fail(Errc::ParseError, "line " + std::to_string(lineno) + ": empty key");
    doc.sections_[current][key] = trim(std::string_view(t).substr(eq + 1));
  }
  return doc;
}

KeyValueDocument KeyValueDocument::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::FileMissing, "no such file: " + path.string());
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const KeyValueDocument::Section* KeyValueDocument::find(std::string_view name) const {
  auto it = sections_.find(name);
  return it == sections_.end() ? nullptr : &it->second;
}

}  // namespace safe
