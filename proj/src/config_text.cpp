#include "plantroute/config_text.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace plantroute {

namespace {

std::string format_error(const std::string& source, int line,
                         const std::string& what) {
  std::ostringstream os;
  os << source;
  if (line > 0) os << ":" << line;
  os << ": " << what;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line,
                         const std::string& what)
    : std::runtime_error(format_error(source, line, what)),
      source_(source),
      line_(line) {}

std::vector<ConfigSection> split_sections(std::string_view text,
                                          const std::string& source) {
  std::vector<ConfigSection> sections;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++number;

    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    std::string line = text::trim(raw);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(source, number, "unterminated section header");
      std::string inner = text::trim(std::string_view(line).substr(1, line.size() - 2));
      if (inner.empty()) throw ConfigError(source, number, "empty section name");
      ConfigSection section;
      auto space = inner.find_first_of(" \t");
      section.name = inner.substr(0, space);
      if (space != std::string::npos) section.argument = text::trim(inner.substr(space));
      section.header_line = number;
      sections.push_back(std::move(section));
    } else {
      if (sections.empty())
        throw ConfigError(source, number, "content before first [section]");
      sections.back().lines.push_back({number, std::move(line)});
    }
    if (end == text.size()) break;
  }
  return sections;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace text {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

long long parse_int(std::string_view token, const std::string& source,
                    int line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw ConfigError(source, line, "expected integer, got '" + std::string(token) + "'");
  return value;
}

double parse_double(std::string_view token, const std::string& source,
                    int line) {
  std::string copy(token);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(copy, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != copy.size())
    throw ConfigError(source, line, "expected number, got '" + copy + "'");
  return value;
}

bool parse_bool(std::string_view token, const std::string& source, int line) {
  if (token == "1" || token == "true" || token == "on" || token == "yes") return true;
  if (token == "0" || token == "false" || token == "off" || token == "no") return false;
  throw ConfigError(source, line, "expected boolean, got '" + std::string(token) + "'");
}

std::pair<std::string, std::string> key_value(const ConfigLine& line,
                                              const std::string& source) {
  auto eq = line.text.find('=');
  if (eq == std::string::npos)
    throw ConfigError(source, line.number, "expected 'key = value'");
  std::string key = trim(std::string_view(line.text).substr(0, eq));
  std::string value = trim(std::string_view(line.text).substr(eq + 1));
  if (key.empty()) throw ConfigError(source, line.number, "missing key");
  return {key, value};
}

}  // namespace text
}  // namespace plantroute
