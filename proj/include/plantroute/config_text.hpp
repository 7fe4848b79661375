#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plantroute {

/// Raised by every config reader. `line()` is 1-based, 0 when the problem is
/// not tied to a particular line (missing section, unreadable file).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);

  int line() const { return line_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  int line_;
};

struct ConfigLine {
  int number = 0;
  std::string text;  // comment stripped, trimmed, never empty
};

struct ConfigSection {
  std::string name;      // e.g. "edges", "sequence"
  std::string argument;  // text after the name inside the brackets, trimmed
  int header_line = 0;
  std::vector<ConfigLine> lines;
};

/// Splits line-oriented config text into `[section]` blocks. `#` starts a
/// comment. Content before the first header is an error.
std::vector<ConfigSection> split_sections(std::string_view text,
                                          const std::string& source);

std::string read_text_file(const std::string& path);

namespace text {

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);

/// Strict integer parse; throws ConfigError on trailing garbage.
long long parse_int(std::string_view token, const std::string& source,
                    int line);
double parse_double(std::string_view token, const std::string& source,
                    int line);
bool parse_bool(std::string_view token, const std::string& source, int line);

/// Splits "key = value" (or "key=value"). Throws if no '=' is present.
std::pair<std::string, std::string> key_value(const ConfigLine& line,
                                              const std::string& source);

}  // namespace text
}  // namespace plantroute
