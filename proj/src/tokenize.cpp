#include <cctype>

#include "srmfv/text.hpp"

namespace srmfv {

TokenizedText tokenize(const std::string& text) {
  TokenizedText out;
  std::string current;
  bool current_cap = false;
  auto flush = [&] {
    if (!current.empty()) {
      out.tokens.push_back(current);
      out.capitalized.push_back(current_cap);
      current.clear();
      current_cap = false;
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c)) {
      if (current.empty()) current_cap = std::isupper(c) != 0;
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.tokens.push_back(std::string(1, static_cast<char>(c)));
      out.capitalized.push_back(false);
    }
  }
  flush();
  if (out.tokens.empty())
    throw DataError("tokenize: empty or whitespace-only input");
  return out;
}

}  // namespace srmfv
