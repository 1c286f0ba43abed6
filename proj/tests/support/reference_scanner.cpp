#include "reference_scanner.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace mathemb::testing {

namespace {

std::vector<char32_t> decode(const std::string& s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : c >= 0xF0 ? 3 : c >= 0xE0 ? 2 : 1;
    char32_t cp = extra == 0 ? c : extra == 1 ? (c & 0x1F) : extra == 2 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k <= extra; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += 1 + extra;
  }
  return out;
}

std::string encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

bool letter(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool blank(char32_t c) {
  static const std::set<char32_t> extra = {0x85, 0xA0, 0x1680, 0x2028, 0x2029, 0x202F, 0x205F, 0x3000};
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || (c >= 0x2000 && c <= 0x200A) || extra.count(c) > 0;
}

}  // namespace

ReferenceScanner::ReferenceScanner(const std::filesystem::path& table_dir) {
  const std::pair<const char*, const char*> files[] = {{"variables.txt", "VARIABLE"},   {"operators.txt", "OPERATOR"},
                                                       {"relations.txt", "RELATION"},   {"delimiters.txt", "DELIMITER"},
                                                       {"commands.txt", "COMMAND"}};
  for (auto [file, cls] : files) {
    std::ifstream in(table_dir / file);
    if (!in) throw std::runtime_error("missing table " + std::string(file));
    std::string word;
    std::string line;
    while (std::getline(in, line)) {
      std::size_t a = 0;
      while (a < line.size() && (line[a] == ' ' || line[a] == '\t')) ++a;
      std::size_t b = line.size();
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t' || line[b - 1] == '\r')) --b;
      if (a == b || line[a] == '#') continue;
      table_.emplace(line.substr(a, b - a), cls);  // emplace keeps the earlier file
    }
  }
}

std::string ReferenceScanner::class_of(const std::string& s) const {
  if (s.size() > 2 && s.front() == '{' && s.back() == '}') return "ENVIRONMENT";
  if (s.size() == 1 && s[0] >= '0' && s[0] <= '9') return "NUMBER";
  if (s.size() == 1 && letter(static_cast<unsigned char>(s[0]))) return "VARIABLE";
  auto it = table_.find(s);
  return it == table_.end() ? "OTHER" : it->second;
}

std::vector<ReferenceScanner::Token> ReferenceScanner::scan(const std::string& latex) const {
  const auto cps = decode(latex);
  std::vector<std::string> surfaces;
  bool after_begin_end = false;
  std::size_t i = 0;
  while (i < cps.size()) {
    char32_t c = cps[i];
    if (blank(c)) {
      ++i;
      continue;
    }
    if (c == '%') {
      after_begin_end = false;
      while (i < cps.size() && cps[i] != '\n') ++i;
      continue;
    }
    if (after_begin_end && c == '{') {
      std::size_t j = i + 1;
      std::string name = "{";
      while (j < cps.size() && (letter(cps[j]) || cps[j] == '*')) name += static_cast<char>(cps[j++]);
      after_begin_end = false;
      if (j < cps.size() && cps[j] == '}' && name.size() > 1) {
        surfaces.push_back(name + "}");
        i = j + 1;
        continue;
      }
    }
    after_begin_end = false;
    if (c == '\\') {
      if (i + 1 >= cps.size()) throw std::runtime_error("trailing backslash");
      std::string cs = "\\";
      std::size_t j = i + 1;
      if (letter(cps[j])) {
        while (j < cps.size() && letter(cps[j])) cs += static_cast<char>(cps[j++]);
        after_begin_end = cs == "\\begin" || cs == "\\end";
        surfaces.push_back(cs);
      } else if (blank(cps[j])) {
        ++j;
      } else {
        surfaces.push_back(cs + encode(cps[j]));
        ++j;
      }
      i = j;
      continue;
    }
    surfaces.push_back(encode(c));
    ++i;
  }
  std::vector<Token> out;
  for (auto& s : surfaces) out.push_back(Token{s, class_of(s)});
  return out;
}

bool ReferenceScanner::filter(const std::string& latex) const {
  std::set<std::string> vars;
  int ops = 0;
  for (const auto& t : scan(latex)) {
    if (t.cls == "VARIABLE") vars.insert(t.surface);
    if (t.cls == "OPERATOR" || t.cls == "RELATION") ++ops;
  }
  return vars.size() > 1 && ops > 2;
}

}  // namespace mathemb::testing
