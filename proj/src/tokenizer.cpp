#include "mathemb/tokenizer.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "builtin_tables.hpp"
#include "mathemb/error.hpp"

namespace mathemb {

std::string_view to_string(TokenClass cls) noexcept {
  switch (cls) {
    case TokenClass::Command: return "COMMAND";
    case TokenClass::Variable: return "VARIABLE";
    case TokenClass::Number: return "NUMBER";
    case TokenClass::Operator: return "OPERATOR";
    case TokenClass::Relation: return "RELATION";
    case TokenClass::Delimiter: return "DELIMITER";
    case TokenClass::Environment: return "ENVIRONMENT";
    case TokenClass::Other: return "OTHER";
  }
  return "OTHER";
}

// ---------------------------------------------------------------------------
// Classification tables
// ---------------------------------------------------------------------------

namespace {

void parse_table(std::istream& in, TokenClass cls,
                 std::unordered_map<std::string, TokenClass>& out) {
  std::string line;
  while (std::getline(in, line)) {
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    auto end = line.find_last_not_of(" \t\r");
    // first table wins, matching the lookup order in table_files()
    out.try_emplace(line.substr(begin, end - begin + 1), cls);
  }
}

bool is_ascii_letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

const std::vector<std::pair<std::string, TokenClass>>& ClassTables::table_files() {
  static const std::vector<std::pair<std::string, TokenClass>> files = {
      {"variables.txt", TokenClass::Variable},   {"operators.txt", TokenClass::Operator},
      {"relations.txt", TokenClass::Relation},   {"delimiters.txt", TokenClass::Delimiter},
      {"commands.txt", TokenClass::Command},
  };
  return files;
}

const ClassTables& ClassTables::builtin() {
  static const ClassTables tables = [] {
    ClassTables t;
    for (const auto& [name, cls] : table_files()) {
      std::istringstream in{std::string(detail::builtin_table(name))};
      parse_table(in, cls, t.entries_);
    }
    return t;
  }();
  return tables;
}

ClassTables ClassTables::load(const std::filesystem::path& dir) {
  ClassTables t;
  for (const auto& [name, cls] : table_files()) {
    std::ifstream in(dir / name);
    if (!in) throw Error(ErrorCode::Io, "cannot open classification table " + (dir / name).string());
    parse_table(in, cls, t.entries_);
  }
  return t;
}

TokenClass ClassTables::classify(std::string_view surface) const {
  if (surface.size() >= 3 && surface.front() == '{' && surface.back() == '}') return TokenClass::Environment;
  if (surface.size() == 1) {
    auto c = static_cast<unsigned char>(surface[0]);
    if (is_ascii_digit(c)) return TokenClass::Number;
    if (is_ascii_letter(c)) return TokenClass::Variable;
  }
  if (auto it = entries_.find(std::string(surface)); it != entries_.end()) return it->second;
  return TokenClass::Other;
}

TokenClass classify(std::string_view surface, const ClassTables& tables) { return tables.classify(surface); }

// ---------------------------------------------------------------------------
// Scanner
// ---------------------------------------------------------------------------

namespace {

// Length in bytes of the UTF-8 sequence starting at `pos`, or 0 if invalid.
std::size_t utf8_sequence_length(std::string_view s, std::size_t pos, char32_t* code_point) {
  auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    *code_point = b0;
    return 1;
  }
  std::size_t len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return 0;
  }
  if (pos + len > s.size()) return 0;
  for (std::size_t i = 1; i < len; ++i) {
    auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  *code_point = cp;
  return len;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\v': case '\f': case '\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

class Scanner {
 public:
  Scanner(std::string_view src, const ClassTables& tables) : src_(src), tables_(tables) {}

  std::vector<SymbolToken> run() {
    validate();
    while (pos_ < src_.size()) {
      char32_t cp;
      std::size_t len = utf8_sequence_length(src_, pos_, &cp);
      if (is_space(cp)) {
        pos_ += len;
      } else if (cp == '%') {
        skip_comment();
      } else if (cp == '\\') {
        control_sequence();
      } else {
        emit(src_.substr(pos_, len));
        pos_ += len;
      }
    }
    return std::move(tokens_);
  }

 private:
  void validate() const {
    char32_t cp;
    for (std::size_t i = 0; i < src_.size();) {
      std::size_t len = utf8_sequence_length(src_, i, &cp);
      if (len == 0) throw Error(ErrorCode::InvalidEncoding, "invalid UTF-8 at byte " + std::to_string(i));
      i += len;
    }
  }

  void skip_comment() {
    auto nl = src_.find('\n', pos_);
    pos_ = nl == std::string_view::npos ? src_.size() : nl + 1;
  }

  void control_sequence() {
    std::size_t start = pos_++;
    if (pos_ >= src_.size()) throw Error(ErrorCode::UnterminatedCommand, "trailing backslash");
    if (is_ascii_letter(static_cast<unsigned char>(src_[pos_]))) {
      while (pos_ < src_.size() && is_ascii_letter(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      auto name = src_.substr(start, pos_ - start);
      emit(name);
      if (name == "\\begin" || name == "\\end") environment_name();
      return;
    }
    char32_t cp;
    std::size_t len = utf8_sequence_length(src_, pos_, &cp);
    if (is_space(cp)) {
      // control space: a separator
      pos_ += len;
      return;
    }
    pos_ += len;
    emit(src_.substr(start, pos_ - start));
  }

  // "{name}" directly after \begin / \end, whitespace allowed in between.
  void environment_name() {
    std::size_t p = pos_;
    char32_t cp;
    while (p < src_.size()) {
      std::size_t len = utf8_sequence_length(src_, p, &cp);
      if (!is_space(cp)) break;
      p += len;
    }
    if (p >= src_.size() || src_[p] != '{') return;
    std::size_t q = p + 1;
    while (q < src_.size() && (is_ascii_letter(static_cast<unsigned char>(src_[q])) || src_[q] == '*')) ++q;
    if (q == p + 1 || q >= src_.size() || src_[q] != '}') return;
    emit(src_.substr(p, q - p + 1));
    pos_ = q + 1;
  }

  void emit(std::string_view surface) {
    tokens_.push_back(SymbolToken{std::string(surface), tables_.classify(surface)});
  }

  std::string_view src_;
  const ClassTables& tables_;
  std::size_t pos_ = 0;
  std::vector<SymbolToken> tokens_;
};

}  // namespace

std::vector<SymbolToken> tokenize(std::string_view latex, const ClassTables& tables) {
  return Scanner(latex, tables).run();
}

bool passes_filter(std::span<const SymbolToken> tokens) {
  std::unordered_set<std::string_view> variables;
  std::size_t operators = 0;
  for (const auto& t : tokens) {
    if (t.cls == TokenClass::Variable) variables.insert(t.surface);
    if (t.cls == TokenClass::Operator || t.cls == TokenClass::Relation) ++operators;
  }
  return variables.size() >= 2 && operators >= 3;
}

std::string join_surfaces(std::span<const SymbolToken> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

}  // namespace mathemb
