#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mathemb {

enum class TokenClass {
  Command,
  Variable,
  Number,
  Operator,
  Relation,
  Delimiter,
  Environment,
  Other,
};

std::string_view to_string(TokenClass cls) noexcept;

struct SymbolToken {
  std::string surface;
  TokenClass cls = TokenClass::Other;

  friend bool operator==(const SymbolToken&, const SymbolToken&) = default;
};

struct TokenizedFormula {
  std::string id;
  std::vector<SymbolToken> tokens;

  friend bool operator==(const TokenizedFormula&, const TokenizedFormula&) = default;
};

/// Surface -> class lookup tables. The shipped defaults live in
/// data/tables/*.txt (one surface per line, '#' starts a comment) and are
/// compiled in as ClassTables::builtin(); load() reads an edited copy.
///
/// Rules applied before the tables: "{name}" is an ENVIRONMENT, a single
/// digit is a NUMBER, a single ASCII letter is a VARIABLE.
class ClassTables {
 public:
  static const ClassTables& builtin();

  /// Reads variables.txt, operators.txt, relations.txt, delimiters.txt and
  /// commands.txt from `dir`. Missing files are an Io error.
  static ClassTables load(const std::filesystem::path& dir);

  TokenClass classify(std::string_view surface) const;

  /// Table-file name -> class, in the order the files are consulted.
  static const std::vector<std::pair<std::string, TokenClass>>& table_files();

  const std::unordered_map<std::string, TokenClass>& entries() const { return entries_; }

  friend bool operator==(const ClassTables&, const ClassTables&) = default;

 private:
  std::unordered_map<std::string, TokenClass> entries_;
};

/// Splits a LaTeX formula into minimal symbol tokens.
///
///  - ASCII and Unicode whitespace separate tokens and never appear in one;
///    '\' followed by whitespace (control space) is a separator too.
///  - '%' up to the end of the line is a comment; "\%" is a token.
///  - '\' + letters is one control-sequence token (maximal munch);
///    '\' + one other character is one token.
///  - After \begin or \end, "{name}" (letters and '*') is one token.
///  - Every other code point (digit, letter, brace, operator, ...) is a
///    token of its own, so numerals come out digit by digit.
///
/// Throws Error{InvalidEncoding} on malformed UTF-8 and
/// Error{UnterminatedCommand} on a trailing lone backslash.
std::vector<SymbolToken> tokenize(std::string_view latex,
                                  const ClassTables& tables = ClassTables::builtin());

TokenClass classify(std::string_view surface, const ClassTables& tables = ClassTables::builtin());

/// True iff the tokens hold at least two distinct VARIABLE surfaces and at
/// least three OPERATOR or RELATION occurrences.
bool passes_filter(std::span<const SymbolToken> tokens);

std::string join_surfaces(std::span<const SymbolToken> tokens);

}  // namespace mathemb
