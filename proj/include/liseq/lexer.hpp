#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "liseq/diag.hpp"

namespace liseq {

enum class Tok {
  End,
  Ident,
  IntLit,
  // keywords
  KwBool, KwInt, KwVoid, KwInit, KwProcess, KwBegin, KwEnd,
  KwSkip, KwAssume, KwAssert, KwCall, KwReturn,
  KwWhile, KwDo, KwOd, KwIf, KwThen, KwElse, KwFi, KwAtomic,
  KwTrue, KwFalse,
  // punctuation / operators
  Semi, Colon, Comma, Assign,  // ; : , :=
  LParen, RParen, LBracket, RBracket,
  Not, OrOr, AndAnd,
  EqEq, NotEq, Lt, Le, Gt, Ge,
  Plus, Minus, Star, Slash,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  Pos pos;
};

class Lexer {
 public:
  Lexer(std::string_view src, DiagList& diags) : src_(src), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      Token t;
      t.pos = pos();
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        break;
      }
      char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t j = i_;
        while (j < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
          ++j;
        t.text = std::string(src_.substr(i_, j - i_));
        t.kind = keyword(t.text);
        advance(j - i_);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t j = i_;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        t.kind = Tok::IntLit;
        t.text = std::string(src_.substr(i_, j - i_));
        t.value = std::stoll(t.text);
        advance(j - i_);
      } else {
        t.kind = punct(t);
        if (t.kind == Tok::End && i_ < src_.size()) {
          diags_.error(t.pos, std::string("unexpected character '") + c + "'");
          advance(1);
          continue;
        }
      }
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  Pos pos() const { return Pos{line_, col_}; }

  void advance(size_t n) {
    for (size_t k = 0; k < n && i_ < src_.size(); ++k, ++i_) {
      if (src_[i_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_ws() {
    for (;;) {
      while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) advance(1);
      if (i_ + 1 < src_.size() && src_[i_] == '/' && src_[i_ + 1] == '/') {
        while (i_ < src_.size() && src_[i_] != '\n') advance(1);
        continue;
      }
      break;
    }
  }

  static Tok keyword(const std::string& s) {
    if (s == "bool") return Tok::KwBool;
    if (s == "int") return Tok::KwInt;
    if (s == "void") return Tok::KwVoid;
    if (s == "init") return Tok::KwInit;
    if (s == "process") return Tok::KwProcess;
    if (s == "begin") return Tok::KwBegin;
    if (s == "end") return Tok::KwEnd;
    if (s == "skip") return Tok::KwSkip;
    if (s == "assume") return Tok::KwAssume;
    if (s == "assert") return Tok::KwAssert;
    if (s == "call") return Tok::KwCall;
    if (s == "return") return Tok::KwReturn;
    if (s == "while") return Tok::KwWhile;
    if (s == "do") return Tok::KwDo;
    if (s == "od") return Tok::KwOd;
    if (s == "if") return Tok::KwIf;
    if (s == "then") return Tok::KwThen;
    if (s == "else") return Tok::KwElse;
    if (s == "fi") return Tok::KwFi;
    if (s == "atomic") return Tok::KwAtomic;
    if (s == "T") return Tok::KwTrue;
    if (s == "F") return Tok::KwFalse;
    return Tok::Ident;
  }

  Tok punct(Token& t) {
    auto two = [&](char a, char b) {
      return i_ + 1 < src_.size() && src_[i_] == a && src_[i_ + 1] == b;
    };
    if (two(':', '=')) { advance(2); return Tok::Assign; }
    if (two('|', '|')) { advance(2); return Tok::OrOr; }
    if (two('&', '&')) { advance(2); return Tok::AndAnd; }
    if (two('=', '=')) { advance(2); return Tok::EqEq; }
    if (two('!', '=')) { advance(2); return Tok::NotEq; }
    if (two('<', '=')) { advance(2); return Tok::Le; }
    if (two('>', '=')) { advance(2); return Tok::Ge; }
    char c = src_[i_];
    Tok k = Tok::End;
    switch (c) {
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case ',': k = Tok::Comma; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case '!': k = Tok::Not; break;
      case '<': k = Tok::Lt; break;
      case '>': k = Tok::Gt; break;
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      default: return Tok::End;
    }
    advance(1);
    return k;
  }

  std::string_view src_;
  DiagList& diags_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace liseq
