#pragma once

// Textual frontend: lexer and recursive-descent parser for the .tm DSL.
// Paths are always written absolute; stage keywords are reserved and may
// only appear as the terminal segment of a path.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/class_spec.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

// Parsed file: the model, a span for every parsed element, class
// declarations, and whatever validation found. An empty diagnostics list
// means the model is well formed.
struct Document {
  Model model;
  std::map<std::string, SourceSpan> source_map;
  std::vector<ClassSpec> classes;
  std::vector<Diagnostic> diagnostics;
};

namespace dsl {

enum class TokKind {
  Name, Int, String,
  LBrace, RBrace, LParen, RParen,
  Colon, Comma, Semi, Dot,
  Arrow, FatArrow, EqEq, NotEq,
  End,
};

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  SourceSpan span;
};

inline bool is_hard_keyword(std::string_view s) {
  static const std::set<std::string_view> kw = {
      "machine", "stage", "flow", "trigger", "event", "chronology", "program",
      "class", "of", "if", "else", "repeat", "extends", "attr", "method",
      "meta", "null", "create", "process", "receive", "release", "transfer"};
  return kw.count(s) != 0;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      Token t = next_token();
      bool end = t.kind == TokKind::End;
      out.push_back(std::move(t));
      if (end) return out;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& message, int length = 1) {
    throw Error("PARSE", message, SourceSpan{line_, column_, length});
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '#') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        return;
      }
    }
  }

  Token next_token() {
    if (pos_ >= text_.size()) return Token{TokKind::End, "", {line_, column_, 0}};
    SourceSpan span{line_, column_, 1};
    char c = peek();

    if (is_name_start(c)) {
      std::string name;
      while (pos_ < text_.size() && is_name_char(peek())) name += advance();
      span.length = static_cast<int>(name.size());
      return Token{TokKind::Name, std::move(name), span};
    }
    if (c >= '0' && c <= '9') return lex_int(span, "");
    if (c == '"') return lex_string(span);

    advance();
    switch (c) {
      case '{': return Token{TokKind::LBrace, "{", span};
      case '}': return Token{TokKind::RBrace, "}", span};
      case '(': return Token{TokKind::LParen, "(", span};
      case ')': return Token{TokKind::RParen, ")", span};
      case ':': return Token{TokKind::Colon, ":", span};
      case ',': return Token{TokKind::Comma, ",", span};
      case ';': return Token{TokKind::Semi, ";", span};
      case '.': return Token{TokKind::Dot, ".", span};
      case '-':
        if (peek() == '>') {
          advance();
          span.length = 2;
          return Token{TokKind::Arrow, "->", span};
        }
        if (peek() >= '0' && peek() <= '9') return lex_int(span, "-");
        fail("expected '->' or a number after '-'");
      case '=':
        if (peek() == '=') {
          advance();
          span.length = 2;
          return Token{TokKind::EqEq, "==", span};
        }
        if (peek() == '>') {
          advance();
          span.length = 2;
          return Token{TokKind::FatArrow, "=>", span};
        }
        fail("expected '==' or '=>' after '='");
      case '!':
        if (peek() == '=') {
          advance();
          span.length = 2;
          return Token{TokKind::NotEq, "!=", span};
        }
        fail("expected '!=' after '!'");
      case '+':
        if (peek() >= '0' && peek() <= '9') return lex_int(span, "+");
        fail("expected a number after '+'");
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  Token lex_int(SourceSpan span, std::string prefix) {
    std::string digits = std::move(prefix);
    while (pos_ < text_.size() && peek() >= '0' && peek() <= '9') digits += advance();
    span.length = static_cast<int>(digits.size());
    return Token{TokKind::Int, std::move(digits), span};
  }

  Token lex_string(SourceSpan span) {
    advance();  // opening quote
    std::string value;
    while (true) {
      if (pos_ >= text_.size() || peek() == '\n')
        throw Error("PARSE", "unterminated string", span);
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= text_.size()) throw Error("PARSE", "unterminated string", span);
        char esc = advance();
        switch (esc) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          default: throw Error("PARSE", std::string("unknown escape '\\") + esc + "'", span);
        }
      } else {
        value += c;
      }
    }
    span.length = column_ - span.column;
    return Token{TokKind::String, std::move(value), span};
  }

  static bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Document run() {
    while (!at(TokKind::End)) parse_item();
    doc_.diagnostics = validate(doc_.model);
    std::vector<Diagnostic> dynamic = validate_dynamics(doc_.model);
    doc_.diagnostics.insert(doc_.diagnostics.end(), dynamic.begin(), dynamic.end());
    std::stable_sort(doc_.diagnostics.begin(), doc_.diagnostics.end(), diagnostic_order);
    return std::move(doc_);
  }

 private:
  static constexpr int max_nesting = 256;

  const Token& peek() const { return tokens_[pos_]; }
  bool at(TokKind k) const { return peek().kind == k; }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == TokKind::Name && peek().text == kw;
  }

  Token take() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& message) {
    SourceSpan at = peek().span;
    if (peek().kind == TokKind::End && pos_ > 0) at = tokens_[pos_ - 1].span;
    throw Error("PARSE", message, at);
  }

  Token expect(TokKind k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    return take();
  }

  Token expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail("expected '" + std::string(kw) + "'");
    return take();
  }

  // A fresh identifier: hard keywords are reserved.
  Token expect_name(const char* what) {
    if (!at(TokKind::Name)) fail(std::string("expected ") + what);
    if (is_hard_keyword(peek().text))
      fail("'" + peek().text + "' is a reserved word");
    return take();
  }

  Path parse_dotted_path() {
    Path p;
    SourceSpan start = peek().span;
    while (true) {
      Token t = expect(TokKind::Name, "a path segment");
      if (auto kind = stage_from_keyword(t.text)) {
        p.stage = kind;
        if (at(TokKind::Dot))
          throw Error("PARSE", "stage keyword must end the path", t.span);
        break;
      }
      if (is_hard_keyword(t.text))
        throw Error("PARSE", "'" + t.text + "' is a reserved word", t.span);
      p.segments.push_back(t.text);
      if (!at(TokKind::Dot)) break;
      take();
    }
    if (p.segments.empty())
      throw Error("PARSE", "path needs at least one machine segment", start);
    return p;
  }

  void parse_item() {
    if (at_keyword("machine")) {
      Machine m = parse_machine(Path{}, 0);
      doc_.model.machines.push_back(std::move(m));
    } else if (at_keyword("flow")) {
      parse_flow();
    } else if (at_keyword("trigger")) {
      parse_trigger();
    } else if (at_keyword("event")) {
      parse_event();
    } else if (at_keyword("chronology")) {
      parse_chronology();
    } else if (at_keyword("program")) {
      parse_program();
    } else if (at_keyword("class")) {
      parse_class();
    } else {
      fail("expected a top-level declaration");
    }
  }

  Machine parse_machine(const Path& parent, int depth) {
    if (depth > max_nesting) fail("machine nesting too deep");
    expect_keyword("machine");
    Token name = expect_name("a machine name");
    Machine m;
    m.name = name.text;
    Path here = parent.child(m.name);
    doc_.source_map[here.text()] = name.span;
    if (at_keyword("of")) {
      take();
      m.of_owner = parse_dotted_path();
    }
    expect(TokKind::LBrace, "'{'");
    while (!at(TokKind::RBrace)) {
      if (at_keyword("stage")) {
        Token kw = take();
        Token stage = expect(TokKind::Name, "a stage kind");
        auto kind = stage_from_keyword(stage.text);
        if (!kind) throw Error("PARSE", "unknown stage kind '" + stage.text + "'", stage.span);
        if (!m.stages.insert(*kind).second)
          throw Error("PARSE", "duplicate stage '" + stage.text + "'", kw.span);
        doc_.source_map[here.with_stage(*kind).text()] = stage.span;
      } else if (at_keyword("meta")) {
        take();
        Token key = expect_name("a metadata key");
        expect(TokKind::Colon, "':'");
        Token value = expect(TokKind::String, "a string");
        m.metadata[key.text] = value.text;
      } else if (at_keyword("machine")) {
        m.children.push_back(parse_machine(here, depth + 1));
      } else if (at_keyword("flow")) {
        parse_flow();
      } else if (at_keyword("trigger")) {
        parse_trigger();
      } else {
        fail("expected a machine member");
      }
    }
    expect(TokKind::RBrace, "'}'");
    return m;
  }

  void parse_flow() {
    Token kw = expect_keyword("flow");
    Path from = parse_dotted_path();
    expect(TokKind::Arrow, "'->'");
    Path to = parse_dotted_path();
    doc_.source_map["flow#" + std::to_string(doc_.model.flows.size())] = kw.span;
    doc_.model.flows.push_back(Flow{std::move(from), std::move(to)});
  }

  void parse_trigger() {
    Token kw = expect_keyword("trigger");
    Path from = parse_dotted_path();
    expect(TokKind::FatArrow, "'=>'");
    Path to = parse_dotted_path();
    doc_.source_map["trigger#" + std::to_string(doc_.model.triggers.size())] = kw.span;
    doc_.model.triggers.push_back(Trigger{std::move(from), std::move(to)});
  }

  void parse_event() {
    expect_keyword("event");
    Token name = expect_name("an event name");
    Event e;
    e.id = name.text;
    doc_.source_map["event:" + e.id] = name.span;
    if (at(TokKind::String)) e.label = take().text;
    expect(TokKind::LBrace, "'{'");
    if (!at_keyword("region")) fail("expected 'region'");
    take();
    expect(TokKind::Colon, "':'");
    e.region.push_back(parse_dotted_path());
    while (at(TokKind::Comma)) {
      take();
      e.region.push_back(parse_dotted_path());
    }
    canonicalize_region(e.region);
    if (at_keyword("kind")) {
      take();
      expect(TokKind::Colon, "':'");
      Token tag = expect(TokKind::Name, "an event kind");
      auto kind = event_kind_from_name(tag.text);
      if (!kind) throw Error("PARSE", "unknown event kind '" + tag.text + "'", tag.span);
      e.kind = *kind;
      if (e.kind == EventKind::Set || e.kind == EventKind::Get) {
        expect(TokKind::LParen, "'('");
        e.attr = expect_name("an attribute name").text;
        expect(TokKind::RParen, "')'");
      }
    }
    if (at_keyword("time")) {
      take();
      expect(TokKind::Colon, "':'");
      e.time = expect(TokKind::String, "a string").text;
    }
    if (at_keyword("meta")) {
      take();
      expect(TokKind::Colon, "':'");
      e.meta = expect(TokKind::String, "a string").text;
    }
    expect(TokKind::RBrace, "'}'");
    doc_.model.events.push_back(std::move(e));
  }

  void parse_chronology() {
    expect_keyword("chronology");
    expect(TokKind::LBrace, "'{'");
    while (!at(TokKind::RBrace)) {
      std::string before = expect_name("an event id").text;
      expect(TokKind::Arrow, "'->'");
      std::string after = expect_name("an event id").text;
      doc_.model.chronology.insert({std::move(before), std::move(after)});
    }
    expect(TokKind::RBrace, "'}'");
  }

  void parse_program() {
    expect_keyword("program");
    Token name = expect_name("a program name");
    Program p;
    p.name = name.text;
    doc_.source_map["program:" + p.name] = name.span;
    expect(TokKind::LBrace, "'{'");
    p.body = parse_block(0);
    expect(TokKind::RBrace, "'}'");
    doc_.model.programs.push_back(std::move(p));
  }

  std::vector<Stmt> parse_block(int depth) {
    if (depth > max_nesting) fail("statement nesting too deep");
    std::vector<Stmt> block;
    while (!at(TokKind::RBrace)) {
      if (at_keyword("if")) {
        take();
        Cond cond;
        cond.lhs = parse_dotted_path();
        if (at(TokKind::EqEq)) {
          take();
        } else if (at(TokKind::NotEq)) {
          take();
          cond.negated = true;
        } else {
          fail("expected '==' or '!='");
        }
        cond.rhs = parse_literal();
        expect(TokKind::LBrace, "'{'");
        std::vector<Stmt> then_block = parse_block(depth + 1);
        expect(TokKind::RBrace, "'}'");
        std::optional<std::vector<Stmt>> else_block;
        if (at_keyword("else")) {
          take();
          expect(TokKind::LBrace, "'{'");
          else_block = parse_block(depth + 1);
          expect(TokKind::RBrace, "'}'");
        }
        block.push_back(Stmt::branch(std::move(cond), std::move(then_block), std::move(else_block)));
      } else if (at_keyword("repeat")) {
        take();
        Token count = expect(TokKind::Int, "a repeat count");
        long long n = 0;
        try {
          n = std::stoll(count.text);
        } catch (const std::exception&) {
          throw Error("PARSE", "repeat count out of range", count.span);
        }
        if (n < 0) throw Error("PARSE", "repeat count must not be negative", count.span);
        expect(TokKind::LBrace, "'{'");
        std::vector<Stmt> body = parse_block(depth + 1);
        expect(TokKind::RBrace, "'}'");
        block.push_back(Stmt::repeat(n, std::move(body)));
      } else {
        Token id = expect_name("an event id");
        expect(TokKind::Semi, "';'");
        block.push_back(Stmt::fire(id.text));
      }
    }
    return block;
  }

  Literal parse_literal() {
    Literal lit;
    if (at_keyword("null")) {
      take();
      lit.is_null = true;
    } else if (at(TokKind::String)) {
      lit.quoted = true;
      lit.text = take().text;
    } else if (at(TokKind::Int)) {
      lit.text = take().text;
    } else {
      fail("expected a literal (string, integer, or null)");
    }
    return lit;
  }

  void parse_class() {
    expect_keyword("class");
    Token name = expect_name("a class name");
    ClassSpec spec;
    spec.name = name.text;
    doc_.source_map["class:" + spec.name] = name.span;
    if (at_keyword("extends")) {
      take();
      spec.superclass = expect_name("a class name").text;
    }
    expect(TokKind::LBrace, "'{'");
    std::vector<std::string> method_names;
    while (!at(TokKind::RBrace)) {
      if (at_keyword("attr")) {
        take();
        Token attr = expect_name("an attribute name");
        expect(TokKind::Colon, "':'");
        Token type = expect_name("a type name");
        expect(TokKind::Semi, "';'");
        spec.attributes.push_back(Attribute{attr.text, type.text});
      } else if (at_keyword("method")) {
        take();
        method_names.push_back(expect_name("a method name").text);
        expect(TokKind::Semi, "';'");
      } else {
        fail("expected 'attr' or 'method'");
      }
    }
    expect(TokKind::RBrace, "'}'");
    for (std::string& mn : method_names)
      spec.methods.push_back(classify_method(spec, std::move(mn)));
    doc_.classes.push_back(std::move(spec));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Document doc_;
};

}  // namespace dsl

// Parses DSL text. Throws Error("PARSE", ...) with a span on syntax errors;
// validation findings for a syntactically well-formed document land in
// Document::diagnostics.
inline Document parse(std::string_view text) {
  dsl::Lexer lexer(text);
  dsl::Parser parser(lexer.run());
  return parser.run();
}

}  // namespace tmkit
