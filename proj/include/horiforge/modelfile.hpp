#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "horiforge/gerbe.hpp"
#include "horiforge/tduality.hpp"

namespace hf {

/// Syntax or semantic error in a model file, with 1-based position.
struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line_, int col_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

namespace detail {

struct Token {
  enum Kind { Ident, Number, Imag, Sym, End };
  Kind kind = End;
  std::string text;   // identifier name or symbol character
  long num = 0, den = 1;
  int col = 0;
};

inline std::vector<Token> lex_line(const std::string& s, int line) {
  std::vector<Token> out;
  size_t i = 0;
  auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '#') break;  // comment to end of line
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.col = static_cast<int>(i) + 1;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      long num = 0, den = 1;
      try {
        num = std::stol(s.substr(i, j - i));
      } catch (const std::out_of_range&) {
        throw ParseError(line, t.col, "integer literal out of range");
      }
      if (j < s.size() && s[j] == '/' && j + 1 < s.size() &&
          std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        size_t k = ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        try {
          den = std::stol(s.substr(k, j - k));
        } catch (const std::out_of_range&) {
          throw ParseError(line, t.col, "integer literal out of range");
        }
        if (den == 0) throw ParseError(line, t.col, "zero denominator");
      }
      t.num = num;
      t.den = den;
      // trailing 'i' (not the head of an identifier) marks an imaginary literal
      if (j < s.size() && s[j] == 'i' && (j + 1 >= s.size() || !is_ident(s[j + 1]))) {
        t.kind = Token::Imag;
        ++j;
      } else {
        t.kind = Token::Number;
      }
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && is_ident(s[j])) ++j;
      t.kind = Token::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (std::string("+-*(),[]=").find(c) != std::string::npos) {
      t.kind = Token::Sym;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw ParseError(line, t.col, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// Cursor over one tokenized line.
struct LineCursor {
  const std::vector<Token>* toks;
  size_t pos = 0;
  int line = 0;

  const Token& peek() const {
    static const Token kEnd{};
    return pos < toks->size() ? (*toks)[pos] : kEnd;
  }
  bool done() const { return pos >= toks->size(); }
  int here() const {
    return done() ? (toks->empty() ? 1 : toks->back().col + 1) : peek().col;
  }
  const Token& next() {
    if (done()) throw ParseError(line, here(), "unexpected end of line");
    return (*toks)[pos++];
  }
  bool accept_sym(const char* s) {
    if (!done() && peek().kind == Token::Sym && peek().text == s) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect_sym(const char* s) {
    if (!accept_sym(s))
      throw ParseError(line, here(), std::string("expected '") + s + "'");
  }
  std::string expect_ident(const char* what) {
    if (done() || peek().kind != Token::Ident)
      throw ParseError(line, here(), std::string("expected ") + what);
    return next().text;
  }
  long expect_int(const char* what) {
    if (done() || peek().kind != Token::Number || peek().den != 1)
      throw ParseError(line, here(), std::string("expected ") + what);
    return next().num;
  }
  void expect_key(const char* key) {
    int c = here();
    if (done() || peek().kind != Token::Ident || peek().text != key)
      throw ParseError(line, c, std::string("expected '") + key + "='");
    ++pos;
    expect_sym("=");
  }
  void expect_end() {
    if (!done()) throw ParseError(line, here(), "trailing input");
  }
};

// expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;
// factor := '-' factor | number ['i'] | ident | '(' expr ')'
template <class R>
Form<R> parse_factor(LineCursor& c, const ModelPtr<R>& model);

template <class R>
Form<R> parse_term(LineCursor& c, const ModelPtr<R>& model) {
  Form<R> f = parse_factor(c, model);
  while (c.accept_sym("*")) f = f * parse_factor(c, model);
  return f;
}

template <class R>
Form<R> parse_expr(LineCursor& c, const ModelPtr<R>& model) {
  Form<R> f = parse_term(c, model);
  for (;;) {
    if (c.accept_sym("+"))
      f = f + parse_term(c, model);
    else if (c.accept_sym("-"))
      f = f - parse_term(c, model);
    else
      return f;
  }
}

template <class R>
Form<R> parse_factor(LineCursor& c, const ModelPtr<R>& model) {
  if (c.accept_sym("-")) return -parse_factor(c, model);
  if (c.accept_sym("(")) {
    Form<R> f = parse_expr(c, model);
    c.expect_sym(")");
    return f;
  }
  int col = c.here();
  const Token& t = c.next();
  if (t.kind == Token::Number)
    return Form<R>::scalar(model, ring<R>::from_ratio(t.num, t.den));
  if (t.kind == Token::Imag)
    return Form<R>::scalar(model,
                           ring<R>::from_ratio(t.num, t.den) * ring<R>::imag_unit());
  if (t.kind == Token::Ident) {
    if (t.text == "i") return Form<R>::scalar(model, ring<R>::imag_unit());
    int idx = model->index_of(t.text);
    if (idx < 0)
      throw ParseError(c.line, col, "unknown generator '" + t.text + "'");
    return Form<R>::generator(model, idx);
  }
  throw ParseError(c.line, col, "expected a literal, generator, or '('");
}

template <class R>
FormMatrix<R> parse_matrix(LineCursor& c, const ModelPtr<R>& model) {
  int col0 = c.here();
  c.expect_sym("[");
  std::vector<std::vector<Form<R>>> rows;
  do {
    c.expect_sym("[");
    std::vector<Form<R>> row;
    do {
      row.push_back(parse_expr(c, model));
    } while (c.accept_sym(","));
    c.expect_sym("]");
    rows.push_back(std::move(row));
  } while (c.accept_sym(","));
  c.expect_sym("]");
  int n = static_cast<int>(rows.size());
  for (const auto& r : rows)
    if (static_cast<int>(r.size()) != n)
      throw ParseError(c.line, col0, "matrix must be square");
  FormMatrix<R> m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.at(i, j) = rows[i][j];
  return m;
}

}  // namespace detail

/// Everything a model file can declare: the algebra, at most one T-dual pair
/// (two `bundle` stanzas plus an optional `flux` stanza), and named gerbe
/// modules in declaration order.
template <class R>
struct ParsedModel {
  std::shared_ptr<ModelAlgebra<R>> algebra;
  std::optional<TDualPair<R>> pair;
  std::vector<std::pair<std::string, GerbeModule<R>>> modules;

  const GerbeModule<R>* find_module(const std::string& name) const {
    for (const auto& [n, m] : modules)
      if (n == name) return &m;
    return nullptr;
  }
};

template <class R>
ParsedModel<R> parse_model_text(const std::string& text) {
  using detail::LineCursor;
  using detail::Token;

  struct Line {
    int no;
    std::vector<Token> toks;
  };
  std::vector<Line> lines;
  {
    std::istringstream in(text);
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
      ++no;
      auto toks = detail::lex_line(raw, no);
      if (!toks.empty()) lines.push_back({no, std::move(toks)});
    }
  }

  ParsedModel<R> out;
  struct Pending {
    int gen = -1;       // generator whose differential is still unparsed
    size_t line_idx;    // index into `lines`
    size_t tok_pos;     // position of the expression after `d=`
  };
  std::vector<Pending> diffs;
  std::vector<int> bundles;           // fiber generator indices, in order
  std::vector<size_t> flux_lines, module_lines;

  // pass 1: maxdeg + generator declarations (differentials may reference
  // generators declared later, so expressions wait for pass 2)
  for (size_t li = 0; li < lines.size(); ++li) {
    LineCursor c{&lines[li].toks, 0, lines[li].no};
    std::string head = c.expect_ident("a declaration keyword");
    if (head == "maxdeg") {
      if (out.algebra)
        throw ParseError(c.line, 1, "maxdeg must appear once, before anything else");
      long d = c.expect_int("a positive degree bound");
      c.expect_end();
      if (d < 1) throw ParseError(c.line, 1, "maxdeg must be >= 1");
      out.algebra = ModelAlgebra<R>::create(static_cast<int>(d));
      continue;
    }
    if (!out.algebra)
      throw ParseError(c.line, 1, "the file must start with 'maxdeg <D>'");
    if (head == "gen" || head == "bundle") {
      int col = c.here();
      std::string name = c.expect_ident("a generator name");
      if (name == "i")
        throw ParseError(c.line, col, "'i' is reserved for the imaginary unit");
      long deg = head == "gen" ? c.expect_int("a degree") : 1;
      int idx;
      try {
        idx = out.algebra->add_generator(name, static_cast<int>(deg));
      } catch (const std::invalid_argument& e) {
        throw ParseError(c.line, col, e.what());
      }
      if (head == "bundle") bundles.push_back(idx);
      if (!c.done()) {
        c.expect_key("d");
        diffs.push_back({idx, li, c.pos});
      } else if (head == "bundle") {
        throw ParseError(c.line, c.here(), "bundle needs d=<curvature expression>");
      }
    } else if (head == "flux") {
      flux_lines.push_back(li);
    } else if (head == "module") {
      module_lines.push_back(li);
    } else {
      throw ParseError(c.line, 1, "unknown declaration '" + head + "'");
    }
  }
  if (!out.algebra) throw ParseError(1, 1, "empty model file");

  // pass 2: differentials, then the dual pair
  for (const auto& p : diffs) {
    LineCursor c{&lines[p.line_idx].toks, p.tok_pos, lines[p.line_idx].no};
    int col = c.here();
    Form<R> df = detail::parse_expr<R>(c, out.algebra);
    c.expect_end();
    try {
      out.algebra->set_differential(p.gen, df);
    } catch (const std::invalid_argument& e) {
      throw ParseError(c.line, col, e.what());
    }
  }
  try {
    out.algebra->validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(1, 1, e.what());
  }

  if (!flux_lines.empty() && bundles.size() != 2)
    throw ParseError(lines[flux_lines[0]].no, 1,
                     "flux requires exactly two bundle declarations");
  if (bundles.size() == 1)
    throw ParseError(1, 1, "a dual pair needs two bundle declarations");
  if (bundles.size() > 2) throw ParseError(1, 1, "at most two bundles supported");
  if (flux_lines.size() > 1)
    throw ParseError(lines[flux_lines[1]].no, 1, "duplicate flux declaration");

  if (bundles.size() == 2) {
    Form<R> F = out.algebra->generator(bundles[0]).differential;
    Form<R> Fhat_decl = out.algebra->generator(bundles[1]).differential;
    Form<R> h3(out.algebra);
    int flux_line_no = 1;
    if (!flux_lines.empty()) {
      LineCursor c{&lines[flux_lines[0]].toks, 1, lines[flux_lines[0]].no};
      flux_line_no = c.line;
      c.expect_key("h3");
      h3 = detail::parse_expr<R>(c, out.algebra);
      c.expect_key("Fhat");
      int col = c.here();
      Form<R> Fhat = detail::parse_expr<R>(c, out.algebra);
      c.expect_end();
      if (!(Fhat == Fhat_decl))
        throw ParseError(c.line, col,
                         "Fhat must equal the declared d of the second bundle");
    }
    try {
      out.pair = TDualPair<R>::finish(out.algebra, bundles[0], bundles[1], F,
                                      Fhat_decl, h3);
    } catch (const InvalidFluxError& e) {
      throw ParseError(flux_line_no, 1, e.what());
    }
  }

  // pass 3: gerbe modules
  for (size_t li : module_lines) {
    LineCursor c{&lines[li].toks, 1, lines[li].no};
    int ncol = c.here();
    std::string name = c.expect_ident("a module name");
    if (out.find_module(name))
      throw ParseError(c.line, ncol, "duplicate module '" + name + "'");
    c.expect_key("rank");
    long rank = c.expect_int("a rank");
    c.expect_key("B");
    Form<R> B = detail::parse_expr<R>(c, out.algebra);
    int kcol = c.here();
    std::string key = c.expect_ident("'roots=' or 'conn='");
    c.expect_sym("=");
    try {
      if (key == "roots") {
        std::vector<Form<R>> roots;
        do {
          roots.push_back(detail::parse_expr<R>(c, out.algebra));
        } while (c.accept_sym(","));
        c.expect_end();
        if (static_cast<long>(roots.size()) != rank)
          throw ParseError(c.line, kcol, "root count does not match rank");
        out.modules.emplace_back(
            name, GerbeModule<R>::with_roots(out.algebra, B, std::move(roots)));
      } else if (key == "conn") {
        FormMatrix<R> m = detail::parse_matrix<R>(c, out.algebra);
        c.expect_end();
        if (m.n != rank) throw ParseError(c.line, kcol, "matrix size does not match rank");
        out.modules.emplace_back(
            name, GerbeModule<R>::with_conn(out.algebra, B, std::move(m)));
      } else {
        throw ParseError(c.line, kcol, "expected 'roots=' or 'conn='");
      }
    } catch (const InvalidModuleError& e) {
      throw ParseError(c.line, kcol, e.what());
    }
  }
  return out;
}

template <class R>
ParsedModel<R> load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_text<R>(ss.str());
}

}  // namespace hf
