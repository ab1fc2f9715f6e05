#include "jmlbench/ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>

namespace jmlbench {

namespace {

const char* kKeywords[] = {
    "abstract", "assert",     "boolean",  "break",     "byte",   "case",
    "catch",    "char",       "class",    "const",     "continue", "default",
    "do",       "double",     "else",     "enum",      "extends", "final",
    "finally",  "float",      "for",      "goto",      "if",      "implements",
    "import",   "instanceof", "int",      "interface", "long",    "native",
    "new",      "package",    "private",  "protected", "public",  "return",
    "short",    "static",     "strictfp", "super",     "switch",  "synchronized",
    "this",     "throw",      "throws",   "transient", "try",     "void",
    "volatile", "while",
};

bool is_keyword(std::string_view s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool ident_part(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Multi-character operators, longest first.
const char* kOperators[] = {
    ">>>=", "<<=", ">>=", ">>>", "...", "==", "!=", "<=", ">=", "&&", "||",
    "++",  "--",  "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "<<",
    ">>",  "->",  "::",
};

}  // namespace

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  auto push = [&](TokenKind k, std::size_t b, std::size_t e) {
    out.push_back(Token{k, {b, e}});
  };

  while (i < n) {
    char c = src[i];
    std::size_t b = i;
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
      while (i < n && (src[i] == ' ' || src[i] == '\t' || src[i] == '\r' ||
                       src[i] == '\n' || src[i] == '\f'))
        ++i;
      push(TokenKind::Whitespace, b, i);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      push(TokenKind::LineComment, b, i);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
      if (i + 1 >= n) throw ParseError(b, "unterminated block comment");
      i += 2;
      push(TokenKind::BlockComment, b, i);
      continue;
    }
    if (ident_start(c)) {
      while (i < n && ident_part(src[i])) ++i;
      std::string_view word = src.substr(b, i - b);
      push(is_keyword(word) ? TokenKind::Keyword : TokenKind::Ident, b, i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      bool is_float = (c == '.');
      ++i;
      if (c == '0' && i < n && (src[i] == 'x' || src[i] == 'X' || src[i] == 'b' || src[i] == 'B')) {
        ++i;
        while (i < n && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
        push(src[i - 1] == 'l' || src[i - 1] == 'L' ? TokenKind::LongLit : TokenKind::IntLit, b, i);
        continue;
      }
      while (i < n && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      if (i < n && src[i] == '.' && !is_float) {
        is_float = true;
        ++i;
        while (i < n && (std::isdigit(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      }
      if (i < n && (src[i] == 'e' || src[i] == 'E')) {
        is_float = true;
        ++i;
        if (i < n && (src[i] == '+' || src[i] == '-')) ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < n && (src[i] == 'f' || src[i] == 'F' || src[i] == 'd' || src[i] == 'D')) {
        is_float = true;
        ++i;
        push(TokenKind::FloatLit, b, i);
        continue;
      }
      if (i < n && (src[i] == 'l' || src[i] == 'L')) {
        ++i;
        push(TokenKind::LongLit, b, i);
        continue;
      }
      push(is_float ? TokenKind::FloatLit : TokenKind::IntLit, b, i);
      continue;
    }
    if (c == '\'') {
      ++i;
      while (i < n && src[i] != '\'') {
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i >= n) throw ParseError(b, "unterminated char literal");
      ++i;
      push(TokenKind::CharLit, b, i);
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < n && src[i] != '"') {
        if (src[i] == '\n') throw ParseError(b, "unterminated string literal");
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i >= n) throw ParseError(b, "unterminated string literal");
      ++i;
      push(TokenKind::StringLit, b, i);
      continue;
    }
    bool matched = false;
    for (const char* op : kOperators) {
      std::size_t len = std::strlen(op);
      if (src.substr(i, len) == op) {
        i += len;
        push(TokenKind::Punct, b, i);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::strchr("+-*/%=<>!&|^~?:;,.(){}[]@", c)) {
      ++i;
      push(TokenKind::Punct, b, i);
      continue;
    }
    throw ParseError(i, std::string("unexpected character '") + c + "'");
  }
  push(TokenKind::End, n, n);
  return out;
}

std::vector<NodeId> SyntaxTree::find_all(NodeId from, NodeKind kind) const {
  std::vector<NodeId> out;
  walk(from, [&](NodeId id) {
    if (nodes_[id].kind == kind) out.push_back(id);
  });
  std::sort(out.begin(), out.end(), [&](NodeId a, NodeId b) {
    return nodes_[a].first_tok < nodes_[b].first_tok;
  });
  return out;
}

// ---- parser ---------------------------------------------------------------

class Parser {
public:
  explicit Parser(std::string source) {
    tree_.source_ = std::move(source);
    tree_.tokens_ = lex(tree_.source_);
    // node 0 is the None sentinel
    tree_.nodes_.push_back(Node{});
    for (uint32_t t = 0; t < tree_.tokens_.size(); ++t)
      if (!is_trivia(tree_.tokens_[t].kind)) code_.push_back(t);
  }

  SyntaxTree run() {
    tree_.root_ = parse_compilation_unit();
    return std::move(tree_);
  }

private:
  SyntaxTree tree_;
  std::vector<uint32_t> code_;  // indices of non-trivia tokens
  std::size_t pos_ = 0;         // cursor into code_

  // -- token helpers --
  const Token& tok(std::size_t p) const { return tree_.tokens_[code_[p]]; }
  std::string_view tok_text(std::size_t p) const {
    const Span& s = tok(p).span;
    return std::string_view(tree_.source_).substr(s.begin, s.size());
  }
  bool at_end() const { return tok(pos_).kind == TokenKind::End; }
  std::size_t offset() const { return tok(pos_).span.begin; }

  bool check(std::string_view text) const { return !at_end() && tok_text(pos_) == text; }
  bool check_kind(TokenKind k) const { return tok(pos_).kind == k; }

  bool accept(std::string_view text) {
    if (check(text)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view text) {
    if (!accept(text))
      throw ParseError(offset(), "expected '" + std::string(text) + "', found '" +
                                     std::string(at_end() ? "end of input" : tok_text(pos_)) + "'");
  }
  uint32_t expect_ident() {
    if (!check_kind(TokenKind::Ident)) throw ParseError(offset(), "expected identifier");
    return code_[pos_++];
  }

  NodeId make(NodeKind kind, std::size_t first_code, std::size_t last_code,
              std::vector<NodeId> children = {}, uint32_t aux = 0) {
    Node n;
    n.kind = kind;
    n.first_tok = code_[first_code];
    n.last_tok = code_[last_code];
    n.aux = aux;
    n.children = std::move(children);
    tree_.nodes_.push_back(std::move(n));
    return static_cast<NodeId>(tree_.nodes_.size() - 1);
  }

  // -- grammar --
  NodeId parse_compilation_unit() {
    std::size_t first = pos_;
    std::vector<NodeId> children;
    if (check("package")) {
      std::size_t b = pos_;
      ++pos_;
      skip_qualified_name();
      expect(";");
      children.push_back(make(NodeKind::PackageDecl, b, pos_ - 1));
    }
    while (check("import")) {
      std::size_t b = pos_;
      ++pos_;
      accept("static");
      skip_qualified_name();
      if (accept(".")) expect("*");
      expect(";");
      children.push_back(make(NodeKind::ImportDecl, b, pos_ - 1));
    }
    while (!at_end()) children.push_back(parse_class_decl());
    if (children.empty()) throw ParseError(offset(), "empty compilation unit");
    return make(NodeKind::CompilationUnit, first, pos_ == 0 ? 0 : pos_ - 1, std::move(children));
  }

  void skip_qualified_name() {
    expect_ident_or_keywordless();
    while (check(".") && pos_ + 1 < code_.size() && tok(pos_ + 1).kind == TokenKind::Ident) {
      ++pos_;
      ++pos_;
    }
  }
  void expect_ident_or_keywordless() {
    if (!check_kind(TokenKind::Ident)) throw ParseError(offset(), "expected identifier");
    ++pos_;
  }

  void skip_modifiers() {
    static const char* mods[] = {"public", "private", "protected", "static",  "final",
                                 "abstract", "native", "synchronized", "transient",
                                 "volatile", "strictfp"};
    for (;;) {
      bool moved = false;
      for (const char* m : mods)
        if (accept(m)) {
          moved = true;
          break;
        }
      if (check("@") && pos_ + 1 < code_.size() && tok(pos_ + 1).kind == TokenKind::Ident) {
        ++pos_;
        ++pos_;
        if (check("(")) skip_balanced("(", ")");
        moved = true;
      }
      if (!moved) break;
    }
  }

  void skip_balanced(std::string_view open, std::string_view close) {
    expect(open);
    int depth = 1;
    while (depth > 0) {
      if (at_end()) throw ParseError(offset(), "unbalanced '" + std::string(open) + "'");
      if (check(open)) ++depth;
      if (check(close)) --depth;
      ++pos_;
    }
  }

  NodeId parse_class_decl() {
    std::size_t first = pos_;
    skip_modifiers();
    if (!accept("class") && !accept("interface") && !accept("enum"))
      throw ParseError(offset(), "expected class declaration");
    uint32_t name = expect_ident();
    if (check("<")) skip_balanced("<", ">");
    if (accept("extends")) parse_type();
    if (accept("implements")) {
      parse_type();
      while (accept(",")) parse_type();
    }
    expect("{");
    std::vector<NodeId> members;
    while (!check("}")) {
      if (at_end()) throw ParseError(offset(), "unterminated class body");
      members.push_back(parse_member());
    }
    expect("}");
    return make(NodeKind::ClassDecl, first, pos_ - 1, std::move(members), name);
  }

  // Member: nested class, method, constructor, field, or initializer block.
  NodeId parse_member() {
    std::size_t first = pos_;
    std::size_t save = pos_;
    skip_modifiers();
    if (check("class") || check("interface") || check("enum")) {
      pos_ = save;
      return parse_class_decl();
    }
    if (check("{")) {  // static/instance initializer
      NodeId body = parse_block();
      Node& n = tree_.nodes_[body];
      n.first_tok = code_[first];
      return body;
    }
    if (check("<")) skip_balanced("<", ">");  // method type parameters

    // Constructor: Ident '('
    if (check_kind(TokenKind::Ident) && pos_ + 1 < code_.size() && tok_text(pos_ + 1) == "(") {
      uint32_t name = code_[pos_];
      ++pos_;
      NodeId params = parse_param_list();
      if (accept("throws")) {
        skip_qualified_name();
        while (accept(",")) skip_qualified_name();
      }
      NodeId body = parse_block();
      return make(NodeKind::MethodDecl, first, pos_ - 1, {kNoNode, params, body}, name);
    }

    NodeId type = parse_type();
    uint32_t name = expect_ident();
    if (check("(")) {
      NodeId params = parse_param_list();
      if (accept("throws")) {
        skip_qualified_name();
        while (accept(",")) skip_qualified_name();
      }
      NodeId body = kNoNode;
      if (check("{"))
        body = parse_block();
      else
        expect(";");
      return make(NodeKind::MethodDecl, first, pos_ - 1, {type, params, body}, name);
    }
    // field declaration
    std::vector<NodeId> children{type};
    children.push_back(parse_declarator(name));
    while (accept(",")) children.push_back(parse_declarator(expect_ident()));
    expect(";");
    return make(NodeKind::FieldDecl, first, pos_ - 1, std::move(children));
  }

  NodeId parse_param_list() {
    std::size_t first = pos_;
    expect("(");
    std::vector<NodeId> params;
    if (!check(")")) {
      do {
        std::size_t pb = pos_;
        accept("final");
        NodeId type = parse_type();
        accept("...");
        uint32_t name = expect_ident();
        while (accept("[")) expect("]");
        params.push_back(make(NodeKind::Param, pb, pos_ - 1, {type}, name));
      } while (accept(","));
    }
    expect(")");
    return make(NodeKind::ParamList, first, pos_ - 1, std::move(params));
  }

  // Type: primitive, "void", or qualified name, with optional type args
  // and array dims.
  NodeId parse_type() {
    std::size_t first = pos_;
    if (accept("void")) {
      while (accept("[")) expect("]");
      return make(NodeKind::TypeRef, first, pos_ - 1);
    }
    if (!try_type()) throw ParseError(offset(), "expected type");
    return make(NodeKind::TypeRef, first, pos_ - 1);
  }

  // Attempts to consume a type at the cursor; restores position on failure.
  bool try_type() {
    std::size_t save = pos_;
    static const char* prims[] = {"int",  "long",  "short", "byte",
                                  "char", "float", "double", "boolean"};
    bool ok = false;
    for (const char* p : prims)
      if (accept(p)) {
        ok = true;
        break;
      }
    if (!ok) {
      if (!check_kind(TokenKind::Ident)) {
        pos_ = save;
        return false;
      }
      ++pos_;
      while (check(".") && pos_ + 1 < code_.size() && tok(pos_ + 1).kind == TokenKind::Ident) {
        pos_ += 2;
      }
      if (check("<") && !try_type_args()) {
        pos_ = save;
        return false;
      }
    }
    while (check("[") && pos_ + 1 < code_.size() && tok_text(pos_ + 1) == "]") pos_ += 2;
    return true;
  }

  bool try_type_args() {
    std::size_t save = pos_;
    expect("<");
    if (accept(">")) return true;  // diamond
    for (;;) {
      if (accept("?")) {
        if (accept("extends") || accept("super")) {
          if (!try_type()) {
            pos_ = save;
            return false;
          }
        }
      } else if (!try_type()) {
        pos_ = save;
        return false;
      }
      if (accept(">")) return true;
      if (!accept(",")) {
        pos_ = save;
        return false;
      }
    }
  }

  NodeId parse_block() {
    std::size_t first = pos_;
    expect("{");
    std::vector<NodeId> stmts;
    while (!check("}")) {
      if (at_end()) throw ParseError(offset(), "unterminated block");
      stmts.push_back(parse_statement());
    }
    expect("}");
    return make(NodeKind::Block, first, pos_ - 1, std::move(stmts));
  }

  NodeId parse_statement() {
    std::size_t first = pos_;
    if (check("{")) return parse_block();
    if (accept(";")) return make(NodeKind::EmptyStmt, first, first);
    if (check("if")) return parse_if();
    if (check("for")) return parse_for();
    if (check("while")) return parse_while();
    if (check("do")) return parse_do();
    if (check("switch")) return parse_switch();
    if (accept("return")) {
      NodeId e = kNoNode;
      if (!check(";")) e = parse_expression();
      expect(";");
      return make(NodeKind::ReturnStmt, first, pos_ - 1, {e});
    }
    if (accept("break")) {
      uint32_t label = 0;
      if (check_kind(TokenKind::Ident)) label = code_[pos_++];
      expect(";");
      return make(NodeKind::BreakStmt, first, pos_ - 1, {}, label);
    }
    if (accept("continue")) {
      uint32_t label = 0;
      if (check_kind(TokenKind::Ident)) label = code_[pos_++];
      expect(";");
      return make(NodeKind::ContinueStmt, first, pos_ - 1, {}, label);
    }
    if (accept("throw")) {
      NodeId e = parse_expression();
      expect(";");
      return make(NodeKind::ThrowStmt, first, pos_ - 1, {e});
    }
    if (check("try")) return parse_try();
    if (accept("assert")) {
      NodeId cond = parse_expression();
      NodeId msg = kNoNode;
      if (accept(":")) msg = parse_expression();
      expect(";");
      return make(NodeKind::AssertStmt, first, pos_ - 1, {cond, msg});
    }
    if (accept("synchronized")) {
      skip_balanced("(", ")");
      return parse_block();
    }
    // labeled statement
    if (check_kind(TokenKind::Ident) && pos_ + 1 < code_.size() && tok_text(pos_ + 1) == ":") {
      uint32_t label = code_[pos_];
      pos_ += 2;
      NodeId inner = parse_statement();
      return make(NodeKind::LabeledStmt, first, pos_ - 1, {inner}, label);
    }
    // local variable declaration or expression statement
    NodeId decl = try_local_var_decl();
    if (decl != kNoNode) return decl;
    NodeId e = parse_expression();
    expect(";");
    return make(NodeKind::ExprStmt, first, pos_ - 1, {e});
  }

  // Speculatively parses "final? Type Ident (= init)? (, Ident (= init)?)* ;".
  NodeId try_local_var_decl() {
    std::size_t save = pos_;
    std::size_t first = pos_;
    accept("final");
    if (!try_type()) {
      pos_ = save;
      return kNoNode;
    }
    std::size_t type_end = pos_ - 1;
    if (!check_kind(TokenKind::Ident)) {
      pos_ = save;
      return kNoNode;
    }
    std::size_t after_name = pos_ + 1;
    if (after_name < code_.size()) {
      std::string_view next = tok_text(after_name);
      if (next != "=" && next != ";" && next != "," && next != "[") {
        pos_ = save;
        return kNoNode;
      }
    }
    NodeId type = make(NodeKind::TypeRef, first + (tok_text(first) == "final" ? 1 : 0), type_end);
    std::vector<NodeId> children{type};
    try {
      children.push_back(parse_declarator(expect_ident()));
      while (accept(",")) children.push_back(parse_declarator(expect_ident()));
      expect(";");
    } catch (const ParseError&) {
      pos_ = save;
      // drop speculative nodes is not needed: ids are only reachable via
      // the children vector we are discarding
      return kNoNode;
    }
    return make(NodeKind::LocalVarDecl, first, pos_ - 1, std::move(children));
  }

  NodeId parse_declarator(uint32_t name_tok) {
    std::size_t first = pos_ - 1;  // name already consumed
    while (accept("[")) expect("]");
    NodeId init = kNoNode;
    if (accept("=")) {
      if (check("{"))
        init = parse_array_init();
      else
        init = parse_expression();
    }
    return make(NodeKind::Declarator, first, pos_ - 1, {init}, name_tok);
  }

  NodeId parse_array_init() {
    std::size_t first = pos_;
    expect("{");
    std::vector<NodeId> elems;
    if (!check("}")) {
      do {
        if (check("}")) break;  // trailing comma
        if (check("{"))
          elems.push_back(parse_array_init());
        else
          elems.push_back(parse_expression());
      } while (accept(","));
    }
    expect("}");
    return make(NodeKind::ArrayInit, first, pos_ - 1, std::move(elems));
  }

  NodeId parse_if() {
    std::size_t first = pos_;
    expect("if");
    expect("(");
    NodeId cond = parse_expression();
    expect(")");
    NodeId then_branch = parse_statement();
    NodeId else_branch = kNoNode;
    if (accept("else")) else_branch = parse_statement();
    return make(NodeKind::IfStmt, first, pos_ - 1, {cond, then_branch, else_branch});
  }

  NodeId parse_for() {
    std::size_t first = pos_;
    expect("for");
    expect("(");
    // enhanced for: Type Ident ':' expr
    {
      std::size_t save = pos_;
      accept("final");
      if (try_type() && check_kind(TokenKind::Ident) && pos_ + 1 < code_.size() &&
          tok_text(pos_ + 1) == ":") {
        std::size_t tb = save + (tok_text(save) == "final" ? 1 : 0);
        NodeId type = make(NodeKind::TypeRef, tb, pos_ - 1);
        uint32_t name = code_[pos_];
        pos_ += 2;
        NodeId iterable = parse_expression();
        expect(")");
        NodeId body = parse_statement();
        return make(NodeKind::ForEachStmt, first, pos_ - 1, {type, iterable, body}, name);
      }
      pos_ = save;
    }
    NodeId init = kNoNode;
    if (!check(";")) {
      init = try_local_var_decl();
      if (init == kNoNode) {
        std::size_t eb = pos_;
        std::vector<NodeId> exprs{parse_expression()};
        while (accept(",")) exprs.push_back(parse_expression());
        init = make(NodeKind::ExprList, eb, pos_ - 1, std::move(exprs));
        expect(";");
      }
    } else {
      expect(";");
    }
    NodeId cond = kNoNode;
    if (!check(";")) cond = parse_expression();
    expect(";");
    NodeId update = kNoNode;
    if (!check(")")) {
      std::size_t ub = pos_;
      std::vector<NodeId> exprs{parse_expression()};
      while (accept(",")) exprs.push_back(parse_expression());
      update = make(NodeKind::ExprList, ub, pos_ - 1, std::move(exprs));
    }
    expect(")");
    NodeId body = parse_statement();
    return make(NodeKind::ForStmt, first, pos_ - 1, {init, cond, update, body});
  }

  NodeId parse_while() {
    std::size_t first = pos_;
    expect("while");
    expect("(");
    NodeId cond = parse_expression();
    expect(")");
    NodeId body = parse_statement();
    return make(NodeKind::WhileStmt, first, pos_ - 1, {cond, body});
  }

  NodeId parse_do() {
    std::size_t first = pos_;
    expect("do");
    NodeId body = parse_statement();
    expect("while");
    expect("(");
    NodeId cond = parse_expression();
    expect(")");
    expect(";");
    return make(NodeKind::DoStmt, first, pos_ - 1, {body, cond});
  }

  NodeId parse_switch() {
    std::size_t first = pos_;
    expect("switch");
    expect("(");
    NodeId selector = parse_expression();
    expect(")");
    expect("{");
    std::vector<NodeId> children{selector};
    while (!check("}")) {
      if (at_end()) throw ParseError(offset(), "unterminated switch");
      std::size_t cb = pos_;
      std::vector<NodeId> labels;
      bool has_default = false;
      bool saw_label = false;
      for (;;) {
        if (accept("case")) {
          labels.push_back(parse_expression());
          expect(":");
          saw_label = true;
        } else if (accept("default")) {
          expect(":");
          has_default = true;
          saw_label = true;
        } else {
          break;
        }
      }
      if (!saw_label) throw ParseError(offset(), "expected 'case' or 'default'");
      NodeId label_list = make(NodeKind::ExprList, cb, pos_ - 1, std::move(labels));
      std::vector<NodeId> body{label_list};
      while (!check("case") && !check("default") && !check("}")) body.push_back(parse_statement());
      children.push_back(
          make(NodeKind::SwitchCase, cb, pos_ - 1, std::move(body), has_default ? 1 : 0));
    }
    expect("}");
    return make(NodeKind::SwitchStmt, first, pos_ - 1, std::move(children));
  }

  NodeId parse_try() {
    std::size_t first = pos_;
    expect("try");
    if (check("(")) skip_balanced("(", ")");  // try-with-resources, opaque
    NodeId block = parse_block();
    std::vector<NodeId> children{block};
    while (check("catch")) {
      std::size_t cb = pos_;
      ++pos_;
      skip_balanced("(", ")");
      NodeId cbody = parse_block();
      children.push_back(make(NodeKind::CatchClause, cb, pos_ - 1, {cbody}));
    }
    uint32_t has_finally = 0;
    if (accept("finally")) {
      children.push_back(parse_block());
      has_finally = 1;
    }
    if (children.size() == 1)
      throw ParseError(offset(), "try without catch or finally");
    return make(NodeKind::TryStmt, first, pos_ - 1, std::move(children), has_finally);
  }

  // -- expressions --
  NodeId parse_expression() { return parse_assignment(); }

  bool is_assign_op(std::string_view t) const {
    return t == "=" || t == "+=" || t == "-=" || t == "*=" || t == "/=" || t == "%=" ||
           t == "&=" || t == "|=" || t == "^=" || t == "<<=" || t == ">>=" || t == ">>>=";
  }

  NodeId parse_assignment() {
    std::size_t first = pos_;
    NodeId lhs = parse_ternary();
    if (!at_end() && is_assign_op(tok_text(pos_))) {
      uint32_t op = code_[pos_++];
      NodeId rhs = parse_assignment();
      return make(NodeKind::Assign, first, pos_ - 1, {lhs, rhs}, op);
    }
    return lhs;
  }

  NodeId parse_ternary() {
    std::size_t first = pos_;
    NodeId cond = parse_binary(0);
    if (accept("?")) {
      NodeId a = parse_expression();
      expect(":");
      NodeId b = parse_ternary();
      return make(NodeKind::Ternary, first, pos_ - 1, {cond, a, b});
    }
    return cond;
  }

  // Precedence levels, loosest first.
  static int binary_level(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=" || op == "instanceof") return 7;
    if (op == "<<" || op == ">>" || op == ">>>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  NodeId parse_binary(int min_level) {
    std::size_t first = pos_;
    NodeId lhs = parse_unary();
    for (;;) {
      if (at_end()) return lhs;
      std::string_view op = tok_text(pos_);
      int level = binary_level(op);
      if (level == 0 || level <= min_level) return lhs;
      if (op == "instanceof") {
        ++pos_;
        NodeId type = parse_type();
        lhs = make(NodeKind::InstanceOf, first, pos_ - 1, {lhs, type});
        continue;
      }
      uint32_t op_tok = code_[pos_++];
      NodeId rhs = parse_binary(level);
      lhs = make(NodeKind::Binary, first, pos_ - 1, {lhs, rhs}, op_tok);
    }
  }

  NodeId parse_unary() {
    std::size_t first = pos_;
    if (check("+") || check("-") || check("!") || check("~")) {
      uint32_t op = code_[pos_++];
      NodeId operand = parse_unary();
      return make(NodeKind::Unary, first, pos_ - 1, {operand}, op);
    }
    if (check("++") || check("--")) {
      uint32_t op = code_[pos_++];
      NodeId operand = parse_unary();
      return make(NodeKind::Unary, first, pos_ - 1, {operand}, op);
    }
    // cast
    if (check("(")) {
      std::size_t save = pos_;
      ++pos_;
      if (try_cast_target()) {
        if (accept(")")) {
          bool prim = is_primitive_cast(save + 1);
          std::string_view next = at_end() ? std::string_view{} : tok_text(pos_);
          bool operand_follows =
              !next.empty() &&
              (tok(pos_).kind == TokenKind::Ident || tok(pos_).kind == TokenKind::IntLit ||
               tok(pos_).kind == TokenKind::LongLit || tok(pos_).kind == TokenKind::FloatLit ||
               tok(pos_).kind == TokenKind::CharLit || tok(pos_).kind == TokenKind::StringLit ||
               next == "(" || next == "!" || next == "~" ||
               (prim && (next == "+" || next == "-")) ||
               (tok(pos_).kind == TokenKind::Keyword &&
                (next == "new" || next == "this" || next == "true" || next == "false" ||
                 next == "null")));
          if (operand_follows) {
            NodeId type = make(NodeKind::TypeRef, save + 1, pos_ - 2);
            NodeId operand = parse_unary();
            return make(NodeKind::Cast, first, pos_ - 1, {type, operand});
          }
        }
      }
      pos_ = save;
    }
    return parse_postfix();
  }

  bool is_primitive_cast(std::size_t p) const {
    static const char* prims[] = {"int",  "long",  "short", "byte",
                                  "char", "float", "double", "boolean"};
    std::string_view t = tok_text(p);
    for (const char* pr : prims)
      if (t == pr) return true;
    return false;
  }

  bool try_cast_target() {
    if (!try_type()) return false;
    return check(")");
  }

  NodeId parse_postfix() {
    std::size_t first = pos_;
    NodeId e = parse_primary(first);
    for (;;) {
      if (check(".") && pos_ + 1 < code_.size() && tok(pos_ + 1).kind == TokenKind::Ident) {
        uint32_t name = code_[pos_ + 1];
        pos_ += 2;
        if (check("(")) {
          std::vector<NodeId> children{e};
          parse_args(children);
          e = make(NodeKind::MethodCall, first, pos_ - 1, std::move(children), name);
        } else {
          e = make(NodeKind::FieldAccess, first, pos_ - 1, {e}, name);
        }
        continue;
      }
      if (check(".") && pos_ + 1 < code_.size() &&
          (tok_text(pos_ + 1) == "this" || tok_text(pos_ + 1) == "class")) {
        pos_ += 2;
        e = make(NodeKind::FieldAccess, first, pos_ - 1, {e}, code_[pos_ - 1]);
        continue;
      }
      if (accept("[")) {
        NodeId idx = parse_expression();
        expect("]");
        e = make(NodeKind::ArrayAccess, first, pos_ - 1, {e, idx});
        continue;
      }
      if (check("++") || check("--")) {
        uint32_t op = code_[pos_++];
        e = make(NodeKind::Postfix, first, pos_ - 1, {e}, op);
        continue;
      }
      return e;
    }
  }

  void parse_args(std::vector<NodeId>& out) {
    expect("(");
    if (!check(")")) {
      do {
        out.push_back(parse_expression());
      } while (accept(","));
    }
    expect(")");
  }

  NodeId parse_primary(std::size_t first) {
    if (accept("(")) {
      NodeId inner = parse_expression();
      expect(")");
      return make(NodeKind::Paren, first, pos_ - 1, {inner});
    }
    switch (tok(pos_).kind) {
      case TokenKind::IntLit:
      case TokenKind::LongLit:
      case TokenKind::FloatLit:
      case TokenKind::CharLit:
      case TokenKind::StringLit: {
        uint32_t t = code_[pos_++];
        return make(NodeKind::Literal, first, pos_ - 1, {}, t);
      }
      default:
        break;
    }
    if (check("true") || check("false") || check("null") || check("this") || check("super")) {
      uint32_t t = code_[pos_++];
      return make(NodeKind::Literal, first, pos_ - 1, {}, t);
    }
    if (accept("new")) return parse_new(first);
    if (check_kind(TokenKind::Ident)) {
      uint32_t name = code_[pos_++];
      if (check("(")) {
        std::vector<NodeId> children{kNoNode};
        parse_args(children);
        return make(NodeKind::MethodCall, first, pos_ - 1, std::move(children), name);
      }
      return make(NodeKind::Ident, first, pos_ - 1, {}, name);
    }
    // primitive class literals like int.class
    if (check_kind(TokenKind::Keyword) && pos_ + 2 < code_.size() && tok_text(pos_ + 1) == "." &&
        tok_text(pos_ + 2) == "class") {
      pos_ += 3;
      return make(NodeKind::Literal, first, pos_ - 1, {}, code_[first]);
    }
    throw ParseError(offset(), "expected expression, found '" +
                                   std::string(at_end() ? "end of input" : tok_text(pos_)) + "'");
  }

  NodeId parse_new(std::size_t first) {
    std::size_t tb = pos_;
    if (!try_type()) throw ParseError(offset(), "expected type after 'new'");
    // try_type consumed any "[]" pairs; array creation dims with sizes
    // come next if present.
    NodeId type = make(NodeKind::TypeRef, tb, pos_ - 1);
    if (check("(")) {
      std::vector<NodeId> children{type};
      parse_args(children);
      // anonymous class bodies are out of scope for the corpus shape
      return make(NodeKind::NewExpr, first, pos_ - 1, std::move(children), 0);
    }
    std::vector<NodeId> children{type};
    bool is_array = false;
    while (accept("[")) {
      is_array = true;
      if (!check("]")) children.push_back(parse_expression());
      expect("]");
    }
    if (check("{")) {
      is_array = true;
      children.push_back(parse_array_init());
    }
    if (!is_array && tree_.nodes_[type].last_tok >= tree_.nodes_[type].first_tok) {
      // "new int[n]" style where try_type already ate "[]" is not array
      // creation with size; treat a bare "new T" without args as an error
      // unless the type itself ended in [].
      std::string_view t = tree_.text(type);
      if (t.find('[') == std::string_view::npos)
        throw ParseError(offset(), "expected '(' or '[' after 'new " + std::string(t) + "'");
      is_array = true;
    }
    return make(NodeKind::NewExpr, first, pos_ - 1, std::move(children), 1);
  }
};

SyntaxTree parse(std::string source) {
  Parser p(std::move(source));
  return p.run();
}

std::string render(const SyntaxTree& tree) { return tree.source(); }

std::string apply_edits(std::string_view source, std::vector<TextEdit> edits) {
  std::stable_sort(edits.begin(), edits.end(), [](const TextEdit& a, const TextEdit& b) {
    return a.span.begin < b.span.begin;
  });
  for (std::size_t i = 0; i + 1 < edits.size(); ++i) {
    if (edits[i].span.end > edits[i + 1].span.begin)
      throw RewriteConflict("overlapping edits at offsets " +
                            std::to_string(edits[i].span.begin) + " and " +
                            std::to_string(edits[i + 1].span.begin));
  }
  std::string out;
  out.reserve(source.size());
  std::size_t cursor = 0;
  for (const TextEdit& e : edits) {
    if (e.span.begin < cursor) throw RewriteConflict("edit overlaps previous edit");
    out.append(source.substr(cursor, e.span.begin - cursor));
    out.append(e.replacement);
    cursor = e.span.end;
  }
  out.append(source.substr(cursor));
  return out;
}

// ---- JML annotation layer -------------------------------------------------

bool is_jml_comment(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "//@") return true;
  if (text.size() >= 3 && text.substr(0, 3) == "/*@") return true;
  return false;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Strips comment markers and the leading @-columns of a JML comment,
// returning the raw clause text.
std::string jml_body(std::string_view text, AnnotationKind kind) {
  if (kind == AnnotationKind::LineComment) return std::string(text.substr(3));
  // block: drop "/*@" and trailing "@*/" or "*/"
  std::string_view body = text.substr(3);
  if (body.size() >= 3 && body.substr(body.size() - 3) == "@*/")
    body = body.substr(0, body.size() - 3);
  else if (body.size() >= 2 && body.substr(body.size() - 2) == "*/")
    body = body.substr(0, body.size() - 2);
  // drop leading @-runs on each line
  std::string out;
  std::size_t i = 0;
  while (i < body.size()) {
    std::size_t eol = body.find('\n', i);
    if (eol == std::string_view::npos) eol = body.size();
    std::string_view line = body.substr(i, eol - i);
    std::size_t j = 0;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    while (j < line.size() && line[j] == '@') ++j;
    out.append(line.substr(j));
    out.push_back('\n');
    i = eol + 1;
  }
  return out;
}

std::vector<std::string> split_clauses(const std::string& body) {
  std::vector<std::string> out;
  std::string current;
  for (char c : body) {
    if (c == ';') {
      std::string t = trim(current);
      if (!t.empty()) out.push_back(t);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  std::string t = trim(current);
  if (!t.empty()) out.push_back(t);
  return out;
}

}  // namespace

std::string clause_kind(std::string_view clause) {
  std::size_t b = 0;
  while (b < clause.size() && std::isspace(static_cast<unsigned char>(clause[b]))) ++b;
  std::size_t e = b;
  while (e < clause.size() &&
         (std::isalnum(static_cast<unsigned char>(clause[e])) || clause[e] == '_'))
    ++e;
  return std::string(clause.substr(b, e - b));
}

StrippedProgram strip_annotations_source(const std::string& source) {
  std::vector<Token> toks = lex(source);
  // validate: the bare result must parse, so the input must parse first
  parse(source);

  StrippedProgram out;
  std::vector<TextEdit> edits;
  struct Pending {
    AnnotationEntry entry;
    std::size_t anchor_orig;
  };
  std::vector<Pending> pending;

  for (std::size_t t = 0; t < toks.size(); ++t) {
    const Token& tk = toks[t];
    if (tk.kind != TokenKind::LineComment && tk.kind != TokenKind::BlockComment) continue;
    std::string_view text =
        std::string_view(source).substr(tk.span.begin, tk.span.size());
    if (!is_jml_comment(text)) continue;

    AnnotationEntry entry;
    entry.span = tk.span;
    entry.kind = tk.kind == TokenKind::LineComment ? AnnotationKind::LineComment
                                                   : AnnotationKind::BlockComment;
    entry.text = std::string(text);
    entry.clauses = split_clauses(jml_body(text, entry.kind));

    // anchor: the next code token after the comment
    std::size_t anchor_orig = source.size();
    for (std::size_t u = t + 1; u < toks.size(); ++u) {
      if (!is_trivia(toks[u].kind) && toks[u].kind != TokenKind::End) {
        anchor_orig = toks[u].span.begin;
        break;
      }
    }

    // widen the removed span over surrounding layout: leading indentation
    // when the comment starts its line, and the trailing newline so no
    // blank line is left behind
    std::size_t del_begin = tk.span.begin;
    while (del_begin > 0 && (source[del_begin - 1] == ' ' || source[del_begin - 1] == '\t'))
      --del_begin;
    bool at_line_start = del_begin == 0 || source[del_begin - 1] == '\n';
    std::size_t del_end = tk.span.end;
    if (at_line_start) {
      std::size_t e = del_end;
      while (e < source.size() && (source[e] == ' ' || source[e] == '\t')) ++e;
      if (e < source.size() && source[e] == '\n')
        del_end = e + 1;
      else if (e < source.size() && source[e] == '\r' && e + 1 < source.size() &&
               source[e + 1] == '\n')
        del_end = e + 2;
      else
        del_begin = tk.span.begin;  // code follows on the same line; keep indent
    }
    edits.push_back(TextEdit{{del_begin, del_end}, ""});
    pending.push_back(Pending{std::move(entry), anchor_orig});
  }

  // compute bare text and remap anchors through the deletions
  std::sort(edits.begin(), edits.end(),
            [](const TextEdit& a, const TextEdit& b) { return a.span.begin < b.span.begin; });
  out.bare = apply_edits(source, edits);
  for (Pending& p : pending) {
    std::size_t removed = 0;
    for (const TextEdit& e : edits)
      if (e.span.end <= p.anchor_orig) removed += e.span.size();
    p.entry.anchor = p.anchor_orig - removed;
    out.index.entries.push_back(std::move(p.entry));
  }
  return out;
}

StrippedProgram strip_annotations(const SpecifiedProgram& program) {
  return strip_annotations_source(program.source);
}

SpecifiedProgram embed_annotations(const std::string& bare, const AnnotationIndex& index,
                                   const std::string& base_id) {
  std::vector<Token> toks = lex(bare);
  std::vector<std::size_t> token_starts;
  for (const Token& t : toks)
    if (!is_trivia(t.kind) && t.kind != TokenKind::End) token_starts.push_back(t.span.begin);

  std::vector<TextEdit> edits;
  for (const AnnotationEntry& entry : index.entries) {
    bool anchored = entry.anchor == bare.size() ||
                    std::binary_search(token_starts.begin(), token_starts.end(), entry.anchor);
    if (!anchored)
      throw AnchorMissing("annotation anchor at offset " + std::to_string(entry.anchor) +
                          " does not start a token");
    // indentation of the anchor's line
    std::size_t line_begin = bare.rfind('\n', entry.anchor == 0 ? 0 : entry.anchor - 1);
    line_begin = line_begin == std::string::npos ? 0 : line_begin + 1;
    std::string indent;
    for (std::size_t i = line_begin; i < entry.anchor; ++i) {
      if (bare[i] == ' ' || bare[i] == '\t')
        indent.push_back(bare[i]);
      else
        break;
    }
    edits.push_back(TextEdit{{entry.anchor, entry.anchor}, entry.text + "\n" + indent});
  }

  SpecifiedProgram out;
  out.source = apply_edits(bare, std::move(edits));
  out.base_id = base_id;
  StrippedProgram round = strip_annotations_source(out.source);
  out.annotations = std::move(round.index);
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  std::string line;
  auto flush = [&]() {
    // rstrip
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
      line.pop_back();
    if (!line.empty()) {
      out += line;
      out += '\n';
    }
    line.clear();
  };
  bool in_space = false;
  for (char c : text) {
    if (c == '\n') {
      flush();
      in_space = false;
    } else if (c == ' ' || c == '\t') {
      in_space = true;
    } else {
      if (in_space && !line.empty()) line += ' ';
      in_space = false;
      line += c;
    }
  }
  flush();
  return out;
}

}  // namespace jmlbench
