// ast.hpp - Parsing/rendering facade for Java sources and their JML
// annotation layer. All code rewriting in this project goes through the
// span-based view defined here: nodes carry byte spans into the original
// source, edits are span replacements, and rendering an unedited tree is
// byte-identical to the input.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jmlbench {

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  bool overlaps(const Span& other) const {
    return begin < other.end && other.begin < end;
  }
  bool operator==(const Span& other) const {
    return begin == other.begin && end == other.end;
  }
};

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
        position_(position), message_(message) {}

  std::size_t position() const { return position_; }
  const std::string& message() const { return message_; }

private:
  std::size_t position_;
  std::string message_;
};

enum class TokenKind : uint8_t {
  Ident,
  Keyword,
  IntLit,
  LongLit,
  FloatLit,
  CharLit,
  StringLit,
  Punct,
  LineComment,
  BlockComment,
  Whitespace,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  Span span;
};

inline bool is_trivia(TokenKind k) {
  return k == TokenKind::Whitespace || k == TokenKind::LineComment ||
         k == TokenKind::BlockComment;
}

// Splits source into tokens, keeping comments and whitespace so the
// concatenation of all token texts reproduces the input exactly.
std::vector<Token> lex(std::string_view source);

enum class NodeKind : uint8_t {
  None,  // sentinel for absent child slots
  CompilationUnit,
  PackageDecl,
  ImportDecl,
  ClassDecl,
  FieldDecl,
  MethodDecl,
  ParamList,
  Param,
  TypeRef,
  Block,
  LocalVarDecl,
  Declarator,
  ExprStmt,
  IfStmt,
  ForStmt,
  ForEachStmt,
  WhileStmt,
  DoStmt,
  SwitchStmt,
  SwitchCase,
  ReturnStmt,
  BreakStmt,
  ContinueStmt,
  ThrowStmt,
  TryStmt,
  CatchClause,
  AssertStmt,
  EmptyStmt,
  LabeledStmt,
  Assign,
  Ternary,
  Binary,
  InstanceOf,
  Unary,
  Postfix,
  Cast,
  MethodCall,
  FieldAccess,
  ArrayAccess,
  Ident,
  Literal,
  Paren,
  NewExpr,
  ArrayInit,
  ExprList,
};

using NodeId = uint32_t;
constexpr NodeId kNoNode = 0;

struct Node {
  NodeKind kind = NodeKind::None;
  uint32_t first_tok = 0;  // token index range, inclusive
  uint32_t last_tok = 0;
  uint32_t aux = 0;  // kind-specific: name/operator token index or flag
  std::vector<NodeId> children;
};

// Child slot layout per kind (kNoNode marks an absent slot):
//   MethodDecl   {ret TypeRef|0, ParamList, Block|0}         aux=name tok
//   Param        {TypeRef}                                   aux=name tok
//   LocalVarDecl {TypeRef, Declarator...}
//   Declarator   {init|0}                                    aux=name tok
//   IfStmt       {cond, then, else|0}
//   ForStmt      {init|0, cond|0, update ExprList|0, body}
//   ForEachStmt  {TypeRef, iterable, body}                   aux=name tok
//   WhileStmt    {cond, body}     DoStmt {body, cond}
//   SwitchStmt   {selector, SwitchCase...}
//   SwitchCase   {ExprList labels, stmt...}                  aux=1 if default
//   ReturnStmt   {expr|0}         Break/Continue             aux=label tok|0
//   AssertStmt   {cond, msg|0}    LabeledStmt {stmt}         aux=label tok
//   TryStmt      {Block|0 resources-less, CatchClause..., finally Block?}
//                                                            aux=1 if finally
//   Assign       {lhs, rhs} aux=op   Binary {l, r} aux=op
//   Unary/Postfix {operand} aux=op   Ternary {c, a, b}
//   Cast         {TypeRef, expr}     InstanceOf {expr, TypeRef}
//   MethodCall   {receiver|0, args...}                       aux=name tok
//   FieldAccess  {obj} aux=name tok  ArrayAccess {arr, idx}
//   Ident/Literal                                            aux=own tok
//   NewExpr      {TypeRef, args-or-dims..., ArrayInit?}      aux=1 if array
class SyntaxTree {
public:
  SyntaxTree() = default;

  const std::string& source() const { return source_; }
  const std::vector<Token>& tokens() const { return tokens_; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }

  Span span(NodeId id) const {
    const Node& n = nodes_[id];
    return {tokens_[n.first_tok].span.begin, tokens_[n.last_tok].span.end};
  }
  std::string_view text(NodeId id) const {
    Span s = span(id);
    return std::string_view(source_).substr(s.begin, s.size());
  }
  std::string_view token_text(uint32_t tok) const {
    const Span& s = tokens_[tok].span;
    return std::string_view(source_).substr(s.begin, s.size());
  }

  template <typename Fn>
  void walk(NodeId id, Fn&& fn) const {
    if (id == kNoNode) return;
    fn(id);
    for (NodeId c : nodes_[id].children) walk(c, fn);
  }

  // All descendant nodes (including `from` itself) of the given kind,
  // in source order.
  std::vector<NodeId> find_all(NodeId from, NodeKind kind) const;

private:
  friend class Parser;
  std::string source_;
  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
};

// Parses a compilation unit. Throws ParseError on malformed input.
SyntaxTree parse(std::string source);

// Concrete source of the tree; byte-identical to the parsed input.
std::string render(const SyntaxTree& tree);

// One span replacement. Insertions use an empty span.
struct TextEdit {
  Span span;
  std::string replacement;
};

class RewriteConflict : public std::runtime_error {
public:
  explicit RewriteConflict(const std::string& what) : std::runtime_error(what) {}
};

// Applies edits to `source`. Edits must not overlap (insertions at the
// same offset are applied in the order given). Throws RewriteConflict.
std::string apply_edits(std::string_view source, std::vector<TextEdit> edits);

// ---- JML annotation layer -------------------------------------------------

enum class AnnotationKind : uint8_t { LineComment, BlockComment };

struct AnnotationEntry {
  Span span;  // span of the comment in the annotated source
  AnnotationKind kind = AnnotationKind::LineComment;
  std::string text;                  // verbatim comment text
  std::vector<std::string> clauses;  // clause bodies, split on ';'
  std::size_t anchor = 0;            // offset of the anchored token in the bare source
};

struct AnnotationIndex {
  std::vector<AnnotationEntry> entries;

  std::size_t clause_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.clauses.size();
    return n;
  }
};

struct SpecifiedProgram {
  std::string source;
  AnnotationIndex annotations;
  std::string base_id;
};

// True for comments carrying JML text (`//@` or `/*@`).
bool is_jml_comment(std::string_view comment_text);

// First word of a clause ("requires", "ensures", "maintaining", ...).
std::string clause_kind(std::string_view clause);

struct StrippedProgram {
  std::string bare;
  AnnotationIndex index;
};

// Removes every JML annotation comment, recording each one with its
// original span, clause split, and the bare-source offset of the token
// it anchors to (the next code token).
StrippedProgram strip_annotations(const SpecifiedProgram& program);
StrippedProgram strip_annotations_source(const std::string& source);

class AnchorMissing : public std::runtime_error {
public:
  explicit AnchorMissing(const std::string& what) : std::runtime_error(what) {}
};

// Re-inserts annotations at their anchor offsets. Throws AnchorMissing if
// an anchor no longer starts a token in `bare`.
SpecifiedProgram embed_annotations(const std::string& bare, const AnnotationIndex& index,
                                   const std::string& base_id = "");

// Collapses runs of spaces/tabs, strips trailing whitespace, and drops
// blank lines; newlines are otherwise preserved. Used for all
// "equivalent modulo whitespace" checks.
std::string normalize_whitespace(std::string_view text);

}  // namespace jmlbench
