#include "jmlbench/transforms.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace jmlbench {

namespace {

struct IdName {
  TransformId id;
  const char* name;
};

const IdName kIdNames[] = {
    {TransformId::VariableRenaming1, "VariableRenaming1"},
    {TransformId::VariableRenaming2, "VariableRenaming2"},
    {TransformId::SwitchRelation, "SwitchRelation"},
    {TransformId::Unary2Add, "Unary2Add"},
    {TransformId::Add2Equal, "Add2Equal"},
    {TransformId::MergeVarDecl, "MergeVarDecl"},
    {TransformId::InfixDividing, "InfixDividing"},
    {TransformId::SwitchEqualExp, "SwitchEqualExp"},
    {TransformId::SwitchStringEqual, "SwitchStringEqual"},
    {TransformId::For2While, "For2While"},
    {TransformId::While2For, "While2For"},
    {TransformId::ElseIf2If, "ElseIf2If"},
    {TransformId::Switch2If, "Switch2If"},
    {TransformId::SwapStatement, "SwapStatement"},
    {TransformId::ReverseIf, "ReverseIf"},
    {TransformId::If2CondExp, "If2CondExp"},
    {TransformId::CondExp2If, "CondExp2If"},
    {TransformId::DividingComposedIf, "DividingComposedIf"},
};

}  // namespace

std::string_view to_string(TransformId id) {
  for (const IdName& e : kIdNames)
    if (e.id == id) return e.name;
  return "";
}

std::optional<TransformId> transform_from_string(std::string_view name) {
  for (const IdName& e : kIdNames)
    if (e.name == name) return e.id;
  return std::nullopt;
}

const std::vector<TransformId>& all_transforms() {
  static const std::vector<TransformId> ids = [] {
    std::vector<TransformId> v;
    for (const IdName& e : kIdNames) v.push_back(e.id);
    return v;
  }();
  return ids;
}

std::set<std::string> transform_id_names() {
  std::set<std::string> out;
  for (const IdName& e : kIdNames) out.insert(e.name);
  return out;
}

// ---- shared helpers ---------------------------------------------------------

namespace {

using Rewrite = std::function<std::string(NodeId)>;

std::vector<NodeId> build_parents(const SyntaxTree& t) {
  std::vector<NodeId> parents(t.node_count(), kNoNode);
  t.walk(t.root(), [&](NodeId id) {
    for (NodeId c : t.node(id).children)
      if (c != kNoNode) parents[c] = id;
  });
  return parents;
}

std::string indent_at(const std::string& src, std::size_t offset) {
  std::size_t line_begin = src.rfind('\n', offset == 0 ? 0 : offset - 1);
  line_begin = line_begin == std::string::npos ? 0 : line_begin + 1;
  std::string indent;
  for (std::size_t i = line_begin; i < offset; ++i) {
    if (src[i] == ' ' || src[i] == '\t')
      indent.push_back(src[i]);
    else
      break;
  }
  return indent;
}

bool is_loop_kind(NodeKind k) {
  return k == NodeKind::ForStmt || k == NodeKind::ForEachStmt || k == NodeKind::WhileStmt ||
         k == NodeKind::DoStmt;
}

bool has_side_effects(const SyntaxTree& t, NodeId id) {
  bool found = false;
  t.walk(id, [&](NodeId n) {
    NodeKind k = t.node(n).kind;
    if (k == NodeKind::MethodCall || k == NodeKind::NewExpr || k == NodeKind::Assign)
      found = true;
    if (k == NodeKind::Postfix) found = true;
    if (k == NodeKind::Unary) {
      std::string_view op = t.token_text(t.node(n).aux);
      if (op == "++" || op == "--") found = true;
    }
  });
  return found;
}

// Text of subtree `n` with every maximal site strictly inside it replaced
// by rewrite(site).
std::string text_with_rewrites(const SyntaxTree& t, NodeId n, const std::set<NodeId>& sites,
                               const Rewrite& rewrite) {
  std::vector<TextEdit> local;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    for (NodeId c : t.node(id).children) {
      if (c == kNoNode) continue;
      if (sites.count(c)) {
        Span s = t.span(c);
        local.push_back({{s.begin, s.end}, rewrite(c)});
      } else {
        visit(c);
      }
    }
  };
  visit(n);
  Span base = t.span(n);
  for (TextEdit& e : local) {
    e.span.begin -= base.begin;
    e.span.end -= base.begin;
  }
  return apply_edits(t.text(n), std::move(local));
}

// Sites whose span is not contained in any other site's span.
std::vector<NodeId> maximal_sites(const SyntaxTree& t, const std::vector<NodeId>& sites) {
  std::vector<NodeId> out;
  for (NodeId s : sites) {
    bool contained = false;
    for (NodeId other : sites) {
      if (other == s) continue;
      if (t.span(other).contains(t.span(s)) && !(t.span(other) == t.span(s))) {
        contained = true;
        break;
      }
    }
    if (!contained) out.push_back(s);
  }
  return out;
}

bool is_atomic_expr(NodeKind k) {
  return k == NodeKind::Ident || k == NodeKind::Literal || k == NodeKind::Paren ||
         k == NodeKind::MethodCall || k == NodeKind::FieldAccess || k == NodeKind::ArrayAccess;
}

// Simple lvalue whose evaluation can be duplicated.
bool is_duplicable_lvalue(const SyntaxTree& t, NodeId id) {
  NodeKind k = t.node(id).kind;
  if (k != NodeKind::Ident && k != NodeKind::FieldAccess && k != NodeKind::ArrayAccess)
    return false;
  return !has_side_effects(t, id);
}

// ---- declared-type lookup ---------------------------------------------------

struct TypeMap {
  // name -> type text; ambiguous names map to ""
  std::map<std::string, std::string> types;

  static TypeMap build(const SyntaxTree& t) {
    TypeMap m;
    auto add = [&](const std::string& name, std::string type) {
      auto [it, inserted] = m.types.emplace(name, std::move(type));
      if (!inserted && it->second != type) it->second = "";
    };
    t.walk(t.root(), [&](NodeId id) {
      const Node& n = t.node(id);
      if (n.kind == NodeKind::Param) {
        add(std::string(t.token_text(n.aux)), std::string(t.text(n.children[0])));
      } else if (n.kind == NodeKind::LocalVarDecl || n.kind == NodeKind::FieldDecl) {
        std::string type(t.text(n.children[0]));
        for (std::size_t i = 1; i < n.children.size(); ++i)
          add(std::string(t.token_text(t.node(n.children[i]).aux)), type);
      } else if (n.kind == NodeKind::ForEachStmt) {
        add(std::string(t.token_text(n.aux)), std::string(t.text(n.children[0])));
      }
    });
    return m;
  }

  static int numeric_rank(std::string_view type) {
    if (type == "byte" || type == "short" || type == "char" || type == "int") return 1;
    if (type == "long") return 2;
    if (type == "float") return 3;
    if (type == "double") return 4;
    return 0;
  }

  std::optional<std::string> combine(const std::optional<std::string>& a,
                                     const std::optional<std::string>& b,
                                     std::string_view op) const {
    if (!a || !b) return std::nullopt;
    if (op == "+" && (*a == "String" || *b == "String")) return "String";
    int ra = numeric_rank(*a), rb = numeric_rank(*b);
    if (ra == 0 || rb == 0) return std::nullopt;
    int r = std::max(std::max(ra, rb), 1);
    switch (r) {
      case 1: return "int";
      case 2: return "long";
      case 3: return "float";
      default: return "double";
    }
  }

  std::optional<std::string> resolve(const SyntaxTree& t, NodeId id) const {
    const Node& n = t.node(id);
    switch (n.kind) {
      case NodeKind::Ident: {
        auto it = types.find(std::string(t.token_text(n.aux)));
        if (it == types.end() || it->second.empty()) return std::nullopt;
        return it->second;
      }
      case NodeKind::Literal: {
        const Token& tok = t.tokens()[n.aux];
        switch (tok.kind) {
          case TokenKind::IntLit: return "int";
          case TokenKind::LongLit: return "long";
          case TokenKind::FloatLit: return "double";
          case TokenKind::CharLit: return "char";
          case TokenKind::StringLit: return "String";
          default: break;
        }
        std::string_view text = t.token_text(n.aux);
        if (text == "true" || text == "false") return "boolean";
        return std::nullopt;
      }
      case NodeKind::Paren:
        return resolve(t, n.children[0]);
      case NodeKind::Unary: {
        std::string_view op = t.token_text(n.aux);
        if (op == "!") return "boolean";
        return resolve(t, n.children[0]);
      }
      case NodeKind::Postfix:
        return resolve(t, n.children[0]);
      case NodeKind::Cast:
        return std::string(t.text(n.children[0]));
      case NodeKind::ArrayAccess: {
        auto base = resolve(t, n.children[0]);
        if (!base) return std::nullopt;
        if (base->size() >= 2 && base->substr(base->size() - 2) == "[]")
          return base->substr(0, base->size() - 2);
        return std::nullopt;
      }
      case NodeKind::Binary: {
        std::string_view op = t.token_text(n.aux);
        if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=" ||
            op == "&&" || op == "||")
          return "boolean";
        return combine(resolve(t, n.children[0]), resolve(t, n.children[1]), op);
      }
      case NodeKind::InstanceOf:
        return "boolean";
      case NodeKind::Ternary: {
        auto a = resolve(t, n.children[1]);
        auto b = resolve(t, n.children[2]);
        if (a && b && *a == *b) return a;
        return std::nullopt;
      }
      case NodeKind::FieldAccess: {
        if (t.token_text(n.aux) == "length") {
          auto base = resolve(t, n.children[0]);
          if (base && base->size() >= 2 && base->substr(base->size() - 2) == "[]") return "int";
        }
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }
};

bool is_float_type(std::string_view type) { return type == "float" || type == "double"; }

// All identifier-token texts in the file, for fresh-name and rename
// collision checks.
std::set<std::string> all_ident_texts(const SyntaxTree& t) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < t.tokens().size(); ++i)
    if (t.tokens()[i].kind == TokenKind::Ident)
      out.insert(std::string(t.token_text(static_cast<uint32_t>(i))));
  return out;
}

// ---- per-transform site collectors ------------------------------------------

struct TxOut {
  std::vector<TextEdit> edits;
  int sites = 0;
};

// -- VariableRenaming1 / VariableRenaming2 --

std::optional<std::string> first_char_provider(std::string_view name) {
  if (name.empty()) return std::nullopt;
  return std::string(1, name[0]);
}

std::optional<std::string> synonym_provider(std::string_view name) {
  static const std::map<std::string_view, std::string_view> table = {
      {"res", "result"},   {"result", "res"},     {"num", "number"},
      {"number", "num"},   {"count", "counter"},  {"counter", "count"},
      {"temp", "tmp"},     {"tmp", "temp"},       {"arr", "array"},
      {"array", "arr"},    {"val", "value"},      {"value", "val"},
      {"str", "text"},     {"text", "str"},       {"sum", "total"},
      {"total", "sum"},    {"len", "size"},       {"idx", "index"},
      {"index", "idx"},    {"min", "minimum"},    {"max", "maximum"},
      {"minimum", "min"},  {"maximum", "max"},    {"first", "front"},
      {"last", "back"},    {"found", "located"},  {"flag", "mark"},
      {"pos", "position"}, {"position", "pos"},   {"buf", "buffer"},
      {"buffer", "buf"},   {"elem", "element"},   {"element", "elem"},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return std::string(it->second);
}

TxOut tx_rename(const SyntaxTree& t, const NameProvider& provider) {
  TxOut out;
  std::set<std::string> reserved = all_ident_texts(t);

  for (NodeId method : t.find_all(t.root(), NodeKind::MethodDecl)) {
    // declared variables of this method, in token order
    struct Var {
      std::string name;
      uint32_t decl_tok;
    };
    std::vector<Var> vars;
    t.walk(method, [&](NodeId id) {
      const Node& n = t.node(id);
      if (n.kind == NodeKind::Param || n.kind == NodeKind::Declarator ||
          n.kind == NodeKind::ForEachStmt)
        vars.push_back({std::string(t.token_text(n.aux)), n.aux});
    });
    std::sort(vars.begin(), vars.end(),
              [](const Var& a, const Var& b) { return a.decl_tok < b.decl_tok; });

    std::map<std::string, std::string> renames;
    std::set<std::string> taken;
    for (const Var& v : vars) {
      if (renames.count(v.name)) continue;  // shadowed redeclaration: same target
      std::optional<std::string> want = provider(v.name);
      if (!want || *want == v.name) continue;
      std::string candidate = *want;
      int suffix = 2;
      while ((reserved.count(candidate) && candidate != v.name) || taken.count(candidate))
        candidate = *want + std::to_string(suffix++);
      if (candidate == v.name) continue;
      renames[v.name] = candidate;
      taken.insert(candidate);
    }
    if (renames.empty()) continue;

    out.sites += static_cast<int>(renames.size());
    t.walk(method, [&](NodeId id) {
      const Node& n = t.node(id);
      uint32_t tok = 0;
      if (n.kind == NodeKind::Param || n.kind == NodeKind::Declarator ||
          n.kind == NodeKind::ForEachStmt || n.kind == NodeKind::Ident)
        tok = n.aux;
      else
        return;
      auto it = renames.find(std::string(t.token_text(tok)));
      if (it == renames.end()) return;
      const Span& s = t.tokens()[tok].span;
      out.edits.push_back({{s.begin, s.end}, it->second});
    });
  }
  return out;
}

// -- SwitchRelation / SwitchEqualExp --

bool is_rel_op(std::string_view op) {
  return op == "<" || op == ">" || op == "<=" || op == ">=";
}

std::string mirror_rel(std::string_view op) {
  if (op == "<") return ">";
  if (op == ">") return "<";
  if (op == "<=") return ">=";
  return "<=";
}

TxOut tx_swap_binary(const SyntaxTree& t, bool relational) {
  TxOut out;
  std::vector<NodeId> site_list;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::Binary) return;
    std::string_view op = t.token_text(n.aux);
    if (relational ? is_rel_op(op) : op == "==") site_list.push_back(id);
  });
  if (site_list.empty()) return out;
  std::set<NodeId> sites(site_list.begin(), site_list.end());

  std::function<std::string(NodeId)> rewrite = [&](NodeId id) {
    const Node& n = t.node(id);
    std::string_view op = t.token_text(n.aux);
    std::string new_op = relational ? mirror_rel(op) : std::string(op);
    return text_with_rewrites(t, n.children[1], sites, rewrite) + " " + new_op + " " +
           text_with_rewrites(t, n.children[0], sites, rewrite);
  };

  for (NodeId s : maximal_sites(t, site_list)) {
    Span sp = t.span(s);
    out.edits.push_back({{sp.begin, sp.end}, rewrite(s)});
  }
  out.sites = static_cast<int>(site_list.size());
  return out;
}

// -- SwitchStringEqual --

TxOut tx_switch_string_equal(const SyntaxTree& t) {
  TxOut out;
  std::vector<NodeId> site_list;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::MethodCall || n.children.size() != 2) return;
    if (t.token_text(n.aux) != "equals") return;
    NodeId receiver = n.children[0];
    NodeId arg = n.children[1];
    if (receiver == kNoNode) return;
    if (has_side_effects(t, receiver) || has_side_effects(t, arg)) return;
    site_list.push_back(id);
  });
  if (site_list.empty()) return out;
  std::set<NodeId> sites(site_list.begin(), site_list.end());

  std::function<std::string(NodeId)> rewrite = [&](NodeId id) {
    const Node& n = t.node(id);
    std::string recv = text_with_rewrites(t, n.children[0], sites, rewrite);
    std::string arg = text_with_rewrites(t, n.children[1], sites, rewrite);
    if (!is_atomic_expr(t.node(n.children[1]).kind)) arg = "(" + arg + ")";
    return arg + ".equals(" + recv + ")";
  };

  for (NodeId s : maximal_sites(t, site_list)) {
    Span sp = t.span(s);
    out.edits.push_back({{sp.begin, sp.end}, rewrite(s)});
  }
  out.sites = static_cast<int>(site_list.size());
  return out;
}

// -- Unary2Add / Add2Equal --

// ++/-- statement or for-update entry -> v = v + 1 / v = v - 1
std::optional<std::string> incdec_as_assignment(const SyntaxTree& t, NodeId expr) {
  const Node& n = t.node(expr);
  if (n.kind != NodeKind::Unary && n.kind != NodeKind::Postfix) return std::nullopt;
  std::string_view op = t.token_text(n.aux);
  if (op != "++" && op != "--") return std::nullopt;
  NodeId operand = n.children[0];
  if (!is_duplicable_lvalue(t, operand)) return std::nullopt;
  std::string v(t.text(operand));
  return v + " = " + v + (op == "++" ? " + 1" : " - 1");
}

TxOut tx_unary2add(const SyntaxTree& t) {
  TxOut out;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind == NodeKind::ExprStmt) {
      if (auto repl = incdec_as_assignment(t, n.children[0])) {
        Span sp = t.span(id);
        out.edits.push_back({{sp.begin, sp.end}, *repl + ";"});
        out.sites++;
      }
    } else if (n.kind == NodeKind::ForStmt && n.children[2] != kNoNode) {
      for (NodeId u : t.node(n.children[2]).children) {
        if (auto repl = incdec_as_assignment(t, u)) {
          Span sp = t.span(u);
          out.edits.push_back({{sp.begin, sp.end}, *repl});
          out.sites++;
        }
      }
    }
  });
  return out;
}

std::optional<std::string> compound_as_assignment(const SyntaxTree& t, NodeId expr) {
  const Node& n = t.node(expr);
  if (n.kind != NodeKind::Assign) return std::nullopt;
  std::string_view op = t.token_text(n.aux);
  if (op != "+=" && op != "-=") return std::nullopt;
  NodeId lhs = n.children[0];
  NodeId rhs = n.children[1];
  if (!is_duplicable_lvalue(t, lhs)) return std::nullopt;
  std::string lhs_text(t.text(lhs));
  std::string rhs_text(t.text(rhs));
  if (!is_atomic_expr(t.node(rhs).kind)) rhs_text = "(" + rhs_text + ")";
  return lhs_text + " = " + lhs_text + " " + std::string(op.substr(0, 1)) + " " + rhs_text;
}

TxOut tx_add2equal(const SyntaxTree& t) {
  TxOut out;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind == NodeKind::ExprStmt) {
      if (auto repl = compound_as_assignment(t, n.children[0])) {
        Span sp = t.span(id);
        out.edits.push_back({{sp.begin, sp.end}, *repl + ";"});
        out.sites++;
      }
    } else if (n.kind == NodeKind::ForStmt && n.children[2] != kNoNode) {
      for (NodeId u : t.node(n.children[2]).children) {
        if (auto repl = compound_as_assignment(t, u)) {
          Span sp = t.span(u);
          out.edits.push_back({{sp.begin, sp.end}, *repl});
          out.sites++;
        }
      }
    }
  });
  return out;
}

// -- MergeVarDecl --

bool declarator_has_array_suffix(const SyntaxTree& t, NodeId decl) {
  const Node& n = t.node(decl);
  // tokens between the name and the init (or end) holding '[' mean C-style dims
  uint32_t start = n.aux + 1;
  uint32_t stop = n.last_tok;
  for (uint32_t i = start; i <= stop; ++i) {
    if (is_trivia(t.tokens()[i].kind)) continue;
    std::string_view text = t.token_text(i);
    if (text == "[") return true;
    break;
  }
  return false;
}

TxOut tx_merge_var_decl(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  t.walk(t.root(), [&](NodeId block) {
    if (t.node(block).kind != NodeKind::Block) return;
    const auto& stmts = t.node(block).children;
    std::size_t i = 0;
    while (i < stmts.size()) {
      if (t.node(stmts[i]).kind != NodeKind::LocalVarDecl) {
        ++i;
        continue;
      }
      auto mergeable = [&](NodeId d) {
        const Node& n = t.node(d);
        if (n.kind != NodeKind::LocalVarDecl) return false;
        if (t.token_text(n.first_tok) == "final") return false;
        for (std::size_t c = 1; c < n.children.size(); ++c)
          if (declarator_has_array_suffix(t, n.children[c])) return false;
        return true;
      };
      if (!mergeable(stmts[i])) {
        ++i;
        continue;
      }
      std::string type(t.text(t.node(stmts[i]).children[0]));
      std::size_t j = i + 1;
      while (j < stmts.size() && mergeable(stmts[j]) &&
             std::string(t.text(t.node(stmts[j]).children[0])) == type) {
        // only whitespace may separate the declarations
        std::size_t gap_begin = t.span(stmts[j - 1]).end;
        std::size_t gap_end = t.span(stmts[j]).begin;
        std::string_view gap = std::string_view(src).substr(gap_begin, gap_end - gap_begin);
        if (gap.find_first_not_of(" \t\r\n") != std::string_view::npos) break;
        ++j;
      }
      if (j - i >= 2) {
        std::string repl = type + " ";
        bool first = true;
        for (std::size_t k = i; k < j; ++k) {
          const Node& d = t.node(stmts[k]);
          for (std::size_t c = 1; c < d.children.size(); ++c) {
            if (!first) repl += ", ";
            repl += std::string(t.text(d.children[c]));
            first = false;
          }
        }
        repl += ";";
        out.edits.push_back(
            {{t.span(stmts[i]).begin, t.span(stmts[j - 1]).end}, repl});
        out.sites++;
      }
      i = j;
    }
  });
  return out;
}

// -- InfixDividing --

TxOut tx_infix_dividing(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  TypeMap types = TypeMap::build(t);
  std::vector<NodeId> parents = build_parents(t);
  std::set<std::string> reserved = all_ident_texts(t);
  int temp_counter = 0;

  auto fresh_temp = [&]() {
    for (;;) {
      std::string name = temp_counter == 0 ? "temp" : "temp" + std::to_string(temp_counter + 1);
      ++temp_counter;
      if (!reserved.count(name)) {
        reserved.insert(name);
        return name;
      }
    }
  };

  // statements eligible for hoisting: direct children of a block
  t.walk(t.root(), [&](NodeId block) {
    if (t.node(block).kind != NodeKind::Block) return;
    for (NodeId stmt : t.node(block).children) {
      const Node& sn = t.node(stmt);
      NodeId expr = kNoNode;
      if (sn.kind == NodeKind::ExprStmt && t.node(sn.children[0]).kind == NodeKind::Assign)
        expr = t.node(sn.children[0]).children[1];
      else if (sn.kind == NodeKind::ReturnStmt && sn.children[0] != kNoNode)
        expr = sn.children[0];
      else if (sn.kind == NodeKind::LocalVarDecl && sn.children.size() == 2 &&
               t.node(sn.children[1]).children[0] != kNoNode)
        expr = t.node(sn.children[1]).children[0];
      if (expr == kNoNode) continue;
      if (has_side_effects(t, expr)) continue;

      // first (source order) binary operand of another binary
      NodeId target = kNoNode;
      t.walk(expr, [&](NodeId id) {
        if (target != kNoNode) return;
        const Node& n = t.node(id);
        if (n.kind != NodeKind::Binary) return;
        NodeId p = parents[id];
        if (p == kNoNode || t.node(p).kind != NodeKind::Binary) return;
        std::string_view pop = t.token_text(t.node(p).aux);
        if (pop == "&&" || pop == "||") return;
        // hoisting must not cross a conditionally-evaluated position
        for (NodeId q = p;; q = parents[q]) {
          NodeKind qk = t.node(q).kind;
          if (qk == NodeKind::Ternary) return;
          if (qk == NodeKind::Binary) {
            std::string_view qop = t.token_text(t.node(q).aux);
            if (qop == "&&" || qop == "||") return;
          }
          if (q == expr) break;
        }
        target = id;
      });
      if (target == kNoNode) continue;
      auto type = types.resolve(t, target);
      if (!type) continue;

      std::string name = fresh_temp();
      std::string indent = indent_at(src, t.span(stmt).begin);
      out.edits.push_back({{t.span(stmt).begin, t.span(stmt).begin},
                           *type + " " + name + " = " + std::string(t.text(target)) + ";\n" +
                               indent});
      out.edits.push_back({{t.span(target).begin, t.span(target).end}, name});
      out.sites++;
    }
  });
  return out;
}

// -- For2While --

bool has_continue_outside_nested_loops(const SyntaxTree& t, NodeId body) {
  bool found = false;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    if (id == kNoNode || found) return;
    if (t.node(id).kind == NodeKind::ContinueStmt) {
      found = true;
      return;
    }
    for (NodeId c : t.node(id).children) {
      if (c == kNoNode) continue;
      if (is_loop_kind(t.node(c).kind)) continue;  // their continues bind inward
      visit(c);
    }
  };
  visit(body);
  return found;
}

std::vector<std::string> decl_names(const SyntaxTree& t, NodeId decl) {
  std::vector<std::string> names;
  const Node& n = t.node(decl);
  for (std::size_t i = 1; i < n.children.size(); ++i)
    names.push_back(std::string(t.token_text(t.node(n.children[i]).aux)));
  return names;
}

TxOut tx_for2while(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  std::vector<NodeId> parents = build_parents(t);

  for (NodeId loop : t.find_all(t.root(), NodeKind::ForStmt)) {
    const Node& n = t.node(loop);
    NodeId init = n.children[0], cond = n.children[1], update = n.children[2],
           body = n.children[3];
    if (has_continue_outside_nested_loops(t, body)) continue;

    // hoisting a declared init must not collide with another declaration
    // of the same name elsewhere in the method
    if (init != kNoNode && t.node(init).kind == NodeKind::LocalVarDecl) {
      NodeId method = parents[loop];
      while (method != kNoNode && t.node(method).kind != NodeKind::MethodDecl)
        method = parents[method];
      bool collision = false;
      std::vector<std::string> names = decl_names(t, init);
      t.walk(method == kNoNode ? t.root() : method, [&](NodeId id) {
        const Node& d = t.node(id);
        if (d.kind != NodeKind::Declarator && d.kind != NodeKind::Param &&
            d.kind != NodeKind::ForEachStmt)
          return;
        if (t.span(init).contains(t.span(id))) return;  // our own declarators
        std::string name(t.token_text(d.aux));
        for (const std::string& own : names)
          if (own == name) collision = true;
      });
      if (collision) continue;
    }

    std::string indent = indent_at(src, t.span(loop).begin);

    // init becomes statements before the loop
    if (init != kNoNode) {
      std::string init_text;
      if (t.node(init).kind == NodeKind::LocalVarDecl) {
        init_text = std::string(t.text(init));  // includes its ';'
      } else {
        for (NodeId e : t.node(init).children) {
          if (!init_text.empty()) init_text += "\n" + indent;
          init_text += std::string(t.text(e)) + ";";
        }
      }
      out.edits.push_back(
          {{t.span(loop).begin, t.span(loop).begin}, init_text + "\n" + indent});
    }

    // for-header -> while-header
    std::string cond_text = cond == kNoNode ? "true" : std::string(t.text(cond));
    std::size_t header_end = t.span(body).begin;
    // trim trailing layout between ')' and body from the replaced range
    std::size_t close = header_end;
    while (close > 0 && src[close - 1] != ')') --close;
    out.edits.push_back({{t.span(loop).begin, close}, "while (" + cond_text + ")"});

    // update becomes trailing body statements
    if (update != kNoNode) {
      std::vector<std::string> upd_texts;
      for (NodeId e : t.node(update).children)
        upd_texts.push_back(std::string(t.text(e)) + ";");
      const Node& b = t.node(body);
      if (b.kind == NodeKind::Block) {
        if (!b.children.empty()) {
          std::size_t after_last = t.span(b.children.back()).end;
          std::string stmt_indent = indent_at(src, t.span(b.children.back()).begin);
          std::string ins;
          for (const std::string& u : upd_texts) ins += "\n" + stmt_indent + u;
          out.edits.push_back({{after_last, after_last}, ins});
        } else {
          std::size_t brace = t.span(body).end - 1;
          std::string ins;
          for (const std::string& u : upd_texts) ins += u + " ";
          out.edits.push_back({{brace, brace}, ins});
        }
      } else {
        std::string body_text(t.text(body));
        if (t.node(body).kind == NodeKind::EmptyStmt) body_text = "";
        std::string ins = "{ " + body_text;
        for (const std::string& u : upd_texts) ins += (ins.back() == ' ' ? "" : " ") + u;
        ins += " }";
        out.edits.push_back({{t.span(body).begin, t.span(body).end}, ins});
      }
    }
    out.sites++;
  }
  return out;
}

// -- While2For --

bool is_update_shaped(const SyntaxTree& t, NodeId stmt) {
  const Node& n = t.node(stmt);
  if (n.kind != NodeKind::ExprStmt) return false;
  NodeKind ek = t.node(n.children[0]).kind;
  if (ek == NodeKind::Assign) return true;
  if (ek == NodeKind::Unary || ek == NodeKind::Postfix) {
    std::string_view op = t.token_text(t.node(n.children[0]).aux);
    return op == "++" || op == "--";
  }
  return false;
}

// Any identifier in `subtree` with the given text?
bool mentions_name(const SyntaxTree& t, NodeId subtree, const std::string& name) {
  bool found = false;
  t.walk(subtree, [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind == NodeKind::Ident && t.token_text(n.aux) == name) found = true;
    if ((n.kind == NodeKind::Declarator || n.kind == NodeKind::Param) &&
        t.token_text(n.aux) == name)
      found = true;
  });
  return found;
}

TxOut tx_while2for(const SyntaxTree& t) {
  TxOut out;
  std::vector<NodeId> parents = build_parents(t);

  for (NodeId loop : t.find_all(t.root(), NodeKind::WhileStmt)) {
    const Node& n = t.node(loop);
    NodeId cond = n.children[0], body = n.children[1];

    // update candidate: last body statement, only when no continue could
    // skip it
    NodeId update_stmt = kNoNode;
    if (t.node(body).kind == NodeKind::Block && !t.node(body).children.empty() &&
        !has_continue_outside_nested_loops(t, body)) {
      NodeId last = t.node(body).children.back();
      if (is_update_shaped(t, last)) update_stmt = last;
    }

    // init candidate: the statement immediately before the loop
    NodeId init_stmt = kNoNode;
    NodeId enclosing = parents[loop];
    if (enclosing != kNoNode && t.node(enclosing).kind == NodeKind::Block) {
      const auto& siblings = t.node(enclosing).children;
      auto it = std::find(siblings.begin(), siblings.end(), loop);
      if (it != siblings.begin() && it != siblings.end()) {
        NodeId prev = *(it - 1);
        const Node& p = t.node(prev);
        if (p.kind == NodeKind::LocalVarDecl && p.children.size() == 2 &&
            t.node(p.children[1]).children[0] != kNoNode) {
          std::string name(t.token_text(t.node(p.children[1]).aux));
          bool in_cond = mentions_name(t, cond, name);
          bool used_after = false;
          for (auto after = it + 1; after != siblings.end(); ++after)
            if (mentions_name(t, *after, name)) used_after = true;
          if (in_cond && !used_after) init_stmt = prev;
        } else if (p.kind == NodeKind::ExprStmt &&
                   t.node(p.children[0]).kind == NodeKind::Assign) {
          NodeId lhs = t.node(p.children[0]).children[0];
          if (t.node(lhs).kind == NodeKind::Ident &&
              t.token_text(t.node(p.children[0]).aux) == "=" &&
              mentions_name(t, cond, std::string(t.text(lhs))))
            init_stmt = prev;
        }
      }
    }

    std::string init_text;  // includes trailing ';'
    if (init_stmt != kNoNode) {
      init_text = std::string(t.text(init_stmt));
      if (t.node(init_stmt).kind == NodeKind::ExprStmt &&
          init_text.back() != ';')
        init_text += ";";
    } else {
      init_text = ";";
    }
    std::string update_text;
    if (update_stmt != kNoNode) {
      update_text = std::string(t.text(t.node(update_stmt).children[0]));
    }

    std::string header = "for (" + init_text + " " + std::string(t.text(cond)) + "; " +
                         update_text + ")";

    const std::string& src = t.source();
    // replace from the init statement (if hoisted) through the ')'
    std::size_t begin =
        init_stmt != kNoNode ? t.span(init_stmt).begin : t.span(loop).begin;
    std::size_t header_end = t.span(body).begin;
    while (header_end > 0 && src[header_end - 1] != ')') --header_end;
    out.edits.push_back({{begin, header_end}, header});

    // drop the moved update statement
    if (update_stmt != kNoNode) {
      const auto& body_children = t.node(body).children;
      std::size_t del_begin;
      if (body_children.size() >= 2)
        del_begin = t.span(body_children[body_children.size() - 2]).end;
      else
        del_begin = t.span(body).begin + 1;  // just after '{'
      out.edits.push_back({{del_begin, t.span(update_stmt).end}, ""});
    }
    out.sites++;
  }
  return out;
}

// -- ElseIf2If --

TxOut tx_elseif2if(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  std::vector<NodeId> site_list;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::IfStmt) return;
    NodeId else_branch = n.children[2];
    if (else_branch != kNoNode && t.node(else_branch).kind == NodeKind::IfStmt)
      site_list.push_back(id);
  });
  if (site_list.empty()) return out;
  std::set<NodeId> sites(site_list.begin(), site_list.end());

  std::function<std::string(NodeId)> rewrite = [&](NodeId id) -> std::string {
    const Node& n = t.node(id);
    NodeId then_branch = n.children[1];
    NodeId else_branch = n.children[2];
    auto sub = [&](NodeId x) {
      return sites.count(x) ? rewrite(x) : text_with_rewrites(t, x, sites, rewrite);
    };
    std::string head = src.substr(t.span(id).begin, t.span(then_branch).begin - t.span(id).begin);
    std::string mid = src.substr(t.span(then_branch).end,
                                 t.span(else_branch).begin - t.span(then_branch).end);
    return head + sub(then_branch) + mid + "{ " + sub(else_branch) + " }";
  };

  for (NodeId s : maximal_sites(t, site_list)) {
    Span sp = t.span(s);
    out.edits.push_back({{sp.begin, sp.end}, rewrite(s)});
  }
  out.sites = static_cast<int>(site_list.size());
  return out;
}

// -- Switch2If --

bool group_break_safe(const SyntaxTree& t, const std::vector<NodeId>& stmts, NodeId trailing) {
  bool bad = false;
  std::function<void(NodeId)> visit = [&](NodeId id) {
    if (id == kNoNode || bad) return;
    if (id == trailing) return;
    NodeKind k = t.node(id).kind;
    if (k == NodeKind::BreakStmt) {
      bad = true;
      return;
    }
    if (is_loop_kind(k) || k == NodeKind::SwitchStmt) return;  // breaks bind inward
    for (NodeId c : t.node(id).children) visit(c);
  };
  for (NodeId s : stmts) visit(s);
  return !bad;
}

TxOut tx_switch2if(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();

  for (NodeId sw : t.find_all(t.root(), NodeKind::SwitchStmt)) {
    const Node& n = t.node(sw);
    NodeId selector = n.children[0];
    if (has_side_effects(t, selector)) continue;
    std::string sel(t.text(selector));
    if (t.node(selector).kind != NodeKind::Ident &&
        t.node(selector).kind != NodeKind::FieldAccess &&
        t.node(selector).kind != NodeKind::Paren &&
        t.node(selector).kind != NodeKind::MethodCall)
      sel = "(" + sel + ")";

    struct Group {
      std::vector<std::string> conditions;  // empty for default
      bool is_default = false;
      std::string body;  // original text, trailing break removed
      bool ok = true;
    };
    std::vector<Group> groups;
    bool viable = true;
    for (std::size_t gi = 1; gi < n.children.size() && viable; ++gi) {
      NodeId case_id = n.children[gi];
      const Node& g = t.node(case_id);
      Group group;
      group.is_default = g.aux == 1;
      NodeId labels = g.children[0];
      for (NodeId label : t.node(labels).children) {
        bool is_string = t.node(label).kind == NodeKind::Literal &&
                         t.tokens()[t.node(label).aux].kind == TokenKind::StringLit;
        group.conditions.push_back(is_string
                                       ? sel + ".equals(" + std::string(t.text(label)) + ")"
                                       : sel + " == " + std::string(t.text(label)));
      }
      std::vector<NodeId> stmts(g.children.begin() + 1, g.children.end());
      bool last_group = gi + 1 == n.children.size();
      NodeId trailing = kNoNode;
      if (!stmts.empty()) {
        const Node& last = t.node(stmts.back());
        if (last.kind == NodeKind::BreakStmt && last.aux == 0)
          trailing = stmts.back();
        else if (last.kind != NodeKind::ReturnStmt && last.kind != NodeKind::ThrowStmt &&
                 !last_group)
          viable = false;  // falls through
      } else if (!last_group) {
        viable = false;
      }
      if (!viable) break;
      if (!group_break_safe(t, stmts, trailing)) {
        viable = false;
        break;
      }
      if (group.is_default && !last_group) {
        viable = false;
        break;
      }
      std::vector<NodeId> kept = stmts;
      if (trailing != kNoNode) kept.pop_back();
      if (!kept.empty())
        group.body = src.substr(t.span(kept.front()).begin,
                                t.span(kept.back()).end - t.span(kept.front()).begin);
      groups.push_back(std::move(group));
    }
    if (!viable || groups.empty()) continue;

    std::string indent = indent_at(src, t.span(sw).begin);
    std::string inner = indent + "    ";
    std::string repl;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const Group& g = groups[gi];
      if (gi == 0 && g.is_default) {
        // default-only switch degenerates to a block
        repl = "{\n" + (g.body.empty() ? "" : inner + g.body + "\n") + indent + "}";
        break;
      }
      if (gi == 0) {
        repl += "if (";
      } else if (g.is_default) {
        repl += " else {";
      } else {
        repl += " else if (";
      }
      if (!g.is_default) {
        for (std::size_t ci = 0; ci < g.conditions.size(); ++ci) {
          if (ci) repl += " || ";
          repl += g.conditions[ci];
        }
        repl += ") {";
      }
      repl += "\n";
      if (!g.body.empty()) repl += inner + g.body + "\n";
      repl += indent + "}";
    }
    out.edits.push_back({{t.span(sw).begin, t.span(sw).end}, repl});
    out.sites++;
  }
  return out;
}

// -- SwapStatement --

void collect_reads_writes(const SyntaxTree& t, NodeId stmt, std::set<std::string>& reads,
                          std::set<std::string>& writes) {
  std::function<NodeId(NodeId)> lvalue_root = [&](NodeId id) -> NodeId {
    const Node& n = t.node(id);
    switch (n.kind) {
      case NodeKind::Ident: return id;
      case NodeKind::Paren: return lvalue_root(n.children[0]);
      case NodeKind::ArrayAccess:
      case NodeKind::FieldAccess: return lvalue_root(n.children[0]);
      default: return kNoNode;
    }
  };
  t.walk(stmt, [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind == NodeKind::Ident) reads.insert(std::string(t.token_text(n.aux)));
    if (n.kind == NodeKind::Declarator) writes.insert(std::string(t.token_text(n.aux)));
    if (n.kind == NodeKind::Assign) {
      NodeId root = lvalue_root(n.children[0]);
      if (root != kNoNode) writes.insert(std::string(t.token_text(t.node(root).aux)));
    }
    if (n.kind == NodeKind::Unary || n.kind == NodeKind::Postfix) {
      std::string_view op = t.token_text(n.aux);
      if (op == "++" || op == "--") {
        NodeId root = lvalue_root(n.children[0]);
        if (root != kNoNode) writes.insert(std::string(t.token_text(t.node(root).aux)));
      }
    }
  });
}

bool swap_eligible(const SyntaxTree& t, NodeId stmt) {
  NodeKind k = t.node(stmt).kind;
  if (k != NodeKind::ExprStmt && k != NodeKind::LocalVarDecl) return false;
  bool calls = false;
  t.walk(stmt, [&](NodeId id) {
    NodeKind ik = t.node(id).kind;
    if (ik == NodeKind::MethodCall || ik == NodeKind::NewExpr) calls = true;
  });
  return !calls;
}

TxOut tx_swap_statement(const SyntaxTree& t) {
  TxOut out;
  t.walk(t.root(), [&](NodeId block) {
    if (t.node(block).kind != NodeKind::Block) return;
    const auto& stmts = t.node(block).children;
    std::size_t i = 0;
    while (i + 1 < stmts.size()) {
      NodeId a = stmts[i], b = stmts[i + 1];
      if (!swap_eligible(t, a) || !swap_eligible(t, b)) {
        ++i;
        continue;
      }
      std::set<std::string> ra, wa, rb, wb;
      collect_reads_writes(t, a, ra, wa);
      collect_reads_writes(t, b, rb, wb);
      auto intersects = [](const std::set<std::string>& x, const std::set<std::string>& y) {
        for (const auto& e : x)
          if (y.count(e)) return true;
        return false;
      };
      if (intersects(wa, rb) || intersects(wa, wb) || intersects(wb, ra)) {
        ++i;
        continue;
      }
      out.edits.push_back({{t.span(a).begin, t.span(a).end}, std::string(t.text(b))});
      out.edits.push_back({{t.span(b).begin, t.span(b).end}, std::string(t.text(a))});
      out.sites++;
      i += 2;
    }
  });
  return out;
}

// -- ReverseIf --

std::string negate_condition(const SyntaxTree& t, NodeId cond, const TypeMap& types) {
  const Node& n = t.node(cond);
  if (n.kind == NodeKind::Paren)
    return "(" + negate_condition(t, n.children[0], types) + ")";
  if (n.kind == NodeKind::Unary && t.token_text(n.aux) == "!")
    return std::string(t.text(n.children[0]));
  if (n.kind == NodeKind::Literal) {
    std::string_view text = t.token_text(n.aux);
    if (text == "true") return "false";
    if (text == "false") return "true";
  }
  if (n.kind == NodeKind::Binary) {
    std::string_view op = t.token_text(n.aux);
    std::string l(t.text(n.children[0]));
    std::string r(t.text(n.children[1]));
    if (op == "==") return l + " != " + r;
    if (op == "!=") return l + " == " + r;
    if (is_rel_op(op)) {
      auto lt = types.resolve(t, n.children[0]);
      auto rt = types.resolve(t, n.children[1]);
      bool float_free = lt && rt && !is_float_type(*lt) && !is_float_type(*rt) &&
                        TypeMap::numeric_rank(*lt) > 0 && TypeMap::numeric_rank(*rt) > 0;
      if (float_free) {
        std::string neg(op == "<" ? ">=" : op == ">" ? "<=" : op == "<=" ? ">" : "<");
        return l + " " + neg + " " + r;
      }
    }
  }
  if (is_atomic_expr(n.kind) && n.kind != NodeKind::Paren)
    return "!" + std::string(t.text(cond));
  return "!(" + std::string(t.text(cond)) + ")";
}

TxOut tx_reverse_if(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  TypeMap types = TypeMap::build(t);
  std::vector<NodeId> site_list;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::IfStmt) return;
    NodeId else_branch = n.children[2];
    if (else_branch == kNoNode) return;
    if (t.node(else_branch).kind == NodeKind::IfStmt) return;  // else-if chain
    site_list.push_back(id);
  });
  if (site_list.empty()) return out;
  std::set<NodeId> sites(site_list.begin(), site_list.end());

  std::function<std::string(NodeId)> rewrite = [&](NodeId id) -> std::string {
    const Node& n = t.node(id);
    NodeId cond = n.children[0], then_branch = n.children[1], else_branch = n.children[2];
    auto sub = [&](NodeId x) {
      return sites.count(x) ? rewrite(x) : text_with_rewrites(t, x, sites, rewrite);
    };
    std::string head =
        src.substr(t.span(id).begin, t.span(cond).begin - t.span(id).begin);
    std::string after_cond =
        src.substr(t.span(cond).end, t.span(then_branch).begin - t.span(cond).end);
    std::string gap = src.substr(t.span(then_branch).end,
                                 t.span(else_branch).begin - t.span(then_branch).end);
    return head + negate_condition(t, cond, types) + after_cond + sub(else_branch) + gap +
           sub(then_branch);
  };

  for (NodeId s : maximal_sites(t, site_list)) {
    Span sp = t.span(s);
    out.edits.push_back({{sp.begin, sp.end}, rewrite(s)});
  }
  out.sites = static_cast<int>(site_list.size());
  return out;
}

// -- If2CondExp --

// Unwraps a branch that is a single-statement block.
NodeId single_statement(const SyntaxTree& t, NodeId branch) {
  if (branch == kNoNode) return kNoNode;
  const Node& n = t.node(branch);
  if (n.kind == NodeKind::Block)
    return n.children.size() == 1 ? n.children[0] : kNoNode;
  return branch;
}

TxOut tx_if2condexp(const SyntaxTree& t) {
  TxOut out;
  for (NodeId id : t.find_all(t.root(), NodeKind::IfStmt)) {
    const Node& n = t.node(id);
    NodeId cond = n.children[0];
    NodeId a = single_statement(t, n.children[1]);
    NodeId b = single_statement(t, n.children[2]);
    if (a == kNoNode || b == kNoNode) continue;
    const Node& an = t.node(a);
    const Node& bn = t.node(b);

    std::string cond_text(t.text(cond));
    if (t.node(cond).kind == NodeKind::Ternary || t.node(cond).kind == NodeKind::Assign)
      cond_text = "(" + cond_text + ")";
    auto arm = [&](NodeId e) {
      std::string text(t.text(e));
      if (t.node(e).kind == NodeKind::Assign) text = "(" + text + ")";
      return text;
    };

    std::string repl;
    if (an.kind == NodeKind::ReturnStmt && bn.kind == NodeKind::ReturnStmt &&
        an.children[0] != kNoNode && bn.children[0] != kNoNode) {
      repl = "return " + cond_text + " ? " + arm(an.children[0]) + " : " +
             arm(bn.children[0]) + ";";
    } else if (an.kind == NodeKind::ExprStmt && bn.kind == NodeKind::ExprStmt) {
      NodeId ea = an.children[0], eb = bn.children[0];
      if (t.node(ea).kind != NodeKind::Assign || t.node(eb).kind != NodeKind::Assign) continue;
      std::string_view op_a = t.token_text(t.node(ea).aux);
      std::string_view op_b = t.token_text(t.node(eb).aux);
      if (op_a != op_b) continue;
      NodeId lhs_a = t.node(ea).children[0];
      NodeId lhs_b = t.node(eb).children[0];
      if (t.text(lhs_a) != t.text(lhs_b)) continue;
      if (!is_duplicable_lvalue(t, lhs_a)) continue;
      repl = std::string(t.text(lhs_a)) + " " + std::string(op_a) + " " + cond_text + " ? " +
             arm(t.node(ea).children[1]) + " : " + arm(t.node(eb).children[1]) + ";";
    } else {
      continue;
    }
    out.edits.push_back({{t.span(id).begin, t.span(id).end}, repl});
    out.sites++;
  }
  return out;
}

// -- CondExp2If --

TxOut tx_condexp2if(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    std::string indent = indent_at(src, t.span(id).begin);
    std::string inner = indent + "    ";

    if (n.kind == NodeKind::ReturnStmt && n.children[0] != kNoNode &&
        t.node(n.children[0]).kind == NodeKind::Ternary) {
      const Node& tern = t.node(n.children[0]);
      std::string repl = "if (" + std::string(t.text(tern.children[0])) + ") {\n" + inner +
                         "return " + std::string(t.text(tern.children[1])) + ";\n" + indent +
                         "} else {\n" + inner + "return " +
                         std::string(t.text(tern.children[2])) + ";\n" + indent + "}";
      out.edits.push_back({{t.span(id).begin, t.span(id).end}, repl});
      out.sites++;
      return;
    }
    if (n.kind != NodeKind::ExprStmt) return;
    const Node& e = t.node(n.children[0]);
    if (e.kind != NodeKind::Assign) return;
    if (t.node(e.children[1]).kind != NodeKind::Ternary) return;
    if (!is_duplicable_lvalue(t, e.children[0])) return;
    const Node& tern = t.node(e.children[1]);
    std::string lhs(t.text(e.children[0]));
    std::string op(t.token_text(e.aux));
    std::string repl = "if (" + std::string(t.text(tern.children[0])) + ") {\n" + inner + lhs +
                       " " + op + " " + std::string(t.text(tern.children[1])) + ";\n" + indent +
                       "} else {\n" + inner + lhs + " " + op + " " +
                       std::string(t.text(tern.children[2])) + ";\n" + indent + "}";
    out.edits.push_back({{t.span(id).begin, t.span(id).end}, repl});
    out.sites++;
  });
  return out;
}

// -- DividingComposedIf --

TxOut tx_dividing_composed_if(const SyntaxTree& t) {
  TxOut out;
  const std::string& src = t.source();
  std::vector<NodeId> site_list;
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::IfStmt) return;
    if (n.children[2] != kNoNode) return;  // only else-less sites
    const Node& cond = t.node(n.children[0]);
    if (cond.kind != NodeKind::Binary) return;
    std::string_view op = t.token_text(cond.aux);
    if (op == "&&" || op == "||") site_list.push_back(id);
  });
  if (site_list.empty()) return out;
  std::set<NodeId> sites(site_list.begin(), site_list.end());

  std::function<std::string(NodeId)> rewrite = [&](NodeId id) -> std::string {
    const Node& n = t.node(id);
    const Node& cond = t.node(n.children[0]);
    NodeId then_branch = n.children[1];
    std::string_view op = t.token_text(cond.aux);
    std::string left(t.text(cond.children[0]));
    std::string right(t.text(cond.children[1]));
    std::string then_text = sites.count(then_branch)
                                ? rewrite(then_branch)
                                : text_with_rewrites(t, then_branch, sites, rewrite);
    std::string indent = indent_at(src, t.span(id).begin);
    std::string inner = indent + "    ";
    if (op == "&&") {
      return "if (" + left + ") {\n" + inner + "if (" + right + ") " + then_text + "\n" +
             indent + "}";
    }
    return "if (" + left + ") " + then_text + " else {\n" + inner + "if (" + right + ") " +
           then_text + "\n" + indent + "}";
  };

  for (NodeId s : maximal_sites(t, site_list)) {
    Span sp = t.span(s);
    out.edits.push_back({{sp.begin, sp.end}, rewrite(s)});
  }
  out.sites = static_cast<int>(site_list.size());
  return out;
}

// ---- driver ------------------------------------------------------------------

TxOut run_transform(TransformId id, const SyntaxTree& t, const TransformOptions& options) {
  switch (id) {
    case TransformId::VariableRenaming1:
      return tx_rename(t, first_char_provider);
    case TransformId::VariableRenaming2:
      return tx_rename(t, options.rename_provider ? options.rename_provider : synonym_provider);
    case TransformId::SwitchRelation:
      return tx_swap_binary(t, true);
    case TransformId::Unary2Add:
      return tx_unary2add(t);
    case TransformId::Add2Equal:
      return tx_add2equal(t);
    case TransformId::MergeVarDecl:
      return tx_merge_var_decl(t);
    case TransformId::InfixDividing:
      return tx_infix_dividing(t);
    case TransformId::SwitchEqualExp:
      return tx_swap_binary(t, false);
    case TransformId::SwitchStringEqual:
      return tx_switch_string_equal(t);
    case TransformId::For2While:
      return tx_for2while(t);
    case TransformId::While2For:
      return tx_while2for(t);
    case TransformId::ElseIf2If:
      return tx_elseif2if(t);
    case TransformId::Switch2If:
      return tx_switch2if(t);
    case TransformId::SwapStatement:
      return tx_swap_statement(t);
    case TransformId::ReverseIf:
      return tx_reverse_if(t);
    case TransformId::If2CondExp:
      return tx_if2condexp(t);
    case TransformId::CondExp2If:
      return tx_condexp2if(t);
    case TransformId::DividingComposedIf:
      return tx_dividing_composed_if(t);
  }
  return {};
}

// Shifts an annotation anchor through the applied edits. Anchors inside a
// replaced span re-attach to the start of the replacement.
std::size_t remap_anchor(std::size_t anchor, const std::vector<TextEdit>& sorted_edits) {
  std::ptrdiff_t delta = 0;
  for (const TextEdit& e : sorted_edits) {
    if (e.span.end <= anchor) {
      // An insertion exactly at the anchor lands here too: the annotation
      // stays attached to the token that now follows the inserted text.
      delta += static_cast<std::ptrdiff_t>(e.replacement.size()) -
               static_cast<std::ptrdiff_t>(e.span.size());
      continue;
    }
    if (e.span.begin <= anchor && anchor < e.span.end)
      return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(e.span.begin) + delta);
    if (e.span.begin >= anchor) break;
  }
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(anchor) + delta);
}

}  // namespace

TransformResult apply(TransformId id, const std::string& source,
                      const TransformOptions& options) {
  TransformResult result;
  result.transform = id;
  result.variant_source = source;

  StrippedProgram stripped = strip_annotations_source(source);
  SyntaxTree tree = parse(stripped.bare);
  TxOut tx = run_transform(id, tree, options);
  if (tx.sites == 0 || tx.edits.empty()) return result;

  std::stable_sort(tx.edits.begin(), tx.edits.end(), [](const TextEdit& a, const TextEdit& b) {
    return a.span.begin < b.span.begin;
  });
  std::string variant_bare = apply_edits(stripped.bare, tx.edits);

  std::string variant;
  if (stripped.index.entries.empty()) {
    variant = variant_bare;
  } else {
    AnnotationIndex remapped = stripped.index;
    for (AnnotationEntry& e : remapped.entries) e.anchor = remap_anchor(e.anchor, tx.edits);
    variant = embed_annotations(variant_bare, remapped).source;
  }
  parse(variant);  // a transform must never produce unparseable output

  if (variant == source) return result;  // rewrites cancelled out
  result.variant_source = std::move(variant);
  result.sites_rewritten = tx.sites;
  result.applicable = true;
  return result;
}

TransformResult apply(TransformId id, const std::string& source) {
  return apply(id, source, TransformOptions{});
}

std::set<TransformId> applicable_transforms(const std::string& source) {
  std::set<TransformId> out;
  for (TransformId id : all_transforms())
    if (apply(id, source).applicable) out.insert(id);
  return out;
}

}  // namespace jmlbench
