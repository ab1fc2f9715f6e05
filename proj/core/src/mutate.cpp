#include "jmlbench/mutate.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace jmlbench {

namespace {

struct OpName {
  MutationOperator op;
  std::string_view name;
};

constexpr OpName kOpNames[] = {
    {MutationOperator::RelationalOpReplace, "RelationalOpReplace"},
    {MutationOperator::ArithmeticOpReplace, "ArithmeticOpReplace"},
    {MutationOperator::LogicalConnectorReplace, "LogicalConnectorReplace"},
    {MutationOperator::UnaryInsert, "UnaryInsert"},
    {MutationOperator::LiteralReplace, "LiteralReplace"},
    {MutationOperator::StatementDelete, "StatementDelete"},
};

}  // namespace

std::string_view to_string(MutationOperator op) {
  for (const OpName& e : kOpNames)
    if (e.op == op) return e.name;
  return "?";
}

std::optional<MutationOperator> mutation_operator_from_string(std::string_view name) {
  for (const OpName& e : kOpNames)
    if (e.name == name) return e.op;
  return std::nullopt;
}

std::set<MutationOperator> all_mutation_operators() {
  std::set<MutationOperator> ops;
  for (MutationOperator op : kAllMutationOperators) ops.insert(op);
  return ops;
}

namespace {

// Relational replacements preserve the operand types only within
// {<, >, <=, >=}; == and != also accept booleans and references, so
// they are only ever flipped into each other.
constexpr std::string_view kOrdered[] = {"<", ">", "<=", ">=", "==", "!="};
constexpr std::string_view kArith[] = {"+", "-", "*", "/", "%"};

bool is_ordered_op(std::string_view op) {
  return op == "<" || op == ">" || op == "<=" || op == ">=";
}

bool is_arith_op(std::string_view op) {
  return op == "+" || op == "-" || op == "*" || op == "/" || op == "%";
}

std::string splice(const std::string& source, Span site, std::string_view replacement) {
  std::string out;
  out.reserve(source.size() + replacement.size());
  out.append(source, 0, site.begin);
  out.append(replacement);
  out.append(source, site.end, source.size() - site.end);
  return out;
}

bool parses(const std::string& source) {
  try {
    parse(source);
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

void emit(MutantSet& set, std::unordered_set<std::string>& seen, MutationOperator op,
          Span site, std::string_view replacement) {
  std::string source = splice(set.parent_source, site, replacement);
  if (source == set.parent_source) return;
  if (!seen.insert(source).second) return;
  if (!parses(source)) return;
  set.mutants.push_back(Mutant{std::move(source), set.parent_id, op, site, false});
}

void collect_binary_ops(const SyntaxTree& t, MutantSet& set,
                        std::unordered_set<std::string>& seen, MutationOperator op) {
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::Binary) return;
    std::string_view tok = t.token_text(n.aux);
    Span site = t.tokens()[n.aux].span;
    switch (op) {
      case MutationOperator::RelationalOpReplace:
        if (is_ordered_op(tok)) {
          for (std::string_view r : kOrdered)
            if (r != tok) emit(set, seen, op, site, r);
        } else if (tok == "==") {
          emit(set, seen, op, site, "!=");
        } else if (tok == "!=") {
          emit(set, seen, op, site, "==");
        }
        break;
      case MutationOperator::ArithmeticOpReplace:
        if (is_arith_op(tok))
          for (std::string_view r : kArith)
            if (r != tok) emit(set, seen, op, site, r);
        break;
      case MutationOperator::LogicalConnectorReplace:
        if (tok == "&&") emit(set, seen, op, site, "||");
        else if (tok == "||") emit(set, seen, op, site, "&&");
        break;
      default:
        break;
    }
  });
}

void collect_unary_inserts(const SyntaxTree& t, MutantSet& set,
                           std::unordered_set<std::string>& seen) {
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    NodeId cond = kNoNode;
    switch (n.kind) {
      case NodeKind::IfStmt:
      case NodeKind::WhileStmt:
      case NodeKind::Ternary:
        cond = n.children[0];
        break;
      case NodeKind::DoStmt:
        cond = n.children[1];
        break;
      case NodeKind::ForStmt:
        cond = n.children[1];
        break;
      default:
        return;
    }
    if (cond == kNoNode) return;
    std::string repl = "!(" + std::string(t.text(cond)) + ")";
    emit(set, seen, MutationOperator::UnaryInsert, t.span(cond), repl);
  });
}

void collect_literal_replaces(const SyntaxTree& t, MutantSet& set,
                              std::unordered_set<std::string>& seen) {
  t.walk(t.root(), [&](NodeId id) {
    const Node& n = t.node(id);
    if (n.kind != NodeKind::Literal) return;
    std::string_view text = t.token_text(n.aux);
    Span site = t.tokens()[n.aux].span;
    if (text == "true") {
      emit(set, seen, MutationOperator::LiteralReplace, site, "false");
      return;
    }
    if (text == "false") {
      emit(set, seen, MutationOperator::LiteralReplace, site, "true");
      return;
    }
    if (t.tokens()[n.aux].kind != TokenKind::IntLit) return;
    if (text.size() > 1 && text[0] == '0') return;  // hex/octal/binary forms
    long long k = 0;
    try {
      k = std::stoll(std::string(text));
    } catch (const std::exception&) {
      return;
    }
    const long long candidates[] = {k + 1, k - 1, 0};
    for (long long c : candidates) {
      if (c == k) continue;
      emit(set, seen, MutationOperator::LiteralReplace, site, std::to_string(c));
    }
  });
}

bool deletable_statement(NodeKind kind) {
  switch (kind) {
    case NodeKind::LocalVarDecl:
    case NodeKind::ReturnStmt:
    case NodeKind::EmptyStmt:
      return false;
    default:
      return true;
  }
}

void collect_statement_deletes(const SyntaxTree& t, MutantSet& set,
                               std::unordered_set<std::string>& seen) {
  t.walk(t.root(), [&](NodeId id) {
    if (t.node(id).kind != NodeKind::Block) return;
    for (NodeId child : t.node(id).children) {
      if (child == kNoNode) continue;
      if (!deletable_statement(t.node(child).kind)) continue;
      emit(set, seen, MutationOperator::StatementDelete, t.span(child), "");
    }
  });
}

}  // namespace

MutantSet generate_mutants(const std::string& bare_source,
                           const std::set<MutationOperator>& operators,
                           const std::string& parent_id) {
  SyntaxTree tree = parse(bare_source);
  MutantSet set;
  set.parent_id = parent_id;
  set.parent_source = bare_source;
  std::unordered_set<std::string> seen;
  seen.insert(bare_source);
  for (MutationOperator op : kAllMutationOperators) {
    if (!operators.count(op)) continue;
    switch (op) {
      case MutationOperator::RelationalOpReplace:
      case MutationOperator::ArithmeticOpReplace:
      case MutationOperator::LogicalConnectorReplace:
        collect_binary_ops(tree, set, seen, op);
        break;
      case MutationOperator::UnaryInsert:
        collect_unary_inserts(tree, set, seen);
        break;
      case MutationOperator::LiteralReplace:
        collect_literal_replaces(tree, set, seen);
        break;
      case MutationOperator::StatementDelete:
        collect_statement_deletes(tree, set, seen);
        break;
    }
  }
  return set;
}

namespace {

bool expr_has_side_effects(const SyntaxTree& t, NodeId id) {
  bool found = false;
  t.walk(id, [&](NodeId n) {
    switch (t.node(n).kind) {
      case NodeKind::MethodCall:
      case NodeKind::NewExpr:
      case NodeKind::Assign:
      case NodeKind::Postfix:
        found = true;
        break;
      case NodeKind::Unary: {
        std::string_view op = t.token_text(t.node(n).aux);
        if (op == "++" || op == "--") found = true;
        break;
      }
      default:
        break;
    }
  });
  return found;
}

bool commutative_op(std::string_view op) {
  return op == "+" || op == "*" || op == "==" || op == "!=" || op == "&&" || op == "||";
}

bool has_token_aux(NodeKind kind) {
  switch (kind) {
    case NodeKind::ClassDecl:
    case NodeKind::MethodDecl:
    case NodeKind::Param:
    case NodeKind::Declarator:
    case NodeKind::ForEachStmt:
    case NodeKind::LabeledStmt:
    case NodeKind::Assign:
    case NodeKind::Unary:
    case NodeKind::Postfix:
    case NodeKind::MethodCall:
    case NodeKind::FieldAccess:
      return true;
    default:
      return false;
  }
}

bool has_flag_aux(NodeKind kind) {
  return kind == NodeKind::SwitchCase || kind == NodeKind::TryStmt ||
         kind == NodeKind::NewExpr;
}

// Structural fingerprint that erases parentheses, collapses *1 /1 +0 -0,
// and sorts operands of commutative operators when neither has side
// effects. Two sources with equal fingerprints compute the same values.
std::string canon(const SyntaxTree& t, NodeId id) {
  if (id == kNoNode) return "~";
  const Node& n = t.node(id);
  switch (n.kind) {
    case NodeKind::Paren:
      return canon(t, n.children[0]);
    case NodeKind::Ident:
    case NodeKind::Literal:
      return std::string(t.token_text(n.aux));
    case NodeKind::TypeRef: {
      std::string out;
      for (char c : t.text(id))
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
      return out;
    }
    case NodeKind::Binary: {
      std::string op(t.token_text(n.aux));
      std::string l = canon(t, n.children[0]);
      std::string r = canon(t, n.children[1]);
      if (op == "*" && r == "1") return l;
      if (op == "*" && l == "1") return r;
      if (op == "/" && r == "1") return l;
      if (op == "+" && r == "0") return l;
      if (op == "+" && l == "0") return r;
      if (op == "-" && r == "0") return l;
      if (commutative_op(op) && !expr_has_side_effects(t, n.children[0]) &&
          !expr_has_side_effects(t, n.children[1]) && r < l)
        std::swap(l, r);
      return "(" + l + op + r + ")";
    }
    default: {
      std::string out = std::to_string(static_cast<int>(n.kind));
      if (has_token_aux(n.kind)) {
        out += ':';
        out += t.token_text(n.aux);
      } else if ((n.kind == NodeKind::BreakStmt || n.kind == NodeKind::ContinueStmt) &&
                 n.aux != 0) {
        out += ':';
        out += t.token_text(n.aux);
      } else if (has_flag_aux(n.kind)) {
        out += ':';
        out += static_cast<char>('0' + n.aux);
      }
      out += '{';
      bool first = true;
      for (NodeId c : n.children) {
        if (!first) out += ',';
        first = false;
        out += canon(t, c);
      }
      out += '}';
      return out;
    }
  }
}

}  // namespace

MutantSet suppress_equivalents(const MutantSet& set) {
  SyntaxTree parent_tree = parse(set.parent_source);
  std::string parent_norm = normalize_whitespace(set.parent_source);
  std::string parent_canon = canon(parent_tree, parent_tree.root());
  MutantSet out = set;
  for (Mutant& m : out.mutants) {
    if (m.suppressed) continue;
    if (normalize_whitespace(m.source) == parent_norm) {
      m.suppressed = true;
      continue;
    }
    SyntaxTree mutant_tree = parse(m.source);
    if (canon(mutant_tree, mutant_tree.root()) == parent_canon) m.suppressed = true;
  }
  return out;
}

std::string mutant_id(const MutantSet& set, std::size_t index) {
  std::string prefix = set.parent_id.empty() ? "mutant" : set.parent_id;
  return prefix + "_m" + std::to_string(index);
}

CompletenessInputs completeness_inputs(const SpecifiedProgram& spec, const MutantSet& mutants) {
  StrippedProgram stripped = strip_annotations(spec);
  if (stripped.bare != mutants.parent_source)
    throw std::invalid_argument(
        "completeness_inputs: specification does not strip to the mutants' parent source");

  CompletenessInputs out;
  for (std::size_t i = 0; i < mutants.mutants.size(); ++i) {
    const Mutant& m = mutants.mutants[i];
    if (m.suppressed) continue;
    std::ptrdiff_t delta = static_cast<std::ptrdiff_t>(m.source.size()) -
                           static_cast<std::ptrdiff_t>(mutants.parent_source.size());
    AnnotationIndex remapped = stripped.index;
    bool anchor_deleted = false;
    for (AnnotationEntry& e : remapped.entries) {
      if (e.anchor < m.site.begin) continue;
      if (e.anchor >= m.site.end) {
        e.anchor = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(e.anchor) + delta);
        continue;
      }
      if (m.op == MutationOperator::StatementDelete) {
        anchor_deleted = true;
        break;
      }
      e.anchor = m.site.begin;
    }
    if (anchor_deleted) {
      out.skipped.push_back(mutant_id(mutants, i));
      continue;
    }
    try {
      out.pairs.emplace_back(m, embed_annotations(m.source, remapped, mutant_id(mutants, i)));
    } catch (const AnchorMissing&) {
      out.skipped.push_back(mutant_id(mutants, i));
    }
  }
  return out;
}

void save_mutants(const MutantSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "mutants.csv");
  if (!csv) throw std::runtime_error("save_mutants: cannot write " + (dir / "mutants.csv").string());
  csv << "id,parent_id,operator,site_begin,site_end,suppressed\n";
  for (std::size_t i = 0; i < set.mutants.size(); ++i) {
    const Mutant& m = set.mutants[i];
    std::string id = mutant_id(set, i);
    std::ofstream src(dir / (id + ".java"));
    if (!src) throw std::runtime_error("save_mutants: cannot write " + id);
    src << m.source;
    csv << id << ',' << m.parent_id << ',' << to_string(m.op) << ',' << m.site.begin << ','
        << m.site.end << ',' << (m.suppressed ? 1 : 0) << '\n';
  }
}

}  // namespace jmlbench
