// mutate.hpp - Mutant generation for the completeness proxy: seeded faults,
// equivalent-mutant suppression, and pairing with an unchanged specification.
#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jmlbench/ast.hpp"

namespace jmlbench {

enum class MutationOperator : uint8_t {
  RelationalOpReplace,
  ArithmeticOpReplace,
  LogicalConnectorReplace,
  UnaryInsert,
  LiteralReplace,
  StatementDelete,
};

constexpr MutationOperator kAllMutationOperators[] = {
    MutationOperator::RelationalOpReplace,  MutationOperator::ArithmeticOpReplace,
    MutationOperator::LogicalConnectorReplace, MutationOperator::UnaryInsert,
    MutationOperator::LiteralReplace,       MutationOperator::StatementDelete,
};

std::string_view to_string(MutationOperator op);
std::optional<MutationOperator> mutation_operator_from_string(std::string_view name);
std::set<MutationOperator> all_mutation_operators();

struct Mutant {
  std::string source;
  std::string parent_id;
  MutationOperator op = MutationOperator::RelationalOpReplace;
  Span site;  // replaced span in the parent source
  bool suppressed = false;

  bool operator==(const Mutant&) const = default;
};

struct MutantSet {
  std::string parent_id;
  std::string parent_source;
  std::vector<Mutant> mutants;
};

// One mutant per (site, replacement) pair, in a stable order: operators in
// enum order, sites in tree preorder, replacements in a fixed sequence.
// Every mutant parses; byte-identical duplicates are dropped.
MutantSet generate_mutants(const std::string& bare_source,
                           const std::set<MutationOperator>& operators,
                           const std::string& parent_id = "");

// Stable identifier for the mutant at `index`: "<parent_id>_m<index>".
std::string mutant_id(const MutantSet& set, std::size_t index);

// Drops mutants that are syntactically guaranteed to behave like the parent:
// whitespace-only changes, commutative operand swaps of side-effect-free
// operands, and arithmetic identities (*1, /1, +0, -0).
MutantSet suppress_equivalents(const MutantSet& set);

struct CompletenessInputs {
  std::vector<std::pair<Mutant, SpecifiedProgram>> pairs;
  std::vector<std::string> skipped;  // mutants whose annotation anchor was deleted
};

// Embeds the specification's unchanged annotation index into every mutant.
// The specification must strip to the mutants' parent source.
CompletenessInputs completeness_inputs(const SpecifiedProgram& spec, const MutantSet& mutants);

// Writes one source file per mutant plus a mutants.csv ledger
// (id, parent_id, operator, site span, suppressed).
void save_mutants(const MutantSet& set, const std::filesystem::path& dir);

}  // namespace jmlbench
