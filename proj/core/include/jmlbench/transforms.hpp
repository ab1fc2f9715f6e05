// transforms.hpp - The 18 semantic-preserving source transformations.
// Each transform rewrites every applicable site of a program in one pass,
// preserving any JML annotations verbatim (re-anchored to the rewritten
// layout). Application is deterministic.
#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "jmlbench/ast.hpp"

namespace jmlbench {

enum class TransformId : uint8_t {
  VariableRenaming1,
  VariableRenaming2,
  SwitchRelation,
  Unary2Add,
  Add2Equal,
  MergeVarDecl,
  InfixDividing,
  SwitchEqualExp,
  SwitchStringEqual,
  For2While,
  While2For,
  ElseIf2If,
  Switch2If,
  SwapStatement,
  ReverseIf,
  If2CondExp,
  CondExp2If,
  DividingComposedIf,
};

constexpr int kTransformCount = 18;

std::string_view to_string(TransformId id);
std::optional<TransformId> transform_from_string(std::string_view name);

// All ids in declaration order (the canonical tie-break order).
const std::vector<TransformId>& all_transforms();

// Id names as strings, for corpus validation.
std::set<std::string> transform_id_names();

struct TransformResult {
  std::string variant_source;
  TransformId transform = TransformId::VariableRenaming1;
  int sites_rewritten = 0;
  bool applicable = false;
};

// Maps a variable name to its replacement, or nullopt to leave it alone.
// The default provider for VariableRenaming2 uses a fixed synonym table.
using NameProvider = std::function<std::optional<std::string>(std::string_view)>;

struct TransformOptions {
  NameProvider rename_provider;  // empty -> builtin synonym table
};

// Rewrites all applicable sites of `source` under one transform. If no
// site applies, returns the source unchanged with applicable=false.
// Throws ParseError on unparseable input, RewriteConflict if computed
// edits overlap.
TransformResult apply(TransformId id, const std::string& source);
TransformResult apply(TransformId id, const std::string& source,
                      const TransformOptions& options);

// Exactly the ids for which apply(id, source).applicable is true.
std::set<TransformId> applicable_transforms(const std::string& source);

}  // namespace jmlbench
