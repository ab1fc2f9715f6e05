// corpus.hpp - Benchmark dataset model: program records, control-flow
// classification, validation, and manifest-backed load/save.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jmlbench/ast.hpp"

namespace jmlbench {

// Ordered by dominance: a program gets the highest class that applies.
enum class ControlFlowClass : uint8_t {
  Sequential,
  Branching,
  SinglePathLoop,
  MultiPathLoop,
  NestedLoop,
};

std::string_view to_string(ControlFlowClass cfc);
std::optional<ControlFlowClass> control_flow_class_from_string(std::string_view name);

constexpr ControlFlowClass kAllControlFlowClasses[] = {
    ControlFlowClass::Sequential,    ControlFlowClass::Branching,
    ControlFlowClass::SinglePathLoop, ControlFlowClass::MultiPathLoop,
    ControlFlowClass::NestedLoop,
};

struct Origin {
  enum class Kind : uint8_t { Base, Transformed };
  Kind kind = Kind::Base;
  std::string parent_id;     // set iff kind == Transformed
  std::string transform_id;  // set iff kind == Transformed

  bool operator==(const Origin&) const = default;
};

struct ProgramRecord {
  std::string id;
  std::string bare_source;
  std::string intent;
  ControlFlowClass cfc = ControlFlowClass::Sequential;
  Origin origin;

  bool operator==(const ProgramRecord&) const = default;
};

struct CorpusMeta {
  std::string name;
  std::string version;
  std::map<ControlFlowClass, std::size_t> counts;
  // Name of the corpus this one was derived from, if any. A derived corpus
  // (e.g. a variant set) references parent records that live elsewhere, so
  // unresolved parents are reported as warnings instead of errors.
  std::string derived_from;

  bool operator==(const CorpusMeta&) const = default;
};

struct Corpus {
  std::vector<ProgramRecord> records;
  CorpusMeta meta;
  std::vector<std::string> warnings;  // load-time notes; not serialized

  const ProgramRecord* find(std::string_view id) const;
  bool operator==(const Corpus& other) const {
    return records == other.records && meta == other.meta;
  }
};

class CorpusError : public std::runtime_error {
public:
  enum class Code {
    MissingManifest,
    BadManifest,
    MissingSource,
    ParseFailure,
    DuplicateId,
    InvalidRecord,
  };

  CorpusError(Code code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  Code code() const { return code_; }

private:
  Code code_;
};

// Syntactic classification over statement-level control flow. Ternary
// conditionals do not count as branching; only if/switch do. Loop bodies
// containing breaks, continues, returns, or branch statements make the
// loop multi-path; a loop lexically containing another loop is nested.
ControlFlowClass classify_control_flow(const SyntaxTree& tree);
ControlFlowClass classify_control_flow(const std::string& bare_source);

struct Violation {
  std::string code;    // AnnotationPresent | ParseFailure | DanglingParent |
                       // UnknownTransform | EmptyId
  std::string detail;

  bool operator==(const Violation&) const = default;
};

// Checks one record's invariants. `corpus` enables parent-reference checks
// for transformed records; `known_transforms` enables transform-id checks.
// Either may be null to skip the corresponding check.
std::vector<Violation> validate_record(const ProgramRecord& record,
                                       const Corpus* corpus = nullptr,
                                       const std::set<std::string>* known_transforms = nullptr);

// Loads `dir`/manifest.json plus one source file per record. Strict mode
// (default) throws on the first invalid record; lenient mode skips invalid
// records and appends a warning. Class fields in the manifest are
// recomputed; mismatches become warnings. Line endings are normalized
// to '\n' on ingest.
Corpus load_corpus(const std::filesystem::path& dir, bool lenient = false,
                   const std::set<std::string>* known_transforms = nullptr);

// Writes manifest.json and src/<id>.java for each record.
// load_corpus(save_corpus(c)) reproduces c field-by-field.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace jmlbench
