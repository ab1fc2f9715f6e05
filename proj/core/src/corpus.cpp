#include "jmlbench/corpus.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace jmlbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ControlFlowClass cfc) {
  switch (cfc) {
    case ControlFlowClass::Sequential: return "Sequential";
    case ControlFlowClass::Branching: return "Branching";
    case ControlFlowClass::SinglePathLoop: return "SinglePathLoop";
    case ControlFlowClass::MultiPathLoop: return "MultiPathLoop";
    case ControlFlowClass::NestedLoop: return "NestedLoop";
  }
  return "Sequential";
}

std::optional<ControlFlowClass> control_flow_class_from_string(std::string_view name) {
  for (ControlFlowClass c : kAllControlFlowClasses)
    if (to_string(c) == name) return c;
  return std::nullopt;
}

const ProgramRecord* Corpus::find(std::string_view id) const {
  for (const ProgramRecord& r : records)
    if (r.id == id) return &r;
  return nullptr;
}

namespace {

bool is_loop(NodeKind k) {
  return k == NodeKind::ForStmt || k == NodeKind::ForEachStmt || k == NodeKind::WhileStmt ||
         k == NodeKind::DoStmt;
}

NodeId loop_body(const SyntaxTree& t, NodeId loop) {
  const Node& n = t.node(loop);
  switch (n.kind) {
    case NodeKind::ForStmt: return n.children[3];
    case NodeKind::ForEachStmt: return n.children[2];
    case NodeKind::WhileStmt: return n.children[1];
    case NodeKind::DoStmt: return n.children[0];
    default: return kNoNode;
  }
}

}  // namespace

ControlFlowClass classify_control_flow(const SyntaxTree& tree) {
  bool has_loop = false;
  bool has_branch = false;
  bool nested = false;
  bool multi_path = false;

  tree.walk(tree.root(), [&](NodeId id) {
    NodeKind k = tree.node(id).kind;
    if (k == NodeKind::IfStmt || k == NodeKind::SwitchStmt) has_branch = true;
    if (!is_loop(k)) return;
    has_loop = true;
    tree.walk(loop_body(tree, id), [&](NodeId inner) {
      NodeKind ik = tree.node(inner).kind;
      if (is_loop(ik)) nested = true;
      if (ik == NodeKind::IfStmt || ik == NodeKind::SwitchStmt || ik == NodeKind::BreakStmt ||
          ik == NodeKind::ContinueStmt || ik == NodeKind::ReturnStmt)
        multi_path = true;
    });
  });

  if (nested) return ControlFlowClass::NestedLoop;
  if (multi_path) return ControlFlowClass::MultiPathLoop;
  if (has_loop) return ControlFlowClass::SinglePathLoop;
  if (has_branch) return ControlFlowClass::Branching;
  return ControlFlowClass::Sequential;
}

ControlFlowClass classify_control_flow(const std::string& bare_source) {
  return classify_control_flow(parse(bare_source));
}

namespace {

bool has_annotations(const std::string& source) {
  for (const Token& t : lex(source)) {
    if (t.kind != TokenKind::LineComment && t.kind != TokenKind::BlockComment) continue;
    std::string_view text = std::string_view(source).substr(t.span.begin, t.span.size());
    if (is_jml_comment(text)) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_record(const ProgramRecord& record, const Corpus* corpus,
                                       const std::set<std::string>* known_transforms) {
  std::vector<Violation> out;
  if (record.id.empty()) out.push_back({"EmptyId", "record has no id"});
  try {
    parse(record.bare_source);
  } catch (const ParseError& e) {
    out.push_back({"ParseFailure", record.id + ": " + e.what()});
    return out;  // downstream checks need a lexable source
  }
  if (has_annotations(record.bare_source))
    out.push_back({"AnnotationPresent",
                   record.id + ": bare_source contains specification annotations"});
  if (record.origin.kind == Origin::Kind::Transformed) {
    if (corpus && !corpus->find(record.origin.parent_id))
      out.push_back({"DanglingParent", record.id + ": unknown parent '" +
                                           record.origin.parent_id + "'"});
    if (known_transforms && !known_transforms->count(record.origin.transform_id))
      out.push_back({"UnknownTransform", record.id + ": unknown transform '" +
                                             record.origin.transform_id + "'"});
  }
  return out;
}

namespace {

std::string normalize_newlines(std::string text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      out.push_back('\n');
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Code::MissingSource, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return normalize_newlines(ss.str());
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError(CorpusError::Code::MissingSource, "cannot write " + path.string());
  out << text;
}

}  // namespace

Corpus load_corpus(const fs::path& dir, bool lenient,
                   const std::set<std::string>* known_transforms) {
  fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path))
    throw CorpusError(CorpusError::Code::MissingManifest,
                      "no manifest.json in " + dir.string());

  json manifest;
  try {
    std::ifstream in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw CorpusError(CorpusError::Code::BadManifest,
                      manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("records") ||
      !manifest["records"].is_array())
    throw CorpusError(CorpusError::Code::BadManifest,
                      manifest_path.string() + ": expected object with a 'records' array");

  Corpus corpus;
  corpus.meta.name = manifest.value("name", "");
  corpus.meta.version = manifest.value("version", "");
  corpus.meta.derived_from = manifest.value("derived_from", "");

  std::set<std::string> seen_ids;
  for (const json& entry : manifest["records"]) {
    std::string id = entry.value("id", "");
    if (id.empty())
      throw CorpusError(CorpusError::Code::BadManifest, "manifest record without id");
    if (!seen_ids.insert(id).second) {
      if (lenient) {
        corpus.warnings.push_back("duplicate id skipped: " + id);
        continue;
      }
      throw CorpusError(CorpusError::Code::DuplicateId, "duplicate id: " + id);
    }

    ProgramRecord rec;
    rec.id = id;
    rec.intent = entry.value("intent", "");
    if (entry.contains("parent_id") || entry.contains("transform_id")) {
      rec.origin.kind = Origin::Kind::Transformed;
      rec.origin.parent_id = entry.value("parent_id", "");
      rec.origin.transform_id = entry.value("transform_id", "");
    }

    std::string source_path = entry.value("source_path", "");
    if (source_path.empty())
      throw CorpusError(CorpusError::Code::BadManifest, id + ": record without source_path");
    try {
      rec.bare_source = read_text_file(dir / source_path);
    } catch (const CorpusError&) {
      if (lenient) {
        corpus.warnings.push_back("missing source skipped: " + id);
        continue;
      }
      throw;
    }

    try {
      rec.cfc = classify_control_flow(rec.bare_source);
    } catch (const ParseError& e) {
      if (lenient) {
        corpus.warnings.push_back("unparseable record skipped: " + id + " (" + e.what() + ")");
        continue;
      }
      throw CorpusError(CorpusError::Code::ParseFailure, id + ": " + e.what());
    }

    if (entry.contains("class")) {
      auto declared = control_flow_class_from_string(entry["class"].get<std::string>());
      if (!declared)
        corpus.warnings.push_back(id + ": unknown class '" +
                                  entry["class"].get<std::string>() + "' in manifest");
      else if (*declared != rec.cfc)
        corpus.warnings.push_back(id + ": manifest class " + std::string(to_string(*declared)) +
                                  " recomputed as " + std::string(to_string(rec.cfc)));
    }

    std::vector<Violation> violations = validate_record(rec, nullptr, known_transforms);
    if (!violations.empty()) {
      if (lenient) {
        corpus.warnings.push_back("invalid record skipped: " + id + " (" +
                                  violations.front().code + ")");
        continue;
      }
      throw CorpusError(CorpusError::Code::InvalidRecord,
                        id + ": " + violations.front().code + ": " + violations.front().detail);
    }
    corpus.records.push_back(std::move(rec));
  }

  // parent references are resolvable only once all records are in; a
  // derived corpus keeps its parents in the corpus it was derived from
  for (const ProgramRecord& rec : corpus.records) {
    if (rec.origin.kind != Origin::Kind::Transformed) continue;
    if (!corpus.find(rec.origin.parent_id)) {
      if (lenient || !corpus.meta.derived_from.empty()) {
        corpus.warnings.push_back("dangling parent: " + rec.id + " -> " +
                                  rec.origin.parent_id);
        continue;
      }
      throw CorpusError(CorpusError::Code::InvalidRecord,
                        rec.id + ": DanglingParent: unknown parent '" +
                            rec.origin.parent_id + "'");
    }
  }

  for (const ProgramRecord& rec : corpus.records) corpus.meta.counts[rec.cfc]++;
  return corpus;
}

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "src");
  json manifest;
  manifest["name"] = corpus.meta.name;
  manifest["version"] = corpus.meta.version;
  if (!corpus.meta.derived_from.empty()) manifest["derived_from"] = corpus.meta.derived_from;
  json counts = json::object();
  for (const auto& [cfc, n] : corpus.meta.counts) counts[std::string(to_string(cfc))] = n;
  manifest["counts"] = counts;
  manifest["records"] = json::array();
  for (const ProgramRecord& rec : corpus.records) {
    json entry;
    entry["id"] = rec.id;
    entry["source_path"] = "src/" + rec.id + ".java";
    entry["intent"] = rec.intent;
    entry["class"] = std::string(to_string(rec.cfc));
    if (rec.origin.kind == Origin::Kind::Transformed) {
      entry["parent_id"] = rec.origin.parent_id;
      entry["transform_id"] = rec.origin.transform_id;
    }
    manifest["records"].push_back(entry);
    write_text_file(dir / "src" / (rec.id + ".java"), rec.bare_source);
  }
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace jmlbench
