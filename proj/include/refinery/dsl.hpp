#pragma once

#include <map>

#include "refinery/noise.hpp"
#include "refinery/prob.hpp"
#include "refinery/refinement.hpp"

namespace refinery {

/// Everything a spec file declares, fully resolved and validated. Categories
/// are keyed by name; value enumeration order inside each object follows the
/// declaration.
struct Workspace {
  std::map<std::string, FiniteType> types;
  std::map<std::string, std::string> subtype_parent;  // subtype name -> parent
  std::map<std::string, Operation> operations;
  std::map<std::string, IOTransformer> transformers;
  std::map<std::string, ProbOperation> prob_operations;
  std::map<std::string, NoiseModel> noise_models;
  std::map<std::string, DataType> datatypes;
  std::map<std::string, RetrieveRelation> retrieves;

  bool operator==(const Workspace&) const = default;
};

struct ParseDiagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  int line = 1;
  int column = 1;
  std::string message;

  bool operator==(const ParseDiagnostic&) const = default;
};

std::string format_diagnostic(const ParseDiagnostic& d);

struct ParseResult {
  std::optional<Workspace> workspace;  // engaged iff no error diagnostics
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return workspace.has_value(); }
};

/// Parses and validates a spec text. Never throws, whatever the bytes;
/// failures come back as positioned diagnostics. Declaration order across
/// sections does not matter: names are declared first, then resolved.
ParseResult parse_spec(std::string_view source);

/// Canonical-form source text; parse_spec(render_spec(w)) == w for any
/// workspace produced by parse_spec.
std::string render_spec(const Workspace& w);

}  // namespace refinery
