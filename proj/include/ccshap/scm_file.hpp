#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ccshap/scm.hpp"

namespace ccshap {

/// SCM declaration document (JSON):
///
///   {"target": "Y",
///    "nodes": [{"name": "C", "parents": [], "mechanism": "exogenous normal(60, 625)"},
///              {"name": "Y", "parents": [], "mechanism": "bernoulli(0.15)"},
///              {"name": "G", "parents": ["C", "Y"], "mechanism": "85 + 0.4 * C + 40 * Y + U",
///               "noise": "normal(0, 100)"}]}
///
/// Edges are taken from the parent lists. Malformed documents raise
/// ParseError, unknown names IdentifierError and cycles CycleError.
Scm parse_scm(std::string_view text);
Scm load_scm(const std::filesystem::path& path);

/// Inverse of parse_scm for expression-based mechanisms; fitted or
/// intervened mechanisms raise ArgumentError.
std::string scm_to_json(const Scm& m);

} // namespace ccshap
