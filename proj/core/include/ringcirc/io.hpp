#pragma once

// File formats: circuits and structures as JSON, circuits as DOT.

#include <string>
#include <string_view>

#include "ringcirc/circuit.hpp"
#include "ringcirc/logic.hpp"

namespace ringcirc {

/// {"domain", "fanin", "label_base", "gates": [{id, label, kind, position?,
/// value?, preds}], "inputs", "outputs"}. Values are rendered with
/// to_string(Value) so they read back exactly.
std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(std::string_view text);

/// {"domain", "universe", "functions": {name: {"kind": "relation" |
/// "number" | "skeleton", "arity", ...}}}. Relations list "tuples"; number
/// and skeleton functions list "entries" [{args, value}] and a "default".
/// On input a number function may instead give dense "values" in
/// lexicographic argument order.
std::string structure_to_json(const Structure& s);
Structure structure_from_json(std::string_view text);

/// Graphviz digraph; node shape by gate kind, label prefix in the node text.
std::string circuit_to_dot(const Circuit& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace ringcirc
