#pragma once

// Shared helpers for the YAML-backed config documents. Internal to src/.

#include <string>
#include <yaml-cpp/yaml.h>

#include "edgebench/params.hpp"

namespace edgebench::yamlutil {

// YAML::Load with parse failures converted to SyntaxError (1-based position).
YAML::Node load_document(const std::string& text);

// Schema guards; `path` names the node in error messages.
void require_map(const YAML::Node& n, const std::string& path);
void require_sequence(const YAML::Node& n, const std::string& path);
std::string require_scalar(const YAML::Node& n, const std::string& path);

// Rejects keys outside `allowed`; error names path.key.
void reject_unknown_keys(const YAML::Node& map, const std::vector<std::string>& allowed,
                         const std::string& path);

std::int64_t scalar_int(const YAML::Node& n, const std::string& path);

// Scalar typing: quoted scalars stay strings, plain scalars go through
// type_scalar. Nested maps recurse; sequences are not part of a parameter tree.
ParamValue node_to_param(const YAML::Node& n, const std::string& path);
ParamMap map_to_params(const YAML::Node& n, const std::string& path);

void emit_param(YAML::Emitter& out, const ParamValue& v);
void emit_param_map(YAML::Emitter& out, const ParamMap& m);

} // namespace edgebench::yamlutil
