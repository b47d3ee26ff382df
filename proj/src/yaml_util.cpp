#include "yaml_util.hpp"

#include "edgebench/errors.hpp"

namespace edgebench::yamlutil {

YAML::Node load_document(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw SyntaxError(e.msg, e.mark.line + 1, e.mark.column + 1);
    } catch (const YAML::Exception& e) {
        throw SyntaxError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
}

void require_map(const YAML::Node& n, const std::string& path) {
    if (!n.IsDefined() || !n.IsMap())
        throw SchemaError("expected a mapping", path);
}

void require_sequence(const YAML::Node& n, const std::string& path) {
    if (!n.IsDefined() || !n.IsSequence())
        throw SchemaError("expected a sequence", path);
}

std::string require_scalar(const YAML::Node& n, const std::string& path) {
    if (!n.IsDefined() || !n.IsScalar())
        throw SchemaError("expected a scalar", path);
    return n.Scalar();
}

void reject_unknown_keys(const YAML::Node& map, const std::vector<std::string>& allowed,
                         const std::string& path) {
    for (const auto& kv : map) {
        if (!kv.first.IsScalar())
            throw SchemaError("mapping keys must be scalars", path);
        const std::string key = kv.first.Scalar();
        bool known = false;
        for (const auto& a : allowed)
            if (key == a) { known = true; break; }
        if (!known)
            throw SchemaError("unknown key '" + key + "'", path);
    }
}

std::int64_t scalar_int(const YAML::Node& n, const std::string& path) {
    ParamValue v = type_scalar(require_scalar(n, path));
    if (!v.is_int())
        throw SchemaError("expected an integer, got '" + n.Scalar() + "'", path);
    return v.as_int();
}

ParamValue node_to_param(const YAML::Node& n, const std::string& path) {
    if (n.IsMap())
        return ParamValue(map_to_params(n, path));
    if (n.IsScalar()) {
        // Tag "!" marks a quoted scalar; it stays a string regardless of shape.
        if (n.Tag() == "!")
            return ParamValue(n.Scalar());
        return type_scalar(n.Scalar());
    }
    throw SchemaError("parameter values must be scalars or mappings", path);
}

ParamMap map_to_params(const YAML::Node& n, const std::string& path) {
    require_map(n, path);
    ParamMap out;
    for (const auto& kv : n) {
        if (!kv.first.IsScalar())
            throw SchemaError("parameter keys must be scalars", path);
        const std::string key = kv.first.Scalar();
        if (out.contains(key))
            throw SchemaError("duplicate parameter key '" + key + "'", path);
        out.set(key, node_to_param(kv.second, path + "." + key));
    }
    return out;
}

void emit_param(YAML::Emitter& out, const ParamValue& v) {
    if (v.is_map()) {
        emit_param_map(out, v.as_map());
        return;
    }
    if (v.is_string())
        out << YAML::DoubleQuoted << v.as_string();
    else
        out << v.scalar_text();
}

void emit_param_map(YAML::Emitter& out, const ParamMap& m) {
    out << YAML::BeginMap;
    for (const auto& [key, value] : m.entries()) {
        out << YAML::Key << key << YAML::Value;
        emit_param(out, value);
    }
    out << YAML::EndMap;
}

} // namespace edgebench::yamlutil
