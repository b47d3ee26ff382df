#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace edgebench {

class ParamValue;

// Key-value tree used for workload parameters. Keys are kept sorted so
// serialization and equality are deterministic.
class ParamMap {
public:
    using Entry = std::pair<std::string, ParamValue>;

    ParamMap() = default;

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    const ParamValue* find(const std::string& key) const;
    bool contains(const std::string& key) const { return find(key) != nullptr; }

    // Inserts or overwrites.
    void set(const std::string& key, ParamValue value);
    void erase(const std::string& key);

    const std::vector<Entry>& entries() const { return entries_; }

    bool operator==(const ParamMap&) const;

private:
    std::vector<Entry> entries_; // sorted by key
};

class ParamValue {
public:
    using Storage = std::variant<bool, std::int64_t, double, std::string, ParamMap>;

    ParamValue() : v_(std::string{}) {}
    ParamValue(bool b) : v_(b) {}
    ParamValue(std::int64_t i) : v_(i) {}
    ParamValue(int i) : v_(static_cast<std::int64_t>(i)) {}
    ParamValue(double d) : v_(d) {}
    ParamValue(std::string s) : v_(std::move(s)) {}
    ParamValue(const char* s) : v_(std::string(s)) {}
    ParamValue(ParamMap m) : v_(std::move(m)) {}

    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
    bool is_double() const { return std::holds_alternative<double>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_map() const { return std::holds_alternative<ParamMap>(v_); }
    bool is_scalar() const { return !is_map(); }

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_double() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const ParamMap& as_map() const { return std::get<ParamMap>(v_); }
    ParamMap& as_map() { return std::get<ParamMap>(v_); }

    const Storage& storage() const { return v_; }

    // Scalar rendered as config text: true/false, decimal int, shortest
    // round-trip double (always containing '.' or exponent), or the raw string.
    std::string scalar_text() const;

    bool operator==(const ParamValue&) const;

private:
    Storage v_;
};

// Deterministic shortest representation that from_chars parses back exactly.
std::string format_double(double v);

// Types an untagged scalar the way the config format does: exact integer,
// then bool literal, then finite float, else string.
ParamValue type_scalar(const std::string& text);

// Flattens nested maps to their leaf entries, e.g. the env view of a
// parameter tree. Leaf keys shadow by depth-first order; callers keep
// schemas collision-free.
std::vector<std::pair<std::string, std::string>> flatten_leaves(const ParamMap& params);

} // namespace edgebench
