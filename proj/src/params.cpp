#include "edgebench/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace edgebench {

const ParamValue* ParamMap::find(const std::string& key) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const std::string& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key)
        return &it->second;
    return nullptr;
}

void ParamMap::set(const std::string& key, ParamValue value) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const std::string& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key)
        it->second = std::move(value);
    else
        entries_.insert(it, {key, std::move(value)});
}

void ParamMap::erase(const std::string& key) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const Entry& e, const std::string& k) { return e.first < k; });
    if (it != entries_.end() && it->first == key)
        entries_.erase(it);
}

bool ParamMap::operator==(const ParamMap& other) const {
    return entries_ == other.entries_;
}

bool ParamValue::operator==(const ParamValue& other) const {
    return v_ == other.v_;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    // Keep the value typed as a float when it reads back.
    if (s.find_first_of(".eEni") == std::string::npos)
        s += ".0";
    return s;
}

std::string ParamValue::scalar_text() const {
    if (is_bool())
        return as_bool() ? "true" : "false";
    if (is_int())
        return std::to_string(as_int());
    if (is_double())
        return format_double(as_double());
    return as_string();
}

ParamValue type_scalar(const std::string& text) {
    if (!text.empty()) {
        const char* first = text.data();
        const char* last = text.data() + text.size();

        std::int64_t i = 0;
        auto ri = std::from_chars(first, last, i);
        if (ri.ec == std::errc() && ri.ptr == last)
            return ParamValue(i);

        if (text == "true")
            return ParamValue(true);
        if (text == "false")
            return ParamValue(false);

        double d = 0.0;
        auto rd = std::from_chars(first, last, d);
        if (rd.ec == std::errc() && rd.ptr == last && std::isfinite(d))
            return ParamValue(d);
    }
    return ParamValue(text);
}

namespace {

void flatten_into(const ParamMap& m, std::vector<std::pair<std::string, std::string>>& out) {
    for (const auto& [key, value] : m.entries()) {
        if (value.is_map())
            flatten_into(value.as_map(), out);
        else
            out.emplace_back(key, value.scalar_text());
    }
}

} // namespace

std::vector<std::pair<std::string, std::string>> flatten_leaves(const ParamMap& params) {
    std::vector<std::pair<std::string, std::string>> out;
    flatten_into(params, out);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace edgebench
