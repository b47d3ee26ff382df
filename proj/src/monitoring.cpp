#include "edgebench/monitoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "edgebench/clock.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/params.hpp"

namespace edgebench {

std::string metric_name(Metric metric) {
    switch (metric) {
    case Metric::cpu_utilization_percent: return "cpu_utilization_percent";
    case Metric::memory_used_mib: return "memory_used_mib";
    case Metric::disk_io_kib: return "disk_io_kib";
    case Metric::network_io_bytes: return "network_io_bytes";
    case Metric::power_watts: return "power_watts";
    case Metric::cpu_temperature_celsius: return "cpu_temperature_celsius";
    }
    return "?";
}

std::optional<Metric> metric_from_name(const std::string& name) {
    for (Metric m : all_metrics)
        if (metric_name(m) == name)
            return m;
    return std::nullopt;
}

bool metric_allowed_at(Metric metric, MetricScope scope) {
    if (scope == MetricScope::system)
        return true;
    return metric != Metric::power_watts && metric != Metric::cpu_temperature_celsius;
}

// --- wire format -------------------------------------------------------------

namespace {

bool parse_value(const std::string& text, double& out) {
    auto r = std::from_chars(text.data(), text.data() + text.size(), out);
    return r.ec == std::errc() && r.ptr == text.data() + text.size() && std::isfinite(out);
}

// `metric_name{scope="system"} 12.5` or
// `metric_name{scope="service",service="x"} 12.5`
bool parse_sample_line(const std::string& node, const std::string& line, MetricKey& key,
                       double& value) {
    std::size_t brace = line.find('{');
    std::size_t close = line.find('}', brace == std::string::npos ? 0 : brace);
    if (brace == std::string::npos || close == std::string::npos)
        return false;

    auto m = metric_from_name(line.substr(0, brace));
    if (!m)
        return false;

    key = MetricKey{node, MetricScope::system, "", *m};
    std::string labels = line.substr(brace + 1, close - brace - 1);
    std::size_t pos = 0;
    while (pos < labels.size()) {
        std::size_t eq = labels.find("=\"", pos);
        if (eq == std::string::npos)
            return false;
        std::size_t end = labels.find('"', eq + 2);
        if (end == std::string::npos)
            return false;
        const std::string name = labels.substr(pos, eq - pos);
        const std::string val = labels.substr(eq + 2, end - eq - 2);
        if (name == "scope") {
            if (val == "system")
                key.scope = MetricScope::system;
            else if (val == "service")
                key.scope = MetricScope::service;
            else
                return false;
        } else if (name == "service") {
            key.service = val;
        } else {
            return false;
        }
        pos = end + 1;
        if (pos < labels.size()) {
            if (labels[pos] != ',')
                return false;
            ++pos;
        }
    }
    if (key.scope == MetricScope::service && key.service.empty())
        return false;
    if (key.scope == MetricScope::system && !key.service.empty())
        return false;

    std::size_t space = line.find(' ', close);
    if (space == std::string::npos)
        return false;
    return parse_value(line.substr(space + 1), value);
}

bool sample_in_bounds(const MetricKey& key, double value) {
    if (value < 0)
        return false;
    if (key.metric == Metric::cpu_utilization_percent && key.scope == MetricScope::system &&
        value > 100.0)
        return false;
    return true;
}

} // namespace

ScrapeResult parse_scrape_text(const std::string& node, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ScrapeResult result;
    bool have_ts = false;

    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (line.empty())
            continue;

        if (!have_ts) {
            // The response must lead with its timestamp header.
            if (line.rfind("# ts ", 0) != 0)
                throw ScrapeError("scrape response from '" + node +
                                  "' has no '# ts' header line");
            const std::string ts = line.substr(5);
            auto r = std::from_chars(ts.data(), ts.data() + ts.size(), result.timestamp);
            if (r.ec != std::errc() || r.ptr != ts.data() + ts.size())
                throw ScrapeError("unreadable scrape timestamp '" + ts + "' from '" + node + "'");
            have_ts = true;
            continue;
        }
        if (line[0] == '#')
            continue;

        MetricKey key;
        double value = 0;
        if (!parse_sample_line(node, line, key, value) ||
            !metric_allowed_at(key.metric, key.scope) || !sample_in_bounds(key, value)) {
            ++result.warnings;
            continue;
        }
        result.samples.emplace_back(std::move(key), value);
    }

    if (!have_ts)
        throw ScrapeError("empty scrape response from '" + node + "'");
    return result;
}

// --- store -------------------------------------------------------------------

MetricStore::MetricStore(MetricStore&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    series_ = std::move(other.series_);
    gaps_ = std::move(other.gaps_);
}

MetricStore& MetricStore::operator=(MetricStore&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        series_ = std::move(other.series_);
        gaps_ = std::move(other.gaps_);
    }
    return *this;
}

void MetricStore::append(const MetricKey& key, MetricSample sample) {
    if (!metric_allowed_at(key.metric, key.scope))
        throw Error("metric '" + metric_name(key.metric) + "' has no service scope");
    if ((key.scope == MetricScope::service) == key.service.empty())
        throw Error("metric key scope and service name disagree");
    if (!std::isfinite(sample.value) || sample.value < 0)
        throw Error("sample value out of range for '" + metric_name(key.metric) + "'");

    std::lock_guard lock(mutex_);
    auto& samples = series_[key];
    if (!samples.empty() && sample.timestamp <= samples.back().timestamp)
        throw Error("non-increasing timestamp " + std::to_string(sample.timestamp) +
                    " for '" + metric_name(key.metric) + "' on '" + key.node + "'");
    samples.push_back(sample);
}

void MetricStore::record_gap(const std::string& node, std::int64_t timestamp) {
    std::lock_guard lock(mutex_);
    gaps_.push_back({node, timestamp});
}

std::vector<MetricKey> MetricStore::keys() const {
    std::lock_guard lock(mutex_);
    std::vector<MetricKey> out;
    out.reserve(series_.size());
    for (const auto& [key, _] : series_)
        out.push_back(key);
    return out;
}

bool MetricStore::contains(const MetricKey& key) const {
    std::lock_guard lock(mutex_);
    return series_.count(key) != 0;
}

TimeSeries MetricStore::series(const MetricKey& key) const {
    std::lock_guard lock(mutex_);
    auto it = series_.find(key);
    if (it == series_.end())
        throw UnknownKey("no series for '" + metric_name(key.metric) + "' on '" + key.node + "'");
    return TimeSeries{key, it->second};
}

TimeSeries MetricStore::query(const MetricKey& key, std::int64_t from, std::int64_t to) const {
    std::lock_guard lock(mutex_);
    auto it = series_.find(key);
    if (it == series_.end())
        throw UnknownKey("no series for '" + metric_name(key.metric) + "' on '" + key.node + "'");
    TimeSeries out{key, {}};
    for (const auto& s : it->second)
        if (s.timestamp >= from && s.timestamp <= to)
            out.samples.push_back(s);
    return out;
}

std::vector<GapRecord> MetricStore::gaps() const {
    std::lock_guard lock(mutex_);
    return gaps_;
}

std::size_t MetricStore::sample_count() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, samples] : series_)
        n += samples.size();
    return n;
}

// Log: one record per line, tab-separated.
//   s<TAB>node<TAB>system|service<TAB>service-or-"-"<TAB>metric<TAB>ts<TAB>value
//   g<TAB>node<TAB>ts
// Index: per-key "k" lines with sample counts, then one "total" line; load
// cross-checks both so a truncated log is caught.
void MetricStore::save(std::ostream& log, std::ostream& index) const {
    std::lock_guard lock(mutex_);
    for (const auto& [key, samples] : series_) {
        for (const auto& s : samples) {
            log << "s\t" << key.node << '\t'
                << (key.scope == MetricScope::system ? "system" : "service") << '\t'
                << (key.service.empty() ? "-" : key.service) << '\t' << metric_name(key.metric)
                << '\t' << s.timestamp << '\t' << format_double(s.value) << '\n';
        }
    }
    for (const auto& g : gaps_)
        log << "g\t" << g.node << '\t' << g.timestamp << '\n';

    std::size_t total = 0;
    for (const auto& [key, samples] : series_) {
        index << "k\t" << key.node << '\t'
              << (key.scope == MetricScope::system ? "system" : "service") << '\t'
              << (key.service.empty() ? "-" : key.service) << '\t' << metric_name(key.metric)
              << '\t' << samples.size() << '\n';
        total += samples.size();
    }
    index << "total\t" << total << '\t' << gaps_.size() << '\n';
    if (!log || !index)
        throw IoError("failed writing metric store");
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find('\t', pos);
        if (next == std::string::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return fields;
}

MetricKey key_from_fields(const std::string& node, const std::string& scope,
                          const std::string& service, const std::string& metric) {
    auto m = metric_from_name(metric);
    if (!m)
        throw FormatError("unknown metric '" + metric + "' in store log");
    if (scope != "system" && scope != "service")
        throw FormatError("unknown scope '" + scope + "' in store log");
    return MetricKey{node, scope == "system" ? MetricScope::system : MetricScope::service,
                     service == "-" ? "" : service, *m};
}

std::int64_t to_int(const std::string& s, const char* what) {
    std::int64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw FormatError(std::string("bad ") + what + " '" + s + "' in store file");
    return v;
}

} // namespace

MetricStore MetricStore::load(std::istream& log, std::istream& index) {
    MetricStore store;
    std::string line;
    while (std::getline(log, line)) {
        if (line.empty())
            continue;
        auto f = split_tabs(line);
        if (f[0] == "s") {
            if (f.size() != 7)
                throw FormatError("malformed sample record '" + line + "'");
            double value = 0;
            auto r = std::from_chars(f[6].data(), f[6].data() + f[6].size(), value);
            if (r.ec != std::errc() || r.ptr != f[6].data() + f[6].size())
                throw FormatError("bad sample value '" + f[6] + "'");
            store.append(key_from_fields(f[1], f[2], f[3], f[4]),
                         MetricSample{to_int(f[5], "timestamp"), value});
        } else if (f[0] == "g") {
            if (f.size() != 3)
                throw FormatError("malformed gap record '" + line + "'");
            store.record_gap(f[1], to_int(f[2], "timestamp"));
        } else {
            throw FormatError("unknown store record '" + line + "'");
        }
    }

    bool saw_total = false;
    while (std::getline(index, line)) {
        if (line.empty())
            continue;
        auto f = split_tabs(line);
        if (f[0] == "k") {
            if (f.size() != 6)
                throw FormatError("malformed index record '" + line + "'");
            auto key = key_from_fields(f[1], f[2], f[3], f[4]);
            auto it = store.series_.find(key);
            const std::size_t have = it == store.series_.end() ? 0 : it->second.size();
            if (have != static_cast<std::size_t>(to_int(f[5], "count")))
                throw FormatError("store index count mismatch for '" + metric_name(key.metric) +
                                  "' on '" + key.node + "'");
        } else if (f[0] == "total") {
            if (f.size() != 3)
                throw FormatError("malformed index total '" + line + "'");
            if (store.sample_count() != static_cast<std::size_t>(to_int(f[1], "count")) ||
                store.gaps_.size() != static_cast<std::size_t>(to_int(f[2], "count")))
                throw FormatError("store index totals do not match the log");
            saw_total = true;
        } else {
            throw FormatError("unknown index record '" + line + "'");
        }
    }
    if (!saw_total)
        throw FormatError("store index has no total line");
    return store;
}

// --- collector ---------------------------------------------------------------

Collector::Collector(std::vector<std::pair<std::string, MetricEndpoint*>> endpoints,
                     MetricStore& store, Duration interval)
    : endpoints_(std::move(endpoints)), store_(&store), interval_(interval) {}

void Collector::collect_at(std::int64_t now) {
    for (auto& [node, endpoint] : endpoints_) {
        try {
            ScrapeResult result = parse_scrape_text(node, endpoint->scrape());
            stats_.warnings += result.warnings;
            for (const auto& [key, value] : result.samples)
                store_->append(key, MetricSample{result.timestamp, value});
            ++stats_.scrapes;
        } catch (const ScrapeError&) {
            store_->record_gap(node, now);
            ++stats_.gaps;
        }
    }
}

void run_collector_window(Collector& collector, Clock& clock, std::int64_t start,
                          std::int64_t end) {
    for (std::int64_t t = start; t <= end; t += collector.interval().seconds) {
        clock.sleep_until(t);
        collector.collect_at(t);
    }
}

} // namespace edgebench
