#include "edgebench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "edgebench/errors.hpp"
#include "edgebench/params.hpp"

namespace edgebench {

AggregateKind default_aggregation(Metric metric) {
    switch (metric) {
    case Metric::disk_io_kib:
    case Metric::network_io_bytes:
        return AggregateKind::total;
    default:
        return AggregateKind::mean;
    }
}

double aggregate(const TimeSeries& series, AggregateKind kind) {
    if (kind == AggregateKind::mean && series.samples.empty())
        throw EmptySeries();
    double sum = 0;
    for (const MetricSample& s : series.samples)
        sum += s.value;
    if (kind == AggregateKind::total)
        return sum;
    return sum / static_cast<double>(series.samples.size());
}

double energy_per_batch(double mean_power_watts, double throughput_batches_per_second) {
    if (throughput_batches_per_second <= 0)
        throw ZeroThroughput();
    return mean_power_watts / throughput_batches_per_second;
}

ColdStartResult detect_cold_start(const TimeSeries& memory_series, std::int64_t trigger,
                                  double min_step_mib, Duration window) {
    constexpr std::size_t w = 3;

    std::vector<MetricSample> samples;
    for (const MetricSample& s : memory_series.samples) {
        if (s.timestamp < trigger)
            continue;
        if (window.seconds > 0 && s.timestamp > trigger + window.seconds)
            continue;
        samples.push_back(s);
    }
    if (samples.size() < 2 * w)
        throw InsufficientData("cold-start detection needs at least " + std::to_string(2 * w) +
                               " samples, have " + std::to_string(samples.size()));

    if (min_step_mib <= 0) {
        double max_value = 0;
        for (const MetricSample& s : samples)
            max_value = std::max(max_value, s.value);
        min_step_mib = 0.25 * max_value;
    }

    auto window_mean = [&](std::size_t from) { // mean of samples[from, from+w)
        double sum = 0;
        for (std::size_t i = from; i < from + w; ++i)
            sum += samples[i].value;
        return sum / static_cast<double>(w);
    };

    for (std::size_t i = w; i + w <= samples.size(); ++i) {
        const double before = window_mean(i - w);
        const double after = window_mean(i);
        if (after - before >= min_step_mib) {
            ColdStartResult result;
            result.detected = true;
            result.step_time = static_cast<double>(samples[i].timestamp - trigger);
            result.pre_level = before;
            result.post_level = after;
            return result;
        }
    }
    return {};
}

// --- report ------------------------------------------------------------------

std::optional<double> AnalysisEntry::value(const std::string& quantity) const {
    for (const auto& [name, v] : values)
        if (name == quantity)
            return v.value;
    return std::nullopt;
}

void AnalysisEntry::set(const std::string& quantity, double value, std::string inputs) {
    auto it = std::lower_bound(values.begin(), values.end(), quantity,
                               [](const auto& a, const std::string& q) { return a.first < q; });
    if (it != values.end() && it->first == quantity)
        it->second = DerivedValue{value, std::move(inputs)};
    else
        values.insert(it, {quantity, DerivedValue{value, std::move(inputs)}});
}

ColocationRatios colocation_delta(const AnalysisEntry& baseline, const AnalysisEntry& colocated) {
    if (baseline.kind != colocated.kind || baseline.node != colocated.node)
        throw MissingMetric("baseline and colocated entries describe different workloads");

    auto ratio_of = [&](const char* quantity) {
        auto b = baseline.value(quantity);
        auto c = colocated.value(quantity);
        if (!b || !c)
            throw MissingMetric(std::string("both entries need '") + quantity + "'");
        if (*b == 0)
            throw MissingMetric(std::string("baseline '") + quantity + "' is zero");
        return *c / *b;
    };

    ColocationRatios ratios;
    ratios.throughput = ratio_of("app.throughput");
    ratios.cold_start = ratio_of("cold_start_seconds");
    ratios.power = ratio_of("power_watts.mean");
    ratios.cpu = ratio_of("cpu_utilization_percent.mean");
    return ratios;
}

namespace {

// Sums the aligned service series sample-by-sample (services scraped in the
// same pass share timestamps); one series per timestamp that any service
// reported.
TimeSeries sum_series(const std::vector<TimeSeries>& parts) {
    std::map<std::int64_t, double> by_ts;
    for (const TimeSeries& ts : parts)
        for (const MetricSample& s : ts.samples)
            by_ts[s.timestamp] += s.value;
    TimeSeries out;
    if (!parts.empty())
        out.key = parts.front().key;
    for (const auto& [ts, value] : by_ts)
        out.samples.push_back({ts, value});
    return out;
}

TimeSeries query_or_empty(const MetricStore& store, const MetricKey& key, std::int64_t from,
                          std::int64_t to) {
    if (!store.contains(key))
        return TimeSeries{key, {}};
    return store.query(key, from, to);
}

// Plateau mean + peak; the plateau starts after the cold-start step when
// one is detected, otherwise it is the whole window.
void add_memory_quantities(AnalysisEntry& entry, const TimeSeries& memory, std::int64_t trigger,
                           const std::string& inputs) {
    if (memory.samples.empty())
        return;
    double peak = 0;
    for (const MetricSample& s : memory.samples)
        peak = std::max(peak, s.value);
    entry.set("memory_used_mib.peak", peak, inputs);

    std::int64_t plateau_from = trigger;
    try {
        ColdStartResult step = detect_cold_start(memory, trigger);
        if (step.detected)
            plateau_from = trigger + static_cast<std::int64_t>(step.step_time);
    } catch (const InsufficientData&) {
        // short series: plateau over everything
    }
    TimeSeries plateau;
    for (const MetricSample& s : memory.samples)
        if (s.timestamp >= plateau_from)
            plateau.samples.push_back(s);
    if (plateau.samples.empty())
        plateau = memory;
    entry.set("memory_used_mib.plateau_mean", aggregate(plateau, AggregateKind::mean), inputs);
}

double app_throughput(const WorkloadOutcome& outcome, double active_seconds,
                      std::string& inputs) {
    const AppMetrics& app = outcome.app;
    switch (outcome.kind) {
    case WorkloadKind::ml_inference:
        if (app.batches_per_second) {
            inputs = "app:batches_per_second";
            return *app.batches_per_second;
        }
        break;
    case WorkloadKind::streaming_analytics:
        if (app.tuples_total && active_seconds > 0) {
            inputs = "app:tuples_total / active seconds";
            return static_cast<double>(*app.tuples_total) / active_seconds;
        }
        break;
    case WorkloadKind::iperf_network:
        if (app.packets_total && active_seconds > 0) {
            inputs = "app:packets_total / active seconds";
            return static_cast<double>(*app.packets_total) / active_seconds;
        }
        break;
    case WorkloadKind::database:
        if (!app.db_ops.empty() && active_seconds > 0) {
            double ops = 0;
            for (const DbOpRow& row : app.db_ops)
                ops += static_cast<double>(row.count);
            inputs = "app:sum(op.*.count) / active seconds";
            return ops / active_seconds;
        }
        break;
    case WorkloadKind::stressor:
        break;
    }
    return -1;
}

} // namespace

AnalysisReport build_report(const std::vector<ExperimentRecord>& records,
                            const MetricStore& store,
                            const std::optional<std::string>& baseline_record) {
    AnalysisReport report;
    const std::vector<MetricKey> keys = store.keys();

    std::set<std::string> nodes;
    for (const MetricKey& key : keys)
        nodes.insert(key.node);

    for (const ExperimentRecord& record : records) {
        const std::string window_note =
            "[" + std::to_string(record.start) + "," + std::to_string(record.end) + "]";

        // System scope, one entry per node.
        for (const std::string& node : nodes) {
            AnalysisEntry entry;
            entry.record_name = record.record_name;
            entry.repetition = record.repetition;
            entry.node = node;
            entry.workload = "-";
            for (Metric metric : all_metrics) {
                MetricKey key{node, MetricScope::system, "", metric};
                TimeSeries series = query_or_empty(store, key, record.start, record.end);
                if (series.samples.empty())
                    continue;
                const std::string inputs = "system " + metric_name(metric) + " " + window_note;
                if (metric == Metric::memory_used_mib) {
                    add_memory_quantities(entry, series, record.start, inputs);
                    continue;
                }
                const AggregateKind kind = default_aggregation(metric);
                entry.set(metric_name(metric) +
                              (kind == AggregateKind::mean ? ".mean" : ".total"),
                          aggregate(series, kind), inputs);
            }
            if (!entry.values.empty())
                report.entries.push_back(std::move(entry));
        }

        // Workload scope, one entry per (workload, node it runs on).
        for (const WorkloadOutcome& outcome : record.workloads) {
            if (!outcome.deployed)
                continue;
            const std::int64_t trigger = outcome.trigger_timestamp;
            const double active_seconds = static_cast<double>(record.end - trigger);

            std::set<std::string> workload_nodes;
            for (const MetricKey& key : keys)
                if (key.scope == MetricScope::service &&
                    std::find(outcome.service_names.begin(), outcome.service_names.end(),
                              key.service) != outcome.service_names.end())
                    workload_nodes.insert(key.node);

            for (const std::string& node : workload_nodes) {
                AnalysisEntry entry;
                entry.record_name = record.record_name;
                entry.repetition = record.repetition;
                entry.node = node;
                entry.workload = outcome.instance_id;
                entry.kind = outcome.kind;

                const std::string svc_note = "services of " + outcome.instance_id + " on " +
                                             node + " " + window_note;

                // Per-metric sum over this workload's services on the node.
                for (Metric metric : all_metrics) {
                    if (!metric_allowed_at(metric, MetricScope::service))
                        continue;
                    std::vector<TimeSeries> parts;
                    for (const std::string& service : outcome.service_names) {
                        MetricKey key{node, MetricScope::service, service, metric};
                        TimeSeries series = query_or_empty(store, key, trigger, record.end);
                        if (!series.samples.empty())
                            parts.push_back(std::move(series));
                    }
                    if (parts.empty())
                        continue;
                    TimeSeries sum = sum_series(parts);
                    if (metric == Metric::memory_used_mib) {
                        add_memory_quantities(entry, sum, trigger, svc_note);
                        try {
                            ColdStartResult step = detect_cold_start(sum, trigger);
                            if (step.detected)
                                entry.set("cold_start_seconds", step.step_time, svc_note);
                        } catch (const InsufficientData&) {
                        }
                        continue;
                    }
                    const AggregateKind kind = default_aggregation(metric);
                    entry.set(metric_name(metric) +
                                  (kind == AggregateKind::mean ? ".mean" : ".total"),
                              aggregate(sum, kind), svc_note);
                }

                // Node-level power and temperature attributed over the
                // workload's active window (they only exist at system scope).
                TimeSeries power = query_or_empty(
                    store, MetricKey{node, MetricScope::system, "", Metric::power_watts},
                    trigger, record.end);
                if (!power.samples.empty())
                    entry.set("power_watts.mean", aggregate(power, AggregateKind::mean),
                              "system power_watts on " + node + " " + window_note);
                TimeSeries temp = query_or_empty(
                    store,
                    MetricKey{node, MetricScope::system, "", Metric::cpu_temperature_celsius},
                    trigger, record.end);
                if (!temp.samples.empty())
                    entry.set("cpu_temperature_celsius.mean",
                              aggregate(temp, AggregateKind::mean),
                              "system cpu_temperature_celsius on " + node + " " + window_note);

                std::string throughput_inputs;
                const double throughput =
                    app_throughput(outcome, active_seconds, throughput_inputs);
                if (throughput >= 0)
                    entry.set("app.throughput", throughput, throughput_inputs);

                // Joules per batch over the post-cold-start window only.
                if (outcome.kind == WorkloadKind::ml_inference && throughput > 0 &&
                    !power.samples.empty()) {
                    std::int64_t from = trigger;
                    if (auto cold = entry.value("cold_start_seconds"))
                        from = trigger + static_cast<std::int64_t>(*cold);
                    TimeSeries settled = query_or_empty(
                        store, MetricKey{node, MetricScope::system, "", Metric::power_watts},
                        from, record.end);
                    if (!settled.samples.empty())
                        entry.set("energy_per_batch_joules",
                                  energy_per_batch(aggregate(settled, AggregateKind::mean),
                                                   throughput),
                                  "system power_watts mean after cold start / app.throughput");
                }

                report.entries.push_back(std::move(entry));
            }
        }
    }

    // Degradation ratios against the named baseline record.
    if (baseline_record) {
        const std::string baseline = sanitize_record_name(*baseline_record);
        for (AnalysisEntry& entry : report.entries) {
            if (entry.workload == "-" || entry.record_name == baseline)
                continue;
            const AnalysisEntry* match = nullptr;
            for (const AnalysisEntry& candidate : report.entries) {
                if (candidate.record_name != baseline || candidate.workload == "-" ||
                    candidate.kind != entry.kind || candidate.node != entry.node)
                    continue;
                if (!match || candidate.repetition == entry.repetition)
                    match = &candidate;
                if (candidate.repetition == entry.repetition)
                    break;
            }
            if (!match)
                continue;
            const std::string vs = "vs " + baseline + ".rep" + std::to_string(match->repetition);
            static constexpr std::pair<const char*, const char*> ratio_quantities[] = {
                {"app.throughput", "ratio.throughput"},
                {"cold_start_seconds", "ratio.cold_start"},
                {"power_watts.mean", "ratio.power"},
                {"cpu_utilization_percent.mean", "ratio.cpu"},
            };
            for (const auto& [source, target] : ratio_quantities) {
                auto b = match->value(source);
                auto c = entry.value(source);
                if (b && c && *b != 0)
                    entry.set(target, *c / *b, vs);
            }
        }
    }

    std::sort(report.entries.begin(), report.entries.end(),
              [](const AnalysisEntry& a, const AnalysisEntry& b) {
                  return std::tie(a.record_name, a.repetition, a.node, a.workload) <
                         std::tie(b.record_name, b.repetition, b.node, b.workload);
              });
    return report;
}

// --- CSV export ----------------------------------------------------------------

namespace {

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos)
        return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::string timestamp_field(std::int64_t ts, TimestampMode mode) {
    return mode == TimestampMode::seconds ? std::to_string(ts) : format_iso8601_utc(ts);
}

} // namespace

void export_csv(const std::vector<ExperimentRecord>& records, const AnalysisReport& report,
                const MetricStore& store, const std::filesystem::path& out_dir,
                TimestampMode mode) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

    const std::vector<MetricKey> keys = store.keys();

    for (const ExperimentRecord& record : records) {
        const std::string stem = record.record_name + ".rep" + std::to_string(record.repetition);

        auto metrics = open_out(out_dir / (stem + ".metrics.csv"));
        metrics << "timestamp,offset_s,node,scope,service,metric,value\n";
        for (const MetricKey& key : keys) {
            const TimeSeries series = store.query(key, record.start, record.end);
            for (const MetricSample& s : series.samples) {
                metrics << timestamp_field(s.timestamp, mode) << ','
                        << (s.timestamp - record.start) << ',' << csv_field(key.node) << ','
                        << (key.scope == MetricScope::system ? "system" : "service") << ','
                        << csv_field(key.service) << ',' << metric_name(key.metric) << ','
                        << format_double(s.value) << '\n';
            }
        }
        if (!metrics)
            throw IoError("failed writing '" + stem + ".metrics.csv'");

        auto app = open_out(out_dir / (stem + ".app.csv"));
        app << "record,repetition,workload,key,value\n";
        for (const WorkloadOutcome& outcome : record.workloads) {
            // format_app_metrics emits deterministic `key=value` lines;
            // re-split them into rows.
            const std::string text = format_app_metrics(outcome.app);
            std::size_t pos = 0;
            while (pos < text.size()) {
                std::size_t end = text.find('\n', pos);
                const std::string line = text.substr(pos, end - pos);
                pos = end + 1;
                const std::size_t eq = line.find('=');
                if (eq == std::string::npos)
                    continue;
                app << csv_field(record.record_name) << ',' << record.repetition << ','
                    << csv_field(outcome.instance_id) << ',' << csv_field(line.substr(0, eq))
                    << ',' << line.substr(eq + 1) << '\n';
            }
        }
        if (!app)
            throw IoError("failed writing '" + stem + ".app.csv'");
    }

    auto analysis = open_out(out_dir / "analysis.csv");
    analysis << "record,repetition,node,workload,quantity,value,inputs\n";
    for (const AnalysisEntry& entry : report.entries) {
        for (const auto& [quantity, derived] : entry.values) {
            analysis << csv_field(entry.record_name) << ',' << entry.repetition << ','
                     << csv_field(entry.node) << ',' << csv_field(entry.workload) << ','
                     << csv_field(quantity) << ',' << format_double(derived.value) << ','
                     << csv_field(derived.inputs) << '\n';
        }
    }
    if (!analysis)
        throw IoError("failed writing 'analysis.csv'");
}

} // namespace edgebench
