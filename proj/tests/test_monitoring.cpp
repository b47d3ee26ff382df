#include <doctest.h>

#include <sstream>

#include "edgebench/clock.hpp"
#include "edgebench/connector.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/monitoring.hpp"
#include "fixtures.hpp"

using namespace edgebench;

namespace {

MetricKey sys_key(const std::string& node, Metric metric) {
    return MetricKey{node, MetricScope::system, "", metric};
}

MetricKey svc_key(const std::string& node, const std::string& service, Metric metric) {
    return MetricKey{node, MetricScope::service, service, metric};
}

// Endpoint scripted with canned responses, one per scrape call.
class ScriptedEndpoint : public MetricEndpoint {
public:
    std::vector<std::string> responses;
    std::size_t calls = 0;

    std::string scrape() override {
        if (calls >= responses.size())
            throw ScrapeError("script exhausted");
        const std::string& r = responses[calls++];
        if (r == "<down>")
            throw ScrapeError("unreachable");
        return r;
    }
};

} // namespace

TEST_CASE("metric names round-trip, scope law is a property of the metric") {
    for (Metric m : all_metrics)
        CHECK(metric_from_name(metric_name(m)) == m);
    CHECK(!metric_from_name("load_average").has_value());

    for (Metric m : all_metrics)
        CHECK(metric_allowed_at(m, MetricScope::system));
    CHECK(metric_allowed_at(Metric::cpu_utilization_percent, MetricScope::service));
    CHECK(metric_allowed_at(Metric::memory_used_mib, MetricScope::service));
    CHECK(metric_allowed_at(Metric::disk_io_kib, MetricScope::service));
    CHECK(metric_allowed_at(Metric::network_io_bytes, MetricScope::service));
    CHECK(!metric_allowed_at(Metric::power_watts, MetricScope::service));
    CHECK(!metric_allowed_at(Metric::cpu_temperature_celsius, MetricScope::service));
}

TEST_CASE("scrape parse: well-formed response") {
    ScrapeResult r = parse_scrape_text("rpi",
                                       "# ts 35\n"
                                       "cpu_utilization_percent{scope=\"system\"} 16.73\n"
                                       "power_watts{scope=\"system\"} 88\n");
    CHECK(r.timestamp == 35);
    CHECK(r.warnings == 0);
    REQUIRE(r.samples.size() == 2);
    CHECK(r.samples[0].first == sys_key("rpi", Metric::cpu_utilization_percent));
    CHECK(r.samples[0].second == 16.73);
    CHECK(r.samples[1].first == sys_key("rpi", Metric::power_watts));
    CHECK(r.samples[1].second == 88.0);
}

TEST_CASE("scrape parse: one malformed line among five costs one warning") {
    ScrapeResult r = parse_scrape_text("rpi",
                                       "# ts 5\n"
                                       "cpu_utilization_percent{scope=\"system\"} 10\n"
                                       "memory_used_mib{scope=\"system\"} 600\n"
                                       "what even is this line\n"
                                       "disk_io_kib{scope=\"system\"} 3\n"
                                       "network_io_bytes{scope=\"system\"} 1500\n");
    CHECK(r.samples.size() == 4);
    CHECK(r.warnings == 1);
}

TEST_CASE("scrape parse: invariant-violating lines are skipped with warnings") {
    ScrapeResult r = parse_scrape_text(
        "rpi",
        "# ts 5\n"
        "power_watts{scope=\"service\",service=\"x\"} 3\n"     // scope law
        "cpu_utilization_percent{scope=\"system\"} 140\n"      // >100 at system scope
        "memory_used_mib{scope=\"system\"} -4\n"               // negative
        "cpu_utilization_percent{scope=\"service\"} 10\n"      // missing service name
        "memory_used_mib{scope=\"system\",service=\"x\"} 10\n" // system with service
        "unknown_metric{scope=\"system\"} 1\n"                 // not a catalog metric
        "cpu_utilization_percent{scope=\"service\",service=\"w.n\"} 250\n"); // ok: multicore
    CHECK(r.warnings == 6);
    REQUIRE(r.samples.size() == 1);
    CHECK(r.samples[0].first == svc_key("rpi", "w.n", Metric::cpu_utilization_percent));
    CHECK(r.samples[0].second == 250.0);
}

TEST_CASE("scrape parse: missing or broken header is a ScrapeError") {
    CHECK_THROWS_AS(parse_scrape_text("rpi", ""), ScrapeError);
    CHECK_THROWS_AS(parse_scrape_text("rpi", "cpu_utilization_percent{scope=\"system\"} 1\n"),
                    ScrapeError);
    CHECK_THROWS_AS(parse_scrape_text("rpi", "# ts banana\n"), ScrapeError);
}

TEST_CASE("store: append enforces the scope law and monotone timestamps") {
    MetricStore store;
    store.append(sys_key("rpi", Metric::power_watts), {0, 88.0});
    store.append(sys_key("rpi", Metric::power_watts), {5, 90.0});

    CHECK_THROWS_AS(store.append(svc_key("rpi", "w.n", Metric::power_watts), {0, 3.0}),
                    Error);
    CHECK_THROWS_AS(store.append(svc_key("rpi", "w.n", Metric::cpu_temperature_celsius), {0, 40.0}),
                    Error);
    // Same timestamp: rejected. Earlier timestamp: rejected.
    CHECK_THROWS_AS(store.append(sys_key("rpi", Metric::power_watts), {5, 91.0}), Error);
    CHECK_THROWS_AS(store.append(sys_key("rpi", Metric::power_watts), {4, 91.0}), Error);
    // Negative or non-finite values: rejected.
    CHECK_THROWS_AS(store.append(sys_key("rpi", Metric::power_watts), {10, -1.0}), Error);

    // A service key must carry a service name; a system key must not.
    CHECK_THROWS_AS(store.append(MetricKey{"rpi", MetricScope::service, "", Metric::memory_used_mib},
                                 {0, 1.0}),
                    Error);
    CHECK_THROWS_AS(store.append(MetricKey{"rpi", MetricScope::system, "w.n", Metric::memory_used_mib},
                                 {0, 1.0}),
                    Error);

    CHECK(store.sample_count() == 2);
}

TEST_CASE("store: series and windowed query") {
    MetricStore store;
    MetricKey key = sys_key("rpi", Metric::memory_used_mib);
    for (std::int64_t t = 0; t <= 50; t += 5)
        store.append(key, {t, 100.0 + static_cast<double>(t)});

    TimeSeries whole = store.series(key);
    CHECK(whole.samples.size() == 11);
    CHECK(whole.samples.front().timestamp == 0);
    CHECK(whole.samples.back().timestamp == 50);

    TimeSeries mid = store.query(key, 10, 20);
    REQUIRE(mid.samples.size() == 3); // inclusive endpoints
    CHECK(mid.samples[0].timestamp == 10);
    CHECK(mid.samples[2].timestamp == 20);

    CHECK(store.query(key, 12, 13).samples.empty()); // empty window, no error
    CHECK(store.query(key, 60, 100).samples.empty());

    CHECK_THROWS_AS(store.series(sys_key("ghost", Metric::memory_used_mib)), UnknownKey);
    CHECK_THROWS_AS(store.query(sys_key("ghost", Metric::memory_used_mib), 0, 1), UnknownKey);

    CHECK(store.contains(key));
    CHECK(!store.contains(sys_key("ghost", Metric::memory_used_mib)));
    CHECK(store.keys() == std::vector<MetricKey>{key});
}

TEST_CASE("store: a window spanning a gap returns exactly the stored samples") {
    MetricStore store;
    MetricKey key = sys_key("rpi", Metric::cpu_utilization_percent);
    // Samples at 0,5,10 then an outage at 15,20, then 25.
    for (std::int64_t t : {0, 5, 10, 25})
        store.append(key, {t, 1.0});
    store.record_gap("rpi", 15);
    store.record_gap("rpi", 20);

    CHECK(store.query(key, 0, 25).samples.size() == 4);
    CHECK(store.gaps() == std::vector<GapRecord>{{"rpi", 15}, {"rpi", 20}});
}

TEST_CASE("collector: sample count law over a clean 60 s window") {
    SimClock clock(0);
    SimulatedCluster sim(parse_cluster_config(fixtures::kClusterConfig), 7, clock);
    MetricStore store;
    Collector collector(sim.endpoints(), store);
    CHECK(collector.interval().seconds == 5);

    run_collector_window(collector, clock, 0, 60);

    auto keys = store.keys();
    CHECK(keys.size() == 4 * 6); // 4 idle nodes x 6 system metrics
    for (const auto& key : keys)
        CHECK(store.series(key).samples.size() == 13); // floor(60/5)+1
    CHECK(store.gaps().empty());
    CHECK(collector.stats().scrapes == 4 * 13);
    CHECK(collector.stats().warnings == 0);
}

TEST_CASE("collector: a two-scrape outage leaves 11 samples and 2 gaps") {
    SimClock clock(0);
    SimulatedCluster sim(parse_cluster_config(fixtures::kClusterConfig), 7, clock);
    sim.script_outage("rpi", 30, 35); // covers exactly the t=30 and t=35 ticks
    MetricStore store;
    Collector collector(sim.endpoints(), store);

    run_collector_window(collector, clock, 0, 60);

    for (Metric m : all_metrics)
        CHECK(store.series(sys_key("rpi", m)).samples.size() == 11);
    CHECK(store.gaps() == std::vector<GapRecord>{{"rpi", 30}, {"rpi", 35}});
    CHECK(collector.stats().gaps == 2);

    // Other nodes keep their full, equal-length series.
    for (const auto& node : {"manager", "raspberrypi", "small_server"})
        for (Metric m : all_metrics)
            CHECK(store.series(sys_key(node, m)).samples.size() == 13);
}

TEST_CASE("collector: endpoint warnings aggregate, bad endpoints become gaps") {
    ScriptedEndpoint good;
    good.responses = {"# ts 0\ncpu_utilization_percent{scope=\"system\"} 1\nbroken\n",
                      "# ts 5\ncpu_utilization_percent{scope=\"system\"} 2\n"};
    ScriptedEndpoint flaky;
    flaky.responses = {"<down>", "# ts 5\ncpu_utilization_percent{scope=\"system\"} 3\n"};

    MetricStore store;
    Collector collector({{"a", &good}, {"b", &flaky}}, store);
    collector.collect_at(0);
    collector.collect_at(5);

    CHECK(collector.stats().scrapes == 3);
    CHECK(collector.stats().warnings == 1);
    CHECK(collector.stats().gaps == 1);
    CHECK(store.series(sys_key("a", Metric::cpu_utilization_percent)).samples.size() == 2);
    CHECK(store.series(sys_key("b", Metric::cpu_utilization_percent)).samples.size() == 1);
    CHECK(store.gaps() == std::vector<GapRecord>{{"b", 0}});
}

TEST_CASE("store: save/load round-trips samples, gaps and counts") {
    MetricStore store;
    store.append(sys_key("rpi", Metric::power_watts), {0, 88.0});
    store.append(sys_key("rpi", Metric::power_watts), {5, 90.25});
    store.append(svc_key("rpi", "stress.rpi", Metric::cpu_utilization_percent), {5, 250.5});
    store.record_gap("rpi", 10);

    std::ostringstream log, index;
    store.save(log, index);

    std::istringstream log_in(log.str()), index_in(index.str());
    MetricStore copy = MetricStore::load(log_in, index_in);

    CHECK(copy.keys() == store.keys());
    CHECK(copy.sample_count() == store.sample_count());
    CHECK(copy.gaps() == store.gaps());
    for (const auto& key : store.keys())
        CHECK(copy.series(key).samples == store.series(key).samples);
}

TEST_CASE("store: load detects truncated or inconsistent files") {
    MetricStore store;
    store.append(sys_key("rpi", Metric::power_watts), {0, 88.0});
    store.append(sys_key("rpi", Metric::power_watts), {5, 90.0});

    std::ostringstream log, index;
    store.save(log, index);

    // Drop the final log line: per-key count no longer matches the index.
    std::string text = log.str();
    text.erase(text.rfind('\n', text.size() - 2) + 1);
    {
        std::istringstream log_in(text), index_in(index.str());
        CHECK_THROWS_AS(MetricStore::load(log_in, index_in), FormatError);
    }
    // An index without its trailer is rejected outright.
    {
        std::istringstream log_in(log.str()), index_in("");
        CHECK_THROWS_AS(MetricStore::load(log_in, index_in), FormatError);
    }
}
