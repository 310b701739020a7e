#include <awm/channel_model.hpp>
#include <awm/errors.hpp>

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <random>

using namespace awm;
using namespace awm::channel;

namespace {

const ChannelTimingModel &preset(const char *name)
{
    return PresetLibrary::builtin().get(name);
}

ChannelTimingModel simple(double base, double bus, double clock, double cost)
{
    ChannelTimingModel m;
    m.name = "test";
    m.base_latency_ns = base;
    m.bus_width_bytes = bus;
    m.clock_hz = clock;
    m.word_cost_cycles = cost;
    return m;
}

} // namespace

TEST(Gpio, LatencyFormula)
{
    EXPECT_DOUBLE_EQ(gpio_latency(2, 100e6), 10.0);
    EXPECT_DOUBLE_EQ(gpio_latency(50, 200e6), gpio_latency(50, 100e6) / 2);
    EXPECT_THROW(gpio_latency(2, 0), ConfigError);
}

TEST(Gpio, ThroughputFormula)
{
    double t = gpio_throughput(4, 90, 4, 333e6, 11444);
    EXPECT_NEAR(t, 41.9e6, 41.9e6 * 0.01);
    EXPECT_DOUBLE_EQ(gpio_throughput(4, 90, 4, 333e6, 2 * 11444), t / 2);
}

TEST(Gpio, LpdPresetsMatchMeasurements)
{
    const std::pair<const char *, double> throughput[] = {
        {"gpio-lpd-100", 20.7e6}, {"gpio-lpd-200", 32.6e6}, {"gpio-lpd-333", 41.9e6}};
    for (auto [name, expect] : throughput) {
        const auto &m = preset(name);
        ASSERT_TRUE(m.handshake);
        const auto &h = *m.handshake;
        double rate = gpio_throughput(h.bytes, h.exchanges, h.handshakes, m.clock_hz, h.throughput_count);
        EXPECT_NEAR(rate, expect, expect * 0.01) << name;
        EXPECT_NEAR(m.bus_bandwidth(), rate, rate * 1e-12) << name;
    }
    const std::pair<const char *, double> latency[] = {
        {"gpio-lpd-100", 250.0}, {"gpio-lpd-200", 163.0}, {"gpio-lpd-333", 126.0}};
    for (auto [name, expect] : latency) {
        const auto &m = preset(name);
        EXPECT_NEAR(gpio_latency(m.handshake->latency_count, m.clock_hz), expect, 1.0) << name;
        EXPECT_DOUBLE_EQ(m.base_latency_ns, gpio_latency(m.handshake->latency_count, m.clock_hz));
    }
}

TEST(Emio, PresetsEncodeBothPoints)
{
    const auto &one = preset("emio-oneway");
    const auto &two = preset("emio-twoway");
    EXPECT_NEAR(one.base_latency_ns, 90.0, 1e-9);
    EXPECT_NEAR(two.base_latency_ns, 185.0, 1e-9);
    EXPECT_NEAR(one.bus_bandwidth(), 44.4e6, 44.4e6 * 0.01);
    EXPECT_NEAR(two.bus_bandwidth(), 21.6e6, 21.6e6 * 0.01);
}

TEST(Dma, PresetAsymptotes)
{
    EXPECT_NEAR(preset("zcu111-dma-256-mm2s").throughput(1 << 20), 10.5e9, 10.5e9 * 0.02);
    EXPECT_NEAR(preset("zcu111-dma-1024-mm2s").throughput(1 << 20), 19.2e9, 19.2e9 * 0.02);
    EXPECT_NEAR(preset("zcu102-dma-256-mm2s").throughput(1 << 20), 4.5e9, 4.5e9 * 0.02);
    EXPECT_NEAR(preset("zcu102-dma-1024-mm2s").throughput(1 << 20), 4.5e9, 4.5e9 * 0.02);
    EXPECT_NEAR(preset("zcu111-dma-1024-s2mm").throughput(1 << 20), 17.1e9, 17.1e9 * 0.02);
}

TEST(Dma, BaseLatencies)
{
    for (const auto &m : PresetLibrary::builtin().models()) {
        if (m.mechanism != "dma")
            continue;
        if (m.direction == "mm2s")
            EXPECT_EQ(m.base_latency_ns, 1300.0) << m.name;
        else
            EXPECT_EQ(m.base_latency_ns, 136.0) << m.name;
    }
}

TEST(Dma, MinimumThroughputStall)
{
    const auto &m = preset("zcu111-dma-256-mm2s");
    EXPECT_NEAR(m.stalled_time(32), 32 / 17.6e6 * 1e9, 1e-6);
    EXPECT_NEAR(m.stalled_time(32), 1818.18, 0.01);
}

TEST(TransferTime, SingleBeatIsBasePlusOneWord)
{
    auto m = simple(100, 32, 250e6, 2);
    EXPECT_DOUBLE_EQ(m.transfer_time(32), 100 + 8.0);
    EXPECT_DOUBLE_EQ(m.transfer_time(33), 100 + 16.0);
    EXPECT_DOUBLE_EQ(m.transfer_time(1), 100 + 8.0);
    EXPECT_THROW(m.transfer_time(0), RangeError);
}

TEST(TransferTime, ThroughputMonotoneAndBounded)
{
    auto payloads = power_of_two_payloads(1, 1 << 30);
    for (const auto &m : PresetLibrary::builtin().models()) {
        double prev = 0;
        for (double p : payloads) {
            double t = m.throughput(p);
            ASSERT_GE(t, prev * (1 - 1e-12)) << m.name << " at " << p;
            prev = t;
        }
        if (m.anchors.empty())
            EXPECT_NEAR(prev, m.bus_bandwidth(), m.bus_bandwidth() * 0.01) << m.name;
        else
            EXPECT_LE(prev, m.rate_cap * (1 + 1e-12)) << m.name;
    }
}

TEST(TransferTime, LatencyDominatedForOneWord)
{
    for (const auto &m : PresetLibrary::builtin().models()) {
        if (!m.anchors.empty())
            continue;
        double one_word = m.word_cost_cycles / m.clock_hz * 1e9;
        double t = m.transfer_time(m.bus_width_bytes);
        EXPECT_GE(t, m.base_latency_ns) << m.name;
        EXPECT_LE(t, m.base_latency_ns + one_word * (1 + 1e-12)) << m.name;
    }
}

TEST(Rmsg, Anchors)
{
    EXPECT_DOUBLE_EQ(rmsg_model("apu-rpu", 8).time_ns, 2200.0);
    EXPECT_DOUBLE_EQ(rmsg_model("rpu-apu", 4096).time_ns, 160000.0);
    EXPECT_DOUBLE_EQ(rmsg_model("rpu-apu", 8).time_ns, 29000.0);
    EXPECT_EQ(preset("rmsg-apu-rpu").rate_cap, 32e6);
    EXPECT_FALSE(rmsg_model("apu-rpu", 100).extrapolated);
    EXPECT_TRUE(rmsg_model("apu-rpu", 4).extrapolated);
    EXPECT_TRUE(rmsg_model("apu-rpu", 8192).extrapolated);
    EXPECT_THROW(rmsg_model("sideways", 8), LookupError);
}

TEST(Rmsg, RateCapBinds)
{
    // 4096 B at 32 MB/s needs 128 us, above the 126 us anchor.
    EXPECT_NEAR(rmsg_model("apu-rpu", 4096).time_ns, 128000.0, 1e-6);
    for (double p = 8; p <= 4096; p *= 2)
        EXPECT_LE(p / rmsg_model("apu-rpu", p).time_ns * 1e9, 32e6 * (1 + 1e-12));
}

TEST(Rmsg, ApuToRpuIsFaster)
{
    for (double p = 8; p <= 4096; p += 8)
        ASSERT_LT(rmsg_model("apu-rpu", p).time_ns, rmsg_model("rpu-apu", p).time_ns) << p;
}

TEST(Stats, Summaries)
{
    std::vector<double> odd{5, 1, 3};
    auto s = summarize(odd);
    EXPECT_EQ(s.median, 3);
    EXPECT_EQ(s.min, 1);
    EXPECT_EQ(s.max, 5);
    EXPECT_EQ(s.count, 3u);
    std::vector<double> even{4, 1, 3, 2};
    EXPECT_EQ(summarize(even).median, 2.5);
    EXPECT_THROW(summarize(std::vector<double>{}), RangeError);
}

TEST(Stats, MedianBetweenMinAndMax)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> v(1 + rng() % 50);
        for (auto &x : v)
            x = u(rng);
        auto s = summarize(v);
        ASSERT_LE(s.min, s.median);
        ASSERT_LE(s.median, s.max);
    }
}

TEST(Stats, Histogram)
{
    std::vector<double> same(7, 2.5);
    auto h = histogram(same, 10);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0].count, 7u);

    std::vector<double> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 10};
    auto b = histogram(v, 5);
    ASSERT_EQ(b.size(), 5u);
    std::size_t total = 0;
    for (const auto &bin : b)
        total += bin.count;
    EXPECT_EQ(total, v.size());
    EXPECT_EQ(b.front().left, 0);
    EXPECT_EQ(b.back().right, 10);
    EXPECT_EQ(b[0].count, 2u);
    EXPECT_EQ(b[4].count, 2u);
    EXPECT_TRUE(histogram(std::vector<double>{}, 4).empty());
}

TEST(Trials, NoStallIsFlat)
{
    auto m = simple(100, 4, 100e6, 1);
    auto run = run_trials(m, 64, 200, 3);
    EXPECT_EQ(run.time.min, run.time.median);
    EXPECT_EQ(run.time.max, run.time.median);
    EXPECT_EQ(run.stalled, 0u);
}

TEST(Trials, StallCount)
{
    auto m = simple(100, 4, 100e6, 1);
    m.stall = {10, 0.5};
    auto run = run_trials(m, 64, 100, 3);
    EXPECT_EQ(run.stalled, 10u);
    std::size_t slow = 0;
    for (double t : run.time_ns)
        slow += t > run.time.median;
    EXPECT_EQ(slow, 10u);
    EXPECT_DOUBLE_EQ(run.time.max, 2 * run.time.median);
}

TEST(Trials, JitterStaysInEnvelope)
{
    const auto &m = preset("zcu111-cdma-256");
    auto run = run_trials(m, 4096, 1000, 42);
    double nominal = m.transfer_time(4096);
    for (double t : run.time_ns) {
        ASSERT_GE(t, nominal);
        ASSERT_LE(t, m.stalled_time(4096) * (1 + m.jitter.fraction));
    }
    EXPECT_LT(run.throughput.min, run.throughput.median);
}

TEST(Trials, DeterministicReplay)
{
    const auto &m = preset("zcu111-cdma-256");
    auto a = run_trials(m, 1024, 500, 9);
    auto b = run_trials(m, 1024, 500, 9);
    auto c = run_trials(m, 1024, 500, 10);
    EXPECT_EQ(a.time_ns, b.time_ns);
    EXPECT_NE(a.time_ns, c.time_ns);

    auto payloads = power_of_two_payloads(4, 1 << 16);
    auto s1 = sweep(m, payloads, 100, 5);
    auto s2 = sweep(m, payloads, 100, 5);
    ASSERT_EQ(s1.size(), payloads.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        EXPECT_EQ(s1[i].payload_bytes, payloads[i]);
        EXPECT_EQ(s1[i].time_ns, s2[i].time_ns);
        EXPECT_EQ(s1[i].time_ns, run_trials(m, payloads[i], 100, 5).time_ns);
    }
}

TEST(Presets, UnknownNameListsAvailable)
{
    try {
        preset("zcu999-dma");
        FAIL() << "expected LookupError";
    }
    catch (const LookupError &e) {
        EXPECT_NE(std::string(e.what()).find("zcu111-dma-256-mm2s"), std::string::npos);
    }
    EXPECT_TRUE(PresetLibrary::builtin().contains("rmsg-apu-rpu"));
    EXPECT_FALSE(PresetLibrary::builtin().contains("nope"));
}

TEST(Presets, EveryPresetIsValidAndSourced)
{
    const auto &lib = PresetLibrary::builtin();
    EXPECT_GE(lib.models().size(), 20u);
    for (const auto &m : lib.models()) {
        EXPECT_NO_THROW(m.validate()) << m.name;
        EXPECT_FALSE(m.source.empty()) << m.name;
        auto doc = nlohmann::json::parse(to_json(m));
        EXPECT_EQ(doc["name"], m.name);
    }
}

TEST(Presets, ParseRejectsBadDocuments)
{
    EXPECT_THROW(PresetLibrary::parse("{"), ConfigError);
    EXPECT_THROW(PresetLibrary::parse(R"({"format":"other","version":1,"presets":[]})"), ConfigError);
    EXPECT_THROW(PresetLibrary::parse(R"({"format":"awm-channel-presets","version":1,"presets":[
        {"name":"x","mechanism":"dma","clock_hz":1e8,"bus_width_bytes":4,"word_cost_cycles":1,"colour":"red"}]})"),
                 ConfigError);
    EXPECT_THROW(PresetLibrary::parse(R"({"format":"awm-channel-presets","version":1,"presets":[
        {"name":"x","mechanism":"dma","clock_hz":1e8,"bus_width_bytes":4,"word_cost_cycles":1,
         "stall":{"period":3,"magnitude":1.0}}]})"),
                 ConfigError);
    auto lib = PresetLibrary::parse(R"({"format":"awm-channel-presets","version":1,"presets":[
        {"name":"x","mechanism":"dma","clock_hz":1e8,"bus_width_bytes":4,"base_latency_ns":10,
         "fit_throughput":{"payload_bytes":4096,"bytes_per_s":2e8}}]})");
    EXPECT_NEAR(lib.get("x").throughput(4096), 2e8, 1e-3);
}

TEST(Fitting, WordCostAndStall)
{
    auto m = simple(1300, 32, 333e6, 1);
    m.word_cost_cycles = fit_word_cost(m, 1 << 20, 10.5e9);
    EXPECT_NEAR(m.throughput(1 << 20), 10.5e9, 1.0);
    m.stall.magnitude = fit_stall_magnitude(m, 32, 17.6e6);
    EXPECT_NEAR(32 / m.stalled_time(32) * 1e9, 17.6e6, 1e-3);
}
