#include <awm/channel_model.hpp>
#include <awm/errors.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace awm::channel {

void ChannelTimingModel::validate() const
{
    auto where = "preset '" + name + "'";
    if (anchors.empty()) {
        if (!(clock_hz > 0) || !(bus_width_bytes > 0) || !(word_cost_cycles > 0))
            throw ConfigError(where + ": clock, bus width and word cost must be positive");
    }
    else {
        if (anchors.size() < 2)
            throw ConfigError(where + ": an anchored model needs at least two anchors");
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            if (!(anchors[i].payload_bytes > 0) || !(anchors[i].time_ns > 0))
                throw ConfigError(where + ": anchors must be positive");
            if (i > 0 && anchors[i].payload_bytes <= anchors[i - 1].payload_bytes)
                throw ConfigError(where + ": anchor payloads must be strictly increasing");
        }
    }
    if (base_latency_ns < 0)
        throw ConfigError(where + ": base latency must be non-negative");
    if (!(stall.magnitude >= 0 && stall.magnitude < 1))
        throw ConfigError(where + ": stall magnitude must lie in [0, 1)");
    if (!(jitter.fraction >= 0))
        throw ConfigError(where + ": jitter fraction must be non-negative");
    if (rate_cap < 0)
        throw ConfigError(where + ": rate cap must be non-negative");
}

double ChannelTimingModel::transfer_time(double payload) const
{
    if (!(payload >= 1))
        throw RangeError("payload", "must be at least one byte");
    if (anchors.empty()) {
        double words = std::ceil(payload / bus_width_bytes);
        return base_latency_ns + words * word_cost_cycles / clock_hz * 1e9;
    }
    // Segment containing payload, or the nearest end segment when outside.
    std::size_t i = 1;
    while (i + 1 < anchors.size() && payload > anchors[i].payload_bytes)
        ++i;
    const auto &a = anchors[i - 1];
    const auto &b = anchors[i];
    double t = a.time_ns + (payload - a.payload_bytes) * (b.time_ns - a.time_ns) / (b.payload_bytes - a.payload_bytes);
    if (rate_cap > 0)
        t = std::max(t, payload / rate_cap * 1e9);
    return std::max(t, 0.0);
}

double ChannelTimingModel::stalled_time(double payload) const
{
    return transfer_time(payload) / (1.0 - stall.magnitude);
}

double ChannelTimingModel::throughput(double payload) const
{
    return payload / transfer_time(payload) * 1e9;
}

double ChannelTimingModel::bus_bandwidth() const
{
    return bus_width_bytes * clock_hz / word_cost_cycles;
}

bool ChannelTimingModel::extrapolated(double payload) const
{
    return !anchors.empty() && (payload < anchors.front().payload_bytes || payload > anchors.back().payload_bytes);
}

double gpio_latency(double count, double clock_hz)
{
    if (!(clock_hz > 0))
        throw ConfigError("gpio latency: clock frequency must be positive");
    if (!(count > 0))
        throw RangeError("count", "must be positive");
    return count / (2.0 * clock_hz) * 1e9;
}

double gpio_throughput(double bytes, double exchanges, double handshakes, double clock_hz, double count)
{
    if (!(bytes > 0 && exchanges > 0 && handshakes > 0 && clock_hz > 0 && count > 0))
        throw ConfigError("gpio throughput: all terms must be positive");
    return bytes * exchanges * handshakes * clock_hz / count;
}

TrialStats summarize(std::span<const double> values)
{
    if (values.empty())
        throw RangeError("trials", "no samples to summarize");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    TrialStats s;
    s.count = v.size();
    s.min = v.front();
    s.max = v.back();
    auto mid = v.size() / 2;
    s.median = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
    return s;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins)
{
    if (values.empty())
        return {};
    if (bins == 0)
        throw RangeError("bins", "must be at least one");
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo == *hi)
        return {{*lo, *hi, values.size()}};
    double width = (*hi - *lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        out[i].left = *lo + width * static_cast<double>(i);
        out[i].right = i + 1 == bins ? *hi : *lo + width * static_cast<double>(i + 1);
    }
    for (double v : values) {
        auto i = static_cast<std::size_t>((v - *lo) / width);
        ++out[std::min(i, bins - 1)].count;
    }
    return out;
}

TrialRun run_trials(const ChannelTimingModel &model, double payload, std::size_t n, std::uint64_t seed)
{
    if (n == 0)
        throw RangeError("trials", "must be at least one");
    TrialRun run;
    run.payload_bytes = payload;
    run.extrapolated = model.extrapolated(payload);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(std::llround(payload))};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> stretch(0.0, 1.0);
    double nominal = model.transfer_time(payload);
    run.time_ns.reserve(n);
    std::vector<double> rate;
    rate.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = nominal;
        if (model.stall.period > 0 && (i + 1) % model.stall.period == 0) {
            t /= 1.0 - model.stall.magnitude;
            ++run.stalled;
        }
        if (model.jitter.fraction > 0)
            t *= 1.0 + model.jitter.fraction * stretch(rng);
        run.time_ns.push_back(t);
        rate.push_back(payload / t * 1e9);
    }
    run.time = summarize(run.time_ns);
    run.throughput = summarize(rate);
    return run;
}

std::vector<TrialRun> sweep(const ChannelTimingModel &model, std::span<const double> payloads, std::size_t n,
                            std::uint64_t seed)
{
    std::vector<std::future<TrialRun>> jobs;
    jobs.reserve(payloads.size());
    for (double p : payloads)
        jobs.push_back(std::async(std::launch::async, [&model, p, n, seed] { return run_trials(model, p, n, seed); }));
    std::vector<TrialRun> out;
    out.reserve(jobs.size());
    for (auto &j : jobs)
        out.push_back(j.get());
    return out;
}

std::vector<double> power_of_two_payloads(double first, double last)
{
    if (!(first >= 1) || last < first)
        throw RangeError("payloads", "need 1 <= first <= last");
    std::vector<double> out;
    for (double p = first; p <= last; p *= 2)
        out.push_back(p);
    return out;
}

} // namespace awm::channel
