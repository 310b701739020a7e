#pragma once

// Analytic timing models of SoC communication channels (GPIO, EMIO, Rmsg,
// DMA, CDMA) with trial simulation and median/min/max statistics.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace awm::channel {

/// Periodic multiplicative slowdown: every `period`-th trial takes
/// 1/(1 - magnitude) times as long.
struct StallModel {
    std::uint64_t period = 0; ///< 0 disables stalls
    double magnitude = 0.0;   ///< in [0, 1)
};

/// Bounded-uniform jitter: each trial is stretched by a factor drawn from
/// [1, 1 + fraction].
struct JitterModel {
    double fraction = 0.0;
};

/// Measured (payload, time) point for models defined by interpolation.
struct Anchor {
    double payload_bytes = 0.0;
    double time_ns = 0.0;
};

/// Register-handshake counts for GPIO/EMIO style channels.
struct HandshakeCounts {
    double latency_count = 0.0;    ///< N_c of the latency experiment
    double throughput_count = 0.0; ///< N_c of the throughput experiment
    double bytes = 4.0;            ///< N_B
    double exchanges = 90.0;       ///< N_I
    double handshakes = 4.0;       ///< N_H
};

struct ChannelTimingModel {
    std::string name;
    std::string mechanism;
    std::string board;
    std::string direction;
    std::string source;

    double base_latency_ns = 0.0;
    double bus_width_bytes = 4.0;
    double clock_hz = 100e6;
    double word_cost_cycles = 1.0;
    StallModel stall;
    JitterModel jitter;
    /// When non-empty, nominal time is piecewise linear through these points
    /// (extrapolated beyond them) instead of the bus-word formula.
    std::vector<Anchor> anchors;
    /// Bytes/s ceiling applied to anchored models; 0 for none.
    double rate_cap = 0.0;
    std::optional<HandshakeCounts> handshake;

    void validate() const;

    /// Median-behaviour transfer time in ns (no stall, no jitter).
    double transfer_time(double payload_bytes) const;
    /// Time of a stalled trial.
    double stalled_time(double payload_bytes) const;
    /// payload / transfer_time, in bytes/s.
    double throughput(double payload_bytes) const;
    /// bus_width * clock / word_cost: the large-payload limit of the word model.
    double bus_bandwidth() const;
    /// True if `payload` lies outside the anchored range.
    bool extrapolated(double payload_bytes) const;
};

/// N_c / (2 f_clk), in ns.
double gpio_latency(double count, double clock_hz);
/// N_B N_I N_H f_clk / N_c, in bytes/s.
double gpio_throughput(double bytes, double exchanges, double handshakes, double clock_hz, double count);

struct TrialStats {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Median of an even-sized sample is the mean of the two middle values.
TrialStats summarize(std::span<const double> values);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins spanning [min, max]; a single bin when all values agree.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins = 32);

struct TrialRun {
    double payload_bytes = 0.0;
    std::vector<double> time_ns;
    TrialStats time;
    TrialStats throughput; ///< bytes/s
    std::size_t stalled = 0;
    bool extrapolated = false;
};

/// `n` trials with jitter drawn from a generator seeded by (seed, payload).
TrialRun run_trials(const ChannelTimingModel &model, double payload_bytes, std::size_t n, std::uint64_t seed);

/// One run per payload, evaluated concurrently; results keep payload order.
std::vector<TrialRun> sweep(const ChannelTimingModel &model, std::span<const double> payloads, std::size_t n,
                            std::uint64_t seed);

/// Powers of two from `first` to `last` inclusive.
std::vector<double> power_of_two_payloads(double first, double last);

struct RmsgTime {
    double time_ns = 0.0;
    bool extrapolated = false;
};

/// Rmsg transfer time for "apu-rpu" or "rpu-apu" using the built-in presets.
RmsgTime rmsg_model(std::string_view direction, double payload_bytes);

class PresetLibrary {
public:
    /// Parse a preset document and fit derived parameters (word costs and
    /// stall magnitudes given as throughput targets).
    static PresetLibrary parse(std::string_view json);
    static const PresetLibrary &builtin();

    const ChannelTimingModel &get(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::vector<std::string> names() const;
    const std::vector<ChannelTimingModel> &models() const noexcept { return models_; }

private:
    std::vector<ChannelTimingModel> models_;
};

/// Word cost (cycles per bus word) that makes `payload` take exactly
/// payload / rate.
double fit_word_cost(const ChannelTimingModel &m, double payload_bytes, double bytes_per_s);
/// Stall magnitude that makes a stalled `payload` trial run at `bytes_per_s`.
double fit_stall_magnitude(const ChannelTimingModel &m, double payload_bytes, double bytes_per_s);

std::string to_json(const ChannelTimingModel &m);

} // namespace awm::channel
