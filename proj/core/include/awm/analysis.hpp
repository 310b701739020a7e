#pragma once

// Closed-form bandwidth, gate-time and update-budget arithmetic for the
// streaming interface, plus the GPIO timing decomposition.

#include <awm/channel_model.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace awm::analysis {

struct StreamConfig {
    double bus_bytes = 32.0;   ///< bytes per transfer word
    double dma_hz = 333e6;     ///< transfer word clock
    unsigned channels = 8;
    unsigned params = 8;       ///< parameters per channel
    double seq_hz = 409.6e6;   ///< sequencer feed clock
    unsigned pack_capacity = 20;

    void validate() const;
};

/// bus_bytes * dma_hz, bytes/s.
double dma_bandwidth(const StreamConfig &cfg);
/// channels * params words per gate at dma_hz, ns.
double raw_gate_time(const StreamConfig &cfg);
/// S * channels + updated parameters.
double words_per_gate(double sequencing_words, unsigned channels, unsigned updated_params);
/// words / f, ns.
double gate_time(double words, double hz);
/// channels / pack_capacity + updated_params + 1: packed sequencing words,
/// the update words and one non-amortised readout word.
double packed_words_per_gate(const StreamConfig &cfg, unsigned updated_params);
/// channels / pack_capacity.
double steady_state_words(const StreamConfig &cfg);
/// Raw words per gate over steady-state packed words per gate.
double compression_factor(const StreamConfig &cfg);
/// dma_bandwidth / compression_factor, bytes/s.
double steady_state_bandwidth(const StreamConfig &cfg);
/// Parameters writable between gates: floor(f * T) - params.
std::int64_t update_budget(const StreamConfig &cfg, double gate_time_ns);
/// Gates of length T whose whole transfer slot covers a full PLUT reload:
/// ceil(plut_total / (f * T)).
std::int64_t full_plut_update_gates(const StreamConfig &cfg, double plut_total = 32768, double gate_time_ns = 1000);
/// Same, but only the per-gate update budget is available for reloading.
std::int64_t full_plut_update_gates_interleaved(const StreamConfig &cfg, double plut_total = 32768,
                                                double gate_time_ns = 1000);
/// params / seq_hz, ns.
double sequencer_floor(const StreamConfig &cfg);

struct GpioDecomposition {
    double rpu_ns = 0.0;
    double pl_ns = 0.0; ///< PL/interconnect time at the fastest clock
    double residual_ns = 0.0;
};

/// Solve t_rpu + s0 t_pl = t_fast and t_rpu + s1 t_pl = t_mid exactly and
/// report t_slow - (t_rpu + s2 t_pl). Throws when s0 == s1.
GpioDecomposition gpio_decompose(double t_fast, double t_mid, double t_slow,
                                 std::array<double, 3> scales = {1.0, 1.665, 3.33});

/// base + payload / rate, ns.
double single_param_update_time(double payload_bytes, double bytes_per_s, double base_latency_ns = 0.0);
/// Worst-case (stalled) transfer time of `payload` on `model`, ns.
double single_param_update_time(const channel::ChannelTimingModel &model, double payload_bytes = 32);

struct ReportRow {
    std::string key;
    std::string label;
    std::string unit;
    double computed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool relative = false; ///< tolerance is a fraction of the reference
    /// Digits the computed value is rounded to before comparison; -1 keeps it.
    int round_digits = -1;
    std::string note;

    double compared() const;
    double deviation() const { return compared() - reference; }
    bool pass() const;
};

/// Every closed-form value beside its reference and tolerance.
std::vector<ReportRow> reproduction_table(const StreamConfig &cfg = {});

std::string report_json(const std::vector<ReportRow> &rows, const StreamConfig &cfg);
std::string report_markdown(const std::vector<ReportRow> &rows);

} // namespace awm::analysis
