#pragma once

// Cycle-level model of the whole datapath: stream words through the gate
// sequencer into per-channel engine banks, then the DDS and crosstalk mixer.

#include <awm/bits.hpp>
#include <awm/dds.hpp>
#include <awm/spline_engine.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace awm::sim {

struct SimConfig {
    unsigned channels = 8;
    std::size_t fifo_depth = spline::kDefaultFifoDepth;
    /// Cycle at which the global trigger starts every bank.
    std::uint64_t trigger_cycle = 8;
    /// Hard stop; the run normally ends once every bank has drained.
    std::uint64_t max_cycles = 10'000'000;
    unsigned phase_bits = dds::kDefaultPhaseBits;
    unsigned counter_bits = 64;
    std::uint64_t counter_start = 0;
    dds::Feedforward feedforward;
    unsigned primary_delay = 0;
    std::vector<dds::CrosstalkTerm> crosstalk;

    void validate() const;
};

/// Parse a JSON object of SimConfig fields; unknown keys are ConfigErrors.
SimConfig parse_sim_config(std::string_view json, SimConfig base = {});
std::string to_json(const SimConfig &cfg);

struct SimEvent {
    std::uint64_t cycle = 0;
    unsigned channel = 0;
    unsigned engine = 0;
    spline::BankEventKind kind = spline::BankEventKind::Underrun;

    friend bool operator==(const SimEvent &, const SimEvent &) = default;
};

using ChannelInputs = std::array<dds::ToneInputs, 2>;

struct SimResult {
    unsigned channels = 0;
    /// Cycle of the first recorded sample (the trigger cycle).
    std::uint64_t first_cycle = 0;
    std::uint64_t cycles = 0;
    bool drained = false;
    /// Row-major [cycle][channel].
    std::vector<double> samples;
    std::vector<ChannelInputs> inputs;
    std::vector<SimEvent> events;

    double sample(std::uint64_t cycle, unsigned channel) const { return samples.at(cycle * channels + channel); }
    const ChannelInputs &input(std::uint64_t cycle, unsigned channel) const
    {
        return inputs.at(cycle * channels + channel);
    }
};

/// Tone inputs taken from the eight engine samples of one bank.
ChannelInputs tone_inputs(const std::array<spline::EngineSample, spline::kParameters> &samples,
                          const dds::PhaseFormat &fmt);

SimResult simulate(std::span<const Word256> stream, const SimConfig &cfg = {});

/// "cycle,channel,sample"
void write_waveform_csv(std::ostream &out, const SimResult &r);
/// "cycle,channel,tone,ftw,phase_word,amplitude,frame,sync,ffwd,frame_flags"
void write_inputs_csv(std::ostream &out, const SimResult &r);
/// "cycle,channel,engine,kind"
void write_events_csv(std::ostream &out, const SimResult &r);

} // namespace awm::sim
