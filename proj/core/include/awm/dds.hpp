#pragma once

// Dual-tone DDS with global phase synchronization, frame-rotation
// accumulation, frequency feedforward and crosstalk cancellation.

#include <array>
#include <complex>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

namespace awm::dds {

inline constexpr unsigned kDefaultPhaseBits = 40;

/// Modular N-bit phase arithmetic (1 <= N <= 64).
class PhaseFormat {
public:
    explicit PhaseFormat(unsigned bits = kDefaultPhaseBits);

    unsigned bits() const noexcept { return bits_; }
    std::uint64_t mask() const noexcept { return mask_; }
    std::uint64_t wrap(std::uint64_t v) const noexcept { return v & mask_; }
    std::uint64_t from_signed(std::int64_t v) const noexcept { return static_cast<std::uint64_t>(v) & mask_; }
    std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept { return (a + b) & mask_; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const noexcept { return (a * b) & mask_; }
    /// Phase as a fraction of a turn in [0, 1).
    double turns(std::uint64_t phase) const noexcept;

private:
    unsigned bits_;
    std::uint64_t mask_;
};

/// Free-running counter shared by every channel; one increment per sample.
class GlobalCounter {
public:
    explicit GlobalCounter(unsigned bits = 64) : mask_(bits >= 64 ? ~0ull : (1ull << bits) - 1) {}

    std::uint64_t value() const noexcept { return value_; }
    void tick() noexcept { value_ = (value_ + 1) & mask_; }
    void set(std::uint64_t v) noexcept { value_ = v & mask_; }

private:
    std::uint64_t mask_;
    std::uint64_t value_ = 0;
};

/// Per-tone inputs for one sample, normally taken from the bank's engines.
struct ToneInputs {
    std::uint64_t ftw = 0;
    std::uint64_t phase_word = 0;
    std::int64_t amplitude = 0;
    std::uint64_t frame_input = 0;
    bool sync_trigger = false;
    bool ffwd_enable = false;
    // Frame-rotation control for the current frame segment.
    bool frame_accumulate = false;
    bool frame_final_only = false;
    bool frame_segment_end = false;

    friend bool operator==(const ToneInputs &, const ToneInputs &) = default;
};

struct ToneState {
    std::uint64_t phase_acc = 0;
    std::uint64_t frame_acc = 0;
    // Sum of frame samples of the current segment, for non-final accumulation.
    std::uint64_t frame_pending = 0;
};

struct Feedforward {
    std::uint64_t ffwd_phase = 0;
    std::uint64_t harmonic = 0;
};

struct ChannelOutput {
    double sample = 0.0;
    /// Complex form of the tone sum; sample == secondary.imag().
    std::complex<double> secondary;
};

/// (ffwd_phase * harmonic) mod 2^N.
std::uint64_t feedforward_offset(std::uint64_t ffwd_phase, std::uint64_t harmonic, const PhaseFormat &fmt);

class DdsCore {
public:
    explicit DdsCore(PhaseFormat fmt = PhaseFormat{});

    const PhaseFormat &format() const noexcept { return fmt_; }
    ToneState &tone(unsigned t) { return tones_.at(t); }
    const ToneState &tone(unsigned t) const { return tones_.at(t); }
    Feedforward &feedforward() noexcept { return ffwd_; }

    /// Overwrite the accumulator with the free-running phase for `ftw`.
    void sync_phase(unsigned tone, std::uint64_t ftw, std::uint64_t global_counter);
    void apply_frame_rotation(unsigned tone, std::uint64_t frame_value);
    std::uint64_t apply_feedforward() const noexcept;

    /// Instantaneous phase used for this sample (before the accumulator
    /// advances). Applies a pending sync first.
    std::uint64_t instantaneous_phase(unsigned tone, const ToneInputs &in, std::uint64_t global_counter);

    /// One output sample at `global_counter`. The accumulator advances by
    /// ftw afterwards; frame accumulation lands after the sample.
    ChannelOutput step(const std::array<ToneInputs, 2> &inputs, std::uint64_t global_counter);

private:
    PhaseFormat fmt_;
    std::array<ToneState, 2> tones_{};
    Feedforward ffwd_;
};

/// One cancellation path: `source`'s secondary signal, delayed by `delay`
/// samples and scaled by amplitude * exp(i phase), is added to `target`.
struct CrosstalkTerm {
    unsigned target = 0;
    unsigned source = 0;
    double amplitude = 0.0;
    double phase = 0.0;
    unsigned delay = 0;
};

/// Corrected sample: delayed own sample plus Im(scale_n * neighbor_n).
double mix_crosstalk(double own_delayed, std::span<const std::complex<double>> neighbor_delayed,
                     std::span<const std::complex<double>> scales);

/// Delay-line network applying every CrosstalkTerm across channels. The
/// primary path of every channel is delayed by `primary_delay` samples.
class CrosstalkMixer {
public:
    CrosstalkMixer(unsigned channels, std::vector<CrosstalkTerm> terms, unsigned primary_delay = 0);

    std::vector<double> mix(std::span<const ChannelOutput> outputs);

private:
    unsigned channels_;
    std::vector<CrosstalkTerm> terms_;
    unsigned primary_delay_;
    std::size_t history_;
    // Most recent sample at the front.
    std::vector<std::deque<ChannelOutput>> lines_;
};

} // namespace awm::dds
