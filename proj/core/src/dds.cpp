#include <awm/dds.hpp>
#include <awm/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace awm::dds {

PhaseFormat::PhaseFormat(unsigned bits) : bits_(bits)
{
    if (bits < 1 || bits > 64)
        throw ConfigError("phase width must be 1..64 bits");
    mask_ = bits == 64 ? ~0ull : (1ull << bits) - 1;
}

double PhaseFormat::turns(std::uint64_t phase) const noexcept
{
    return std::ldexp(static_cast<double>(phase & mask_), -static_cast<int>(bits_));
}

namespace {

// sin(2 pi x) with exact zeros and unit peaks on quarter turns.
double sin_turns(double x)
{
    double q = x * 4.0;
    if (q == std::floor(q)) {
        static constexpr double quadrant[] = {0.0, 1.0, 0.0, -1.0};
        return quadrant[static_cast<int>(q) & 3];
    }
    return std::sin(2.0 * std::numbers::pi * x);
}

double cos_turns(double x)
{
    return sin_turns(x + 0.25 >= 1.0 ? x - 0.75 : x + 0.25);
}

} // namespace

std::uint64_t feedforward_offset(std::uint64_t ffwd_phase, std::uint64_t harmonic, const PhaseFormat &fmt)
{
    return fmt.mul(ffwd_phase, harmonic);
}

DdsCore::DdsCore(PhaseFormat fmt) : fmt_(fmt) {}

void DdsCore::sync_phase(unsigned tone, std::uint64_t ftw, std::uint64_t global_counter)
{
    tones_.at(tone).phase_acc = fmt_.mul(global_counter, ftw);
}

void DdsCore::apply_frame_rotation(unsigned tone, std::uint64_t frame_value)
{
    auto &t = tones_.at(tone);
    t.frame_acc = fmt_.add(t.frame_acc, frame_value);
}

std::uint64_t DdsCore::apply_feedforward() const noexcept
{
    return feedforward_offset(ffwd_.ffwd_phase, ffwd_.harmonic, fmt_);
}

std::uint64_t DdsCore::instantaneous_phase(unsigned tone, const ToneInputs &in, std::uint64_t global_counter)
{
    auto &t = tones_.at(tone);
    if (in.sync_trigger)
        sync_phase(tone, in.ftw, global_counter);
    std::uint64_t phase = fmt_.add(t.phase_acc, in.phase_word);
    phase = fmt_.add(phase, t.frame_acc);
    phase = fmt_.add(phase, in.frame_input);
    if (in.ffwd_enable)
        phase = fmt_.add(phase, apply_feedforward());
    return phase;
}

ChannelOutput DdsCore::step(const std::array<ToneInputs, 2> &inputs, std::uint64_t global_counter)
{
    ChannelOutput out;
    for (unsigned k = 0; k < 2; ++k) {
        const auto &in = inputs[k];
        auto &t = tones_[k];
        double turns = fmt_.turns(instantaneous_phase(k, in, global_counter));
        double amp = static_cast<double>(in.amplitude);
        out.secondary += std::complex<double>(amp * cos_turns(turns), amp * sin_turns(turns));

        t.phase_acc = fmt_.add(t.phase_acc, fmt_.wrap(in.ftw));
        if (in.frame_accumulate) {
            if (in.frame_final_only) {
                if (in.frame_segment_end)
                    apply_frame_rotation(k, in.frame_input);
            }
            else {
                t.frame_pending = fmt_.add(t.frame_pending, in.frame_input);
                if (in.frame_segment_end) {
                    apply_frame_rotation(k, t.frame_pending);
                    t.frame_pending = 0;
                }
            }
        }
    }
    // Normalizes -0.0 so silent channels print as 0.
    out.sample = out.secondary.imag() + 0.0;
    return out;
}

double mix_crosstalk(double own_delayed, std::span<const std::complex<double>> neighbor_delayed,
                     std::span<const std::complex<double>> scales)
{
    if (neighbor_delayed.size() != scales.size())
        throw ConfigError("crosstalk: one scale per neighbor is required");
    double out = own_delayed;
    for (std::size_t i = 0; i < scales.size(); ++i)
        out += (scales[i] * neighbor_delayed[i]).imag();
    return out + 0.0;
}

CrosstalkMixer::CrosstalkMixer(unsigned channels, std::vector<CrosstalkTerm> terms, unsigned primary_delay)
    : channels_(channels), terms_(std::move(terms)), primary_delay_(primary_delay), lines_(channels)
{
    unsigned max_delay = primary_delay;
    for (const auto &t : terms_) {
        if (t.target >= channels || t.source >= channels)
            throw ConfigError("crosstalk term references channel outside 0.." + std::to_string(channels - 1));
        max_delay = std::max(max_delay, t.delay);
    }
    history_ = std::size_t(max_delay) + 1;
}

std::vector<double> CrosstalkMixer::mix(std::span<const ChannelOutput> outputs)
{
    if (outputs.size() != channels_)
        throw ConfigError("crosstalk mixer expects one output per channel");
    for (unsigned c = 0; c < channels_; ++c) {
        lines_[c].push_front(outputs[c]);
        if (lines_[c].size() > history_)
            lines_[c].pop_back();
    }
    auto delayed = [&](unsigned c, unsigned d) -> ChannelOutput {
        return d < lines_[c].size() ? lines_[c][d] : ChannelOutput{};
    };
    std::vector<double> out(channels_);
    for (unsigned c = 0; c < channels_; ++c)
        out[c] = delayed(c, primary_delay_).sample;
    for (const auto &t : terms_) {
        std::complex<double> scale(t.amplitude * std::cos(t.phase), t.amplitude * std::sin(t.phase));
        out[t.target] += (scale * delayed(t.source, t.delay).secondary).imag();
    }
    for (auto &v : out)
        v += 0.0;
    return out;
}

} // namespace awm::dds
