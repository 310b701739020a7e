#include <awm/dds.hpp>
#include <awm/errors.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace awm;
using namespace awm::dds;

namespace {

ToneInputs tone(std::uint64_t ftw, std::int64_t amp, std::uint64_t phase = 0)
{
    ToneInputs t;
    t.ftw = ftw;
    t.amplitude = amp;
    t.phase_word = phase;
    return t;
}

} // namespace

TEST(Dds, ZeroFrequencyZeroPhaseIsSilent)
{
    DdsCore d;
    for (std::uint64_t c = 0; c < 16; ++c)
        EXPECT_EQ(d.step({tone(0, 1000), tone(0, 0)}, c).sample, 0.0);
}

TEST(Dds, QuarterTurnPerCycle)
{
    DdsCore d;
    std::uint64_t ftw = std::uint64_t{1} << (kDefaultPhaseBits - 2);
    const double expect[] = {0, 1, 0, -1, 0, 1, 0, -1};
    for (std::uint64_t c = 0; c < 8; ++c)
        EXPECT_EQ(d.step({tone(ftw, 3), tone(0, 0)}, c).sample, 3 * expect[c]);
}

TEST(Dds, OppositeTonesMatchSumIdentity)
{
    PhaseFormat fmt;
    DdsCore d(fmt);
    std::uint64_t f = 12345678901;
    std::uint64_t quarter = std::uint64_t{1} << 38;
    const double two_pi = 2 * std::numbers::pi;
    for (std::uint64_t k = 0; k < 200; ++k) {
        double out = d.step({tone(f, 1000), tone(fmt.wrap(-f), 1000, quarter)}, k).sample;
        long double a = two_pi * std::ldexp(static_cast<long double>(oracle::mod_mul(k, f, 40)), -40);
        // sin(a) + sin(-a + pi/2) = sin(a) + cos(a)
        long double expect = 1000.0L * (std::sin(a) + std::cos(a));
        ASSERT_NEAR(out, static_cast<double>(expect), 1e-6) << "k=" << k;
    }
}

TEST(Dds, SyncAtCounterZero)
{
    DdsCore d;
    d.tone(0).phase_acc = 999;
    d.sync_phase(0, 77, 0);
    EXPECT_EQ(d.tone(0).phase_acc, 0u);
}

TEST(Dds, SyncThenFreeRun)
{
    PhaseFormat fmt;
    DdsCore d(fmt);
    std::uint64_t C = 1'000'003, F = 987654321987;
    ToneInputs in = tone(F, 1);
    in.sync_trigger = true;
    d.step({in, tone(0, 0)}, C);
    in.sync_trigger = false;
    for (std::uint64_t k = 1; k <= 50; ++k)
        d.step({in, tone(0, 0)}, C + k);
    EXPECT_EQ(d.tone(0).phase_acc, oracle::mod_mul(C + 51, F, 40));
}

namespace {

// Free-run `first`, switch to `second`, then sync back to `first`; returns the
// phase used for the resync sample.
std::uint64_t switch_and_resync(unsigned bits, unsigned counter_bits, std::uint64_t first, std::uint64_t second,
                                std::uint64_t t_switch, std::uint64_t t_back)
{
    PhaseFormat fmt(bits);
    DdsCore d(fmt);
    GlobalCounter counter(counter_bits);
    for (std::uint64_t t = 0; t < t_back; ++t) {
        d.step({tone(t < t_switch ? first : second, 1), tone(0, 0)}, counter.value());
        counter.tick();
    }
    auto in = tone(first, 1);
    in.sync_trigger = true;
    return d.instantaneous_phase(0, in, counter.value());
}

} // namespace

TEST(Dds, ResyncRestoresFreeRunningPhase)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 300; ++i) {
        std::uint64_t F = rng() & ((std::uint64_t{1} << 40) - 1), G = rng() & ((std::uint64_t{1} << 40) - 1);
        std::uint64_t s = rng() % 200, b = s + 1 + rng() % 200;
        ASSERT_EQ(switch_and_resync(40, 64, F, G, s, b), oracle::mod_mul(b, F, 40));
    }
}

TEST(Dds, ResyncSurvivesCounterWrapAtSmallWidth)
{
    std::mt19937_64 rng(10);
    for (int i = 0; i < 300; ++i) {
        std::uint64_t F = 1 + rng() % 255, G = rng() % 256;
        std::uint64_t s = rng() % 600, b = s + 1 + rng() % 600;
        ASSERT_EQ(switch_and_resync(8, 8, F, G, s, b), oracle::mod_mul(b, F, 8));
    }
}

TEST(Dds, FrameRotationAdditive)
{
    PhaseFormat fmt;
    DdsCore d(fmt);
    d.apply_frame_rotation(1, 0);
    EXPECT_EQ(d.tone(1).frame_acc, 0u);
    std::uint64_t quarter = std::uint64_t{1} << 38;
    d.apply_frame_rotation(1, quarter);
    d.apply_frame_rotation(1, quarter);
    EXPECT_EQ(d.tone(1).frame_acc, 2 * quarter);
    d.apply_frame_rotation(1, 3 * quarter);
    EXPECT_EQ(d.tone(1).frame_acc, quarter);
}

namespace {

// Drive a frame ramp 0, step, 2 step, ... over `len` samples.
std::uint64_t run_frame_ramp(bool final_only, std::uint64_t step, std::uint64_t len, std::vector<double> *trace)
{
    DdsCore d;
    for (std::uint64_t k = 0; k < len; ++k) {
        auto in = tone(0, 1000);
        in.frame_input = k * step;
        in.frame_accumulate = true;
        in.frame_final_only = final_only;
        in.frame_segment_end = k + 1 == len;
        auto out = d.step({in, tone(0, 0)}, k);
        if (trace)
            trace->push_back(out.sample);
    }
    return d.tone(0).frame_acc;
}

} // namespace

TEST(Dds, FinalOnlyFrameAccumulatesLastSample)
{
    std::uint64_t step = 1'000'000, len = 17;
    EXPECT_EQ(run_frame_ramp(true, step, len, nullptr), (len - 1) * step);
}

TEST(Dds, SummedFrameAccumulatesEverySample)
{
    std::uint64_t step = 1'000'000, len = 17;
    EXPECT_EQ(run_frame_ramp(false, step, len, nullptr), step * len * (len - 1) / 2);
}

TEST(Dds, FrameAccumulationDoesNotBendCurrentPulse)
{
    std::vector<double> with, without;
    run_frame_ramp(true, 1'000'000'000, 30, &with);
    DdsCore d;
    for (std::uint64_t k = 0; k < 30; ++k) {
        auto in = tone(0, 1000);
        in.frame_input = k * 1'000'000'000;
        without.push_back(d.step({in, tone(0, 0)}, k).sample);
    }
    EXPECT_EQ(with, without);
}

TEST(Dds, Feedforward)
{
    PhaseFormat fmt;
    EXPECT_EQ(feedforward_offset(12345, 0, fmt), 0u);
    EXPECT_EQ(feedforward_offset(12345, 1, fmt), 12345u);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t p = rng() & fmt.mask(), h = rng() % 64;
        EXPECT_EQ(feedforward_offset(p, 2 * h, fmt), fmt.add(feedforward_offset(p, h, fmt), feedforward_offset(p, h, fmt)));
        EXPECT_EQ(feedforward_offset(p, h, fmt), oracle::mod_mul(p, h, 40));
    }
}

TEST(Dds, FeedforwardOnlyWhenEnabled)
{
    DdsCore d;
    d.feedforward() = {std::uint64_t{1} << 38, 1};
    auto in = tone(0, 5);
    EXPECT_EQ(d.instantaneous_phase(0, in, 0), 0u);
    in.ffwd_enable = true;
    EXPECT_EQ(d.instantaneous_phase(0, in, 0), std::uint64_t{1} << 38);
    EXPECT_EQ(d.step({in, tone(0, 0)}, 0).sample, 5.0);
}

TEST(Dds, ZeroAmplitudeIsIdenticallyZero)
{
    DdsCore d;
    std::mt19937_64 rng(2);
    for (std::uint64_t k = 0; k < 500; ++k) {
        auto a = tone(rng() & 0xFFFFFFFFFF, 0, rng() & 0xFFFFFFFFFF);
        auto b = tone(rng() & 0xFFFFFFFFFF, 0, rng() & 0xFFFFFFFFFF);
        auto out = d.step({a, b}, k);
        ASSERT_EQ(out.sample, 0.0);
        ASSERT_FALSE(std::signbit(out.sample));
    }
}

TEST(Dds, PhaseFormatWidths)
{
    EXPECT_THROW(PhaseFormat(0), ConfigError);
    EXPECT_THROW(PhaseFormat(65), ConfigError);
    PhaseFormat f64(64);
    EXPECT_EQ(f64.add(~0ull, 2), 1u);
}

TEST(Crosstalk, ZeroScalesPassOwnSampleThrough)
{
    std::vector<std::complex<double>> n{{1, 2}, {3, 4}}, s{{0, 0}, {0, 0}};
    EXPECT_EQ(mix_crosstalk(0.75, n, s), 0.75);

    CrosstalkMixer mixer(2, {{0, 1, 0.0, 0.0, 0}}, 2);
    std::vector<double> seen;
    for (int k = 0; k < 5; ++k) {
        std::vector<ChannelOutput> outs(2);
        outs[0].sample = k + 1;
        seen.push_back(mixer.mix(outs)[0]);
    }
    EXPECT_EQ(seen, (std::vector<double>{0, 0, 1, 2, 3}));
}

namespace {

// Channel 1 carries leakage g * s(t) of channel 0's signal s; one term with
// amplitude -g and delay `delay` tries to cancel it. Returns max |residual|.
double residual(double g, double turns_per_sample, unsigned delay)
{
    CrosstalkMixer mixer(2, {{1, 0, -g, 0.0, delay}});
    double worst = 0;
    for (int k = 0; k < 400; ++k) {
        double a = 2 * std::numbers::pi * turns_per_sample * k;
        std::vector<ChannelOutput> outs(2);
        outs[0].secondary = {std::cos(a), std::sin(a)};
        outs[0].sample = std::sin(a);
        outs[1].secondary = g * outs[0].secondary;
        outs[1].sample = g * std::sin(a);
        double r = mixer.mix(outs)[1];
        if (k > 4)
            worst = std::max(worst, std::abs(r));
    }
    return worst;
}

} // namespace

TEST(Crosstalk, ExactCancellationWhenAligned)
{
    EXPECT_LT(residual(0.3, 0.01, 0), 1e-15);
}

TEST(Crosstalk, MisalignmentResidualGrowsWithFrequency)
{
    double prev = 0;
    for (double f : {0.005, 0.01, 0.02, 0.05, 0.1, 0.2}) {
        double r = residual(0.3, f, 1);
        double peak = 2 * 0.3 * std::sin(std::numbers::pi * f);
        EXPECT_GT(r, prev);
        EXPECT_LE(r, peak + 1e-12);
        EXPECT_GE(r, peak * std::cos(std::numbers::pi * f) - 1e-12);
        prev = r;
    }
}

TEST(Crosstalk, RejectsBadChannels)
{
    EXPECT_THROW(CrosstalkMixer(2, {{2, 0, 1.0, 0.0, 0}}), ConfigError);
}
