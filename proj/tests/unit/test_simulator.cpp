#include <awm/compiler.hpp>
#include <awm/errors.hpp>
#include <awm/simulator.hpp>
#include <awm/wordcodec.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace awm;
using namespace awm::compiler;

namespace {

struct Library {
    GateLibrary lib;
    std::vector<std::string> circuit;
};

Library fixture(const char *gates, const char *circuit)
{
    return {parse_gate_file(read_text_file(std::string(AWM_FIXTURE_DIR "/") + gates)),
            parse_circuit_file(read_text_file(std::string(AWM_FIXTURE_DIR "/") + circuit))};
}

std::string csv(const sim::SimResult &r, void (*writer)(std::ostream &, const sim::SimResult &))
{
    std::ostringstream out;
    writer(out, r);
    return out.str();
}

} // namespace

TEST(Simulator, CompiledAndRawFixtureAgree)
{
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 8);
    auto raw = emit_raw_stream(f.lib.gates, f.circuit, 8);
    auto a = sim::simulate(prog.stream());
    auto b = sim::simulate(raw);
    EXPECT_TRUE(a.drained);
    EXPECT_EQ(csv(a, sim::write_inputs_csv), csv(b, sim::write_inputs_csv));
    EXPECT_EQ(csv(a, sim::write_waveform_csv), csv(b, sim::write_waveform_csv));
    EXPECT_EQ(csv(a, sim::write_events_csv), csv(b, sim::write_events_csv));
}

TEST(Simulator, EarlyTriggerStretchesCircuit)
{
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto stream = compile(f.lib.gates, f.circuit, 8).stream();
    // Triggered after every segment has reached its FIFO: no underruns and
    // exactly the circuit's length.
    sim::SimConfig late;
    late.trigger_cycle = 64;
    auto r = sim::simulate(stream, late);
    EXPECT_EQ(r.cycles, 3 * 200u + 2 * 40u);
    EXPECT_TRUE(r.events.empty());
    // The default trigger starts engines before the feed path has delivered
    // the first gate's segments; the starved engines start late.
    auto early = sim::simulate(stream);
    EXPECT_GT(early.cycles, r.cycles);
    ASSERT_FALSE(early.events.empty());
    EXPECT_EQ(early.events.front().kind, spline::BankEventKind::Underrun);
}

TEST(Simulator, SilentChannelIsZero)
{
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 8);
    auto r = sim::simulate(prog.stream());
    // Channel 3 has both amplitudes forced to zero.
    for (std::uint64_t k = 0; k < r.cycles; ++k)
        ASSERT_EQ(r.sample(k, 3), 0.0);
    bool any = false;
    for (std::uint64_t k = 0; k < r.cycles; ++k)
        any = any || r.sample(k, 0) != 0.0;
    EXPECT_TRUE(any);
}

TEST(Simulator, SyncedToneFollowsGlobalCounter)
{
    auto f = fixture("single_gate.json", "single_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 1);
    sim::SimConfig cfg;
    cfg.channels = 1;
    cfg.counter_start = 123456789;
    auto r = sim::simulate(prog.stream(), cfg);
    ASSERT_EQ(r.cycles, 120u);
    EXPECT_TRUE(r.input(0, 0)[0].sync_trigger);
    EXPECT_FALSE(r.input(1, 0)[0].sync_trigger);

    // tone0: amplitude 20000, phase = (counter * ftw) mod 2^40 from the first sample on.
    std::uint64_t ftw = 27487790694;
    for (std::uint64_t k = 0; k < r.cycles; ++k) {
        std::uint64_t counter = cfg.counter_start + cfg.trigger_cycle + k;
        double turns = std::ldexp(static_cast<double>(oracle::mod_mul(counter, ftw, 40)), -40);
        ASSERT_NEAR(r.sample(k, 0), 20000 * std::sin(2 * std::numbers::pi * turns), 1e-6) << k;
    }
}

TEST(Simulator, FrameFinalAccumulatesAcrossGates)
{
    // The "ms" gate ramps frame0 to 4000 and accumulates only the final
    // sample; the "rz" gate adds 64 per sample for 40 samples.
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 8);
    auto r = sim::simulate(prog.stream());
    const auto &last_ms = r.input(199, 0)[0];
    EXPECT_TRUE(last_ms.frame_accumulate && last_ms.frame_final_only && last_ms.frame_segment_end);
    const auto &rz = r.input(200, 0)[0];
    EXPECT_TRUE(rz.frame_accumulate);
    EXPECT_FALSE(rz.frame_final_only);
    EXPECT_EQ(rz.frame_input, 64u);
}

TEST(Simulator, MidCircuitReprogramming)
{
    std::vector<GateDefinition> gates(1);
    gates[0].name = "p";
    gates[0].duration = 30;
    gates[0].channels[0].params[1] = ParamSpec::constant_value(100);
    std::vector<std::string> circuit{"p"};
    auto prog = compile(gates, circuit, 1);
    auto stream = prog.stream();
    for (const auto &w : delta_update(prog, "p", 0, "amp0", ParamSpec::constant_value(250)))
        stream.push_back(codec::encode(w));
    stream.insert(stream.end(), prog.sequencing.begin(), prog.sequencing.end());

    sim::SimConfig cfg;
    cfg.channels = 1;
    auto r = sim::simulate(stream, cfg);
    ASSERT_EQ(r.cycles, 60u);
    EXPECT_EQ(r.input(0, 0)[0].amplitude, 100);
    EXPECT_EQ(r.input(29, 0)[0].amplitude, 100);
    EXPECT_EQ(r.input(30, 0)[0].amplitude, 250);
    EXPECT_EQ(r.input(59, 0)[0].amplitude, 250);
}

TEST(Simulator, StarvedFifoReportsBackpressure)
{
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 8);
    sim::SimConfig cfg;
    cfg.fifo_depth = 1;
    auto r = sim::simulate(prog.stream(), cfg);
    EXPECT_TRUE(r.drained);
    EXPECT_FALSE(r.events.empty());
    for (std::size_t i = 1; i < r.events.size(); ++i)
        EXPECT_LE(r.events[i - 1].cycle, r.events[i].cycle);
}

TEST(Simulator, EmptyStreamStopsAtTrigger)
{
    auto r = sim::simulate({});
    EXPECT_TRUE(r.drained);
    EXPECT_EQ(r.cycles, 0u);
}

TEST(Simulator, MaxCyclesCapsRun)
{
    auto f = fixture("single_gate.json", "repeat20_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 1);
    sim::SimConfig cfg;
    cfg.channels = 1;
    cfg.max_cycles = 50;
    auto r = sim::simulate(prog.stream(), cfg);
    EXPECT_FALSE(r.drained);
    EXPECT_EQ(r.cycles, 50 - cfg.trigger_cycle);
}

TEST(Simulator, Deterministic)
{
    auto f = fixture("eight_channel.json", "eight_channel_circuit.json");
    auto prog = compile(f.lib.gates, f.circuit, 8);
    auto cfg = sim::parse_sim_config(R"({"crosstalk":[{"target":1,"source":0,"amplitude":-0.1,"phase":0.3,"delay":2}],
                                          "primary_delay":2,"feedforward":{"phase":1000,"harmonic":3}})");
    auto a = sim::simulate(prog.stream(), cfg);
    auto b = sim::simulate(prog.stream(), cfg);
    EXPECT_EQ(csv(a, sim::write_waveform_csv), csv(b, sim::write_waveform_csv));
    EXPECT_EQ(csv(a, sim::write_events_csv), csv(b, sim::write_events_csv));
}

TEST(SimConfig, ParseAndReject)
{
    auto cfg = sim::parse_sim_config(R"({"channels":2,"phase_bits":8,"counter_bits":8,"trigger_cycle":3})");
    EXPECT_EQ(cfg.channels, 2u);
    EXPECT_EQ(cfg.phase_bits, 8u);
    EXPECT_EQ(cfg.trigger_cycle, 3u);
    EXPECT_EQ(sim::parse_sim_config(sim::to_json(cfg)).phase_bits, 8u);

    EXPECT_THROW(sim::parse_sim_config(R"({"chanels":2})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"channels":9})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"phase_bits":0})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"fifo_depth":0})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"channels":"x"})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"crosstalk":[{"target":8}]})"), ConfigError);
    EXPECT_THROW(sim::parse_sim_config(R"({"feedforward":{"gain":1}})"), ConfigError);
}

TEST(SimCsv, Headers)
{
    sim::SimResult r;
    EXPECT_EQ(csv(r, sim::write_waveform_csv), "cycle,channel,sample\n");
    EXPECT_EQ(csv(r, sim::write_events_csv), "cycle,channel,engine,kind\n");
    EXPECT_EQ(csv(r, sim::write_inputs_csv), "cycle,channel,tone,ftw,phase_word,amplitude,frame,sync,ffwd,frame_flags\n");
}
