#include <awm/compiler.hpp>
#include <awm/simulator.hpp>
#include <awm/spline_engine.hpp>
#include <awm/wordcodec.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace awm;

namespace {

codec::SplineSegment sample_segment()
{
    codec::SplineSegment s;
    s.meta.param = 1;
    s.tau = 1000;
    s.u0 = 123456;
    s.u1 = -77;
    s.u2 = 5;
    s.u3 = -1;
    return s;
}

compiler::GateDefinition sample_gate(const std::string &name, std::uint64_t duration)
{
    compiler::GateDefinition g;
    g.name = name;
    g.duration = duration;
    for (unsigned c = 0; c < 8; ++c) {
        auto &ch = g.channels[c];
        ch.params[0] = compiler::ParamSpec::constant_value(21990232555 + c);
        ch.params[1] = compiler::ParamSpec::spline(
            {{0, 0}, {duration / 4, 30000}, {3 * duration / 4, 30000}, {duration, 0}});
        ch.tones[0].sync = true;
    }
    return g;
}

void BM_EncodePlut(benchmark::State &state)
{
    codec::PlutWrite w{1, 42, sample_segment()};
    for (auto _ : state)
        benchmark::DoNotOptimize(codec::encode(w));
}
BENCHMARK(BM_EncodePlut);

void BM_DecodePlut(benchmark::State &state)
{
    auto block = codec::encode(codec::PlutWrite{1, 42, sample_segment()});
    for (auto _ : state)
        benchmark::DoNotOptimize(codec::decode_word(block));
}
BENCHMARK(BM_DecodePlut);

void BM_EngineStep(benchmark::State &state)
{
    auto seg = sample_segment();
    seg.tau = std::uint64_t{1} << 39;
    spline::SplineEngine engine;
    engine.push(seg);
    engine.enable();
    for (auto _ : state)
        benchmark::DoNotOptimize(engine.step());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EngineStep);

void BM_Compile(benchmark::State &state)
{
    std::vector<compiler::GateDefinition> gates{sample_gate("a", 200), sample_gate("b", 120)};
    std::vector<std::string> circuit;
    for (int i = 0; i < state.range(0); ++i)
        circuit.push_back(i % 3 ? "a" : "b");
    for (auto _ : state)
        benchmark::DoNotOptimize(compiler::compile(gates, circuit, 8));
}
BENCHMARK(BM_Compile)->Arg(20)->Arg(1000);

void BM_Simulate(benchmark::State &state)
{
    std::vector<compiler::GateDefinition> gates{sample_gate("a", 200)};
    std::vector<std::string> circuit(static_cast<std::size_t>(state.range(0)), "a");
    auto stream = compiler::compile(gates, circuit, 8).stream();
    std::uint64_t cycles = 0;
    for (auto _ : state) {
        auto r = sim::simulate(stream);
        cycles += r.cycles;
        benchmark::DoNotOptimize(r);
    }
    state.counters["cycles/s"] = benchmark::Counter(static_cast<double>(cycles), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Simulate)->Arg(10);

} // namespace
BENCHMARK_MAIN();
