#pragma once

// Random gate libraries and circuits mixing constant and modulated
// parameters, used by the equivalence tests.

#include <awm/compiler.hpp>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace testgen {

struct RandomCircuit {
    std::vector<awm::compiler::GateDefinition> gates;
    std::vector<std::string> circuit;
};

inline awm::compiler::ParamSpec random_param(std::mt19937_64 &rng, std::uint64_t duration, unsigned param)
{
    using awm::compiler::Knot;
    using awm::compiler::ParamSpec;
    std::uniform_int_distribution<int> coin(0, 2);
    // Amplitudes stay small so the spline never leaves 40 bits.
    std::int64_t scale = param % 4 == 1 ? 30000 : std::int64_t{1} << 36;
    std::uniform_int_distribution<std::int64_t> value(-scale, scale);
    if (duration < 2 || coin(rng) != 0)
        return ParamSpec::constant_value(value(rng));
    std::uniform_int_distribution<std::uint64_t> inner(1, duration - 1);
    std::vector<std::uint64_t> times{0, duration};
    for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i)
        times.push_back(inner(rng));
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<Knot> knots;
    for (auto t : times)
        knots.push_back({t, static_cast<double>(value(rng) / 1024)});
    return ParamSpec::spline(std::move(knots));
}

inline RandomCircuit random_circuit(std::mt19937_64 &rng, unsigned channels, std::size_t max_gates,
                                    std::size_t library_size = 6)
{
    using namespace awm::compiler;
    RandomCircuit rc;
    std::uniform_int_distribution<std::uint64_t> dur(1, 60);
    for (std::size_t g = 0; g < library_size; ++g) {
        GateDefinition def;
        def.name = "g" + std::to_string(g);
        def.duration = dur(rng);
        for (unsigned c = 0; c < channels; ++c) {
            if (rng() % 5 == 0)
                continue; // silent channel
            ChannelSpec spec;
            for (unsigned p = 0; p < kParams; ++p)
                spec.params[p] = random_param(rng, def.duration, p);
            for (auto &tone : spec.tones) {
                tone.sync = rng() % 2;
                tone.ffwd = rng() % 3 == 0;
                tone.frame = static_cast<FrameMode>(rng() % 3);
            }
            def.channels[c] = spec;
        }
        rc.gates.push_back(std::move(def));
    }
    std::size_t n = 1 + rng() % max_gates;
    for (std::size_t i = 0; i < n; ++i)
        rc.circuit.push_back(rc.gates[rng() % rc.gates.size()].name);
    return rc;
}

} // namespace testgen
