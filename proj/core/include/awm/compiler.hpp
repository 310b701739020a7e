#pragma once

// Compiles gate definitions into deduplicated LUT contents and packed
// programming/sequencing word streams, or into raw LUT-bypass streams.

#include <awm/bits.hpp>
#include <awm/lut_store.hpp>
#include <awm/wordcodec.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace awm::compiler {

inline constexpr unsigned kParams = lut::kEnginesPerChannel;

/// Engine order within a channel.
inline constexpr std::array<std::string_view, kParams> kParamNames = {
    "freq0", "amp0", "phase0", "frame0", "freq1", "amp1", "phase1", "frame1"};

/// Index into kParamNames; LookupError for unknown names.
unsigned param_index(std::string_view name);

struct Knot {
    std::uint64_t time = 0;
    double value = 0.0;

    friend bool operator==(const Knot &, const Knot &) = default;
};

/// Either a constant held for the whole gate or a knot list interpolated by
/// a natural cubic spline.
struct ParamSpec {
    std::int64_t constant = 0;
    std::vector<Knot> knots;

    static ParamSpec constant_value(std::int64_t v) { return {v, {}}; }
    static ParamSpec spline(std::vector<Knot> k) { return {0, std::move(k)}; }
    bool is_constant() const noexcept { return knots.empty(); }

    friend bool operator==(const ParamSpec &, const ParamSpec &) = default;
};

/// How the frame parameter of a tone feeds the frame accumulator at the end
/// of each frame segment.
enum class FrameMode {
    None,  ///< applied to the current phase only
    Final, ///< last sample of the gate's frame spline is accumulated
    Sum,   ///< every sample is accumulated
};

struct ToneOptions {
    bool sync = false;
    bool ffwd = false;
    FrameMode frame = FrameMode::None;

    friend bool operator==(const ToneOptions &, const ToneOptions &) = default;
};

struct ChannelSpec {
    std::array<ParamSpec, kParams> params{};
    std::array<ToneOptions, 2> tones{};

    friend bool operator==(const ChannelSpec &, const ChannelSpec &) = default;
};

/// Channels absent from `channels` play all-zero constants for `duration`.
struct GateDefinition {
    std::string name;
    std::uint64_t duration = 1;
    std::map<unsigned, ChannelSpec> channels;

    const ChannelSpec &channel(unsigned c) const;
    void validate() const;
};

/// Piecewise cubic through `knots` (natural boundary conditions), one
/// segment per knot interval, as rounded integer forward differences.
/// Every knot before `duration` is reproduced exactly when its value is an
/// integer.
std::vector<codec::SplineSegment> fit_segments(std::span<const Knot> knots, std::uint64_t duration,
                                               codec::SegmentMetadata meta = {});

/// Segments (with routing and frame/sync metadata) for one parameter of a gate.
std::vector<codec::SplineSegment> param_segments(const GateDefinition &gate, unsigned channel, unsigned param);

struct WordCounts {
    std::size_t plut = 0;
    std::size_t mlut = 0;
    std::size_t glut = 0;
    std::size_t sequence = 0;

    std::size_t programming() const noexcept { return plut + mlut + glut; }
    std::size_t total() const noexcept { return programming() + sequence; }
    friend bool operator==(const WordCounts &, const WordCounts &) = default;
};

/// Allocation state of one channel's LUTs.
struct ChannelTables {
    std::vector<codec::SplineSegment> plut;
    std::vector<std::uint32_t> plut_refs;
    std::unordered_map<std::string, std::uint16_t> dedup;
    std::vector<std::uint16_t> mlut;
    std::map<std::uint16_t, lut::GateRange> glut;
};

/// MLUT addresses of each parameter's segments, per channel.
using GateLayout = std::vector<std::array<std::vector<std::uint16_t>, kParams>>;

struct CompiledProgram {
    unsigned channels = 1;
    std::vector<GateDefinition> gates; ///< indexed by gate ID
    std::map<std::string, std::uint16_t> gate_ids;
    std::vector<std::uint16_t> circuit;
    std::vector<ChannelTables> tables;
    std::vector<GateLayout> layout; ///< indexed by gate ID
    std::vector<Word256> programming;
    std::vector<Word256> sequencing;
    WordCounts counts;

    /// Programming words followed by sequencing words.
    std::vector<Word256> stream() const;
    /// Readout words if every gate ID travelled in its own word.
    std::size_t unpacked_sequence_words() const noexcept { return circuit.size(); }
    std::string report_json() const;
};

/// Gate IDs are assigned densely in first-use order. PLUT entries are
/// deduplicated per channel in first-seen order; identical writes on
/// several channels share one word with a multi-channel routing mask.
CompiledProgram compile(std::span<const GateDefinition> gates, std::span<const std::string> circuit,
                        unsigned channels);

/// LUT-bypass stream: every segment of every parameter, per gate and channel.
std::vector<Word256> emit_raw_stream(std::span<const GateDefinition> gates, std::span<const std::string> circuit,
                                     unsigned channels);

/// Replace one parameter of a compiled gate and return the programming
/// words that bring the hardware LUTs in line. Unchanged segments emit
/// nothing; exclusively owned PLUT entries are rewritten in place.
std::vector<codec::ProgrammingWord> delta_update(CompiledProgram &program, const std::string &gate, unsigned channel,
                                                 std::string_view param, const ParamSpec &spec);

// Gate and circuit files (JSON).

struct GateLibrary {
    unsigned channels = 1;
    std::vector<GateDefinition> gates;
};

GateLibrary parse_gate_file(std::string_view json);
std::vector<std::string> parse_circuit_file(std::string_view json);
std::string read_text_file(const std::string &path);

} // namespace awm::compiler
