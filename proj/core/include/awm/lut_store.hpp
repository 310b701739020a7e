#pragma once

// Three-level gate sequencer memory: GLUT (gate ID -> MLUT range), MLUT
// (linear address -> PLUT address) and PLUT (unique spline segments).

#include <awm/bits.hpp>
#include <awm/wordcodec.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace awm::lut {

inline constexpr std::size_t kGlutDepth = std::size_t{1} << codec::kGateIdBits;
inline constexpr std::size_t kMlutDepth = std::size_t{1} << codec::kLutAddressBits;
inline constexpr std::size_t kPlutDepth = std::size_t{1} << codec::kLutAddressBits;
inline constexpr unsigned kMaxChannels = 8;
inline constexpr unsigned kEnginesPerChannel = 8;

inline constexpr std::size_t kTotalPlutEntries = kPlutDepth * kMaxChannels;
inline constexpr std::size_t kPlutStorageBits = kTotalPlutEntries * codec::kSegmentBits;
// 80 URAM blocks of 288 kib; the LUTs may use half of them.
inline constexpr std::size_t kUramBudgetBits = 80ull * 288 * 1024;
static_assert(kTotalPlutEntries == 32768);
static_assert(kPlutStorageBits / 8 == 864 * 1024);
static_assert(kPlutStorageBits <= kUramBudgetBits / 2);

struct GateRange {
    std::uint16_t start = 0;
    std::uint16_t end = 0;

    std::size_t length() const noexcept { return std::size_t(end) - start + 1; }
    friend bool operator==(const GateRange &, const GateRange &) = default;
};

/// Steps through the MLUT addresses [start, end] of one gate.
class ReadoutIterator {
public:
    ReadoutIterator(GateRange range, unsigned channel) : next_(range.start), end_(range.end), channel_(channel) {}

    bool done() const noexcept { return next_ > end_; }
    std::uint16_t next() noexcept { return static_cast<std::uint16_t>(next_++); }
    unsigned channel() const noexcept { return channel_; }

private:
    std::uint32_t next_;
    std::uint32_t end_;
    unsigned channel_;
};

/// LUT contents for one output channel. Reads of entries that were never
/// programmed raise LookupError.
class LutSet {
public:
    LutSet();

    void write_plut(std::uint16_t address, const codec::SplineSegment &seg);
    void write_mlut(std::uint16_t address, std::uint16_t plut_address);
    void write_glut(std::uint16_t gate_id, GateRange range);

    /// Apply one programming word (routing is the caller's business).
    void program(const codec::ProgrammingWord &word);

    const std::optional<codec::SplineSegment> &plut(std::uint16_t address) const;
    const std::optional<std::uint16_t> &mlut(std::uint16_t address) const;
    const std::optional<GateRange> &glut(std::uint16_t gate_id) const;

    GateRange gate_range(std::uint16_t gate_id) const;
    codec::SplineSegment segment_at(std::uint16_t mlut_address) const;
    std::vector<codec::SplineSegment> read_gate(std::uint16_t gate_id) const;

    friend bool operator==(const LutSet &, const LutSet &) = default;

private:
    std::vector<std::optional<codec::SplineSegment>> plut_;
    std::vector<std::optional<std::uint16_t>> mlut_;
    std::vector<std::optional<GateRange>> glut_;
};

/// A segment delivered to one spline-engine FIFO.
struct RoutedSegment {
    unsigned channel = 0;
    unsigned engine = 0;
    codec::SplineSegment segment;

    friend bool operator==(const RoutedSegment &, const RoutedSegment &) = default;
};

/// Engine slot addressed by a segment's metadata; FormatError if the
/// parameter tag is not one of the four defined kinds.
unsigned route_engine(const codec::SegmentMetadata &meta);

/// The LUT front end of every channel: decodes stream words, applies
/// programming words and expands sequencing words into routed segments.
class GateSequencer {
public:
    explicit GateSequencer(unsigned channels = kMaxChannels);

    unsigned channels() const noexcept { return static_cast<unsigned>(luts_.size()); }
    LutSet &channel(unsigned c);
    const LutSet &channel(unsigned c) const;

    void program(const codec::ProgrammingWord &word, unsigned channel);
    std::vector<codec::SplineSegment> read_gate(std::uint16_t gate_id, unsigned channel) const;

    /// Programming words update every channel in their routing mask and emit
    /// nothing. Sequencing words emit, per gate ID and then per channel in the
    /// mask, the gate's segments in MLUT order. Raw words pass through.
    std::vector<RoutedSegment> process_word(const Word256 &block);
    std::vector<RoutedSegment> process_word(const codec::StreamWord &word);

    /// JSON snapshot: per channel, hex-encoded PLUT entries plus MLUT and
    /// GLUT maps keyed by decimal address.
    std::string dump_snapshot() const;
    static GateSequencer load_snapshot(std::string_view json);

    friend bool operator==(const GateSequencer &, const GateSequencer &) = default;

private:
    std::vector<unsigned> channels_in(std::uint8_t routing) const;

    std::vector<LutSet> luts_;
};

} // namespace awm::lut
