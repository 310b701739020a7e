#pragma once

// Bit-exact formats of the 256-bit words streamed into the gate sequencer.
//
// Every word carries a 3-bit type tag in bits [253, 256). The remaining bits
// depend on the type; see docs/word_format.md for the full bit map.

#include <awm/bits.hpp>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace awm::codec {

inline constexpr unsigned kCoefficientBits = 40;
inline constexpr unsigned kDurationBits = 40;
inline constexpr unsigned kMetadataBits = 16;
inline constexpr unsigned kSegmentBits = 4 * kCoefficientBits + kDurationBits + kMetadataBits;
static_assert(kSegmentBits == 216);

inline constexpr unsigned kGateIdBits = 11;
inline constexpr unsigned kMaxGatesPerWord = 20;
inline constexpr unsigned kSequenceMetadataBits = kWordBits - kGateIdBits * kMaxGatesPerWord;
static_assert(kSequenceMetadataBits == 36);

inline constexpr unsigned kLutAddressBits = 12;
inline constexpr unsigned kMaxMlutEntriesPerWord = 10;
inline constexpr unsigned kMaxGlutEntriesPerWord = 6;

inline constexpr unsigned kTypeOffset = 253;
inline constexpr unsigned kTypeBits = 3;

/// Waveform parameter carried by a segment. Together with the tone bit this
/// selects one of the eight spline engines of a channel.
enum class ParamKind : std::uint8_t { Frequency = 0, Amplitude = 1, Phase = 2, Frame = 3 };

/// The 16-bit M field of a spline segment.
///
/// bits [0,3) parameter kind, [3] tone, [4] frame accumulate, [5] frame
/// final-value-only, [6] phase sync on segment start, [7] feedforward
/// enable, [8,16) reserved (zero on encode, ignored on decode).
struct SegmentMetadata {
    std::uint8_t param = 0;
    std::uint8_t tone = 0;
    bool frame_accumulate = false;
    bool frame_final_only = false;
    bool phase_sync = false;
    bool ffwd_enable = false;

    /// Engine slot within a bank: freq0, amp0, phase0, frame0, freq1, ...
    unsigned engine() const noexcept { return tone * 4u + param; }

    friend auto operator<=>(const SegmentMetadata &, const SegmentMetadata &) = default;
};

/// One cubic spline segment {M, tau, U3, U2, U1, U0}. The U_n are integer
/// forward differences replayed by a spline engine over `tau` cycles.
struct SplineSegment {
    SegmentMetadata meta;
    std::uint64_t tau = 1;
    std::int64_t u3 = 0;
    std::int64_t u2 = 0;
    std::int64_t u1 = 0;
    std::int64_t u0 = 0;

    friend auto operator<=>(const SplineSegment &, const SplineSegment &) = default;
};

enum class WordType : std::uint8_t {
    Sequence = 1,
    PlutWrite = 2,
    MlutWrite = 3,
    GlutWrite = 4,
    RawSegment = 5,
};

/// Up to 20 packed 11-bit gate identifiers read out on every channel in
/// `routing`.
struct GateSequenceWord {
    std::vector<std::uint16_t> gate_ids;
    std::uint8_t routing = 1;

    friend bool operator==(const GateSequenceWord &, const GateSequenceWord &) = default;
};

struct PlutWrite {
    std::uint8_t routing = 1;
    std::uint16_t address = 0;
    SplineSegment segment;

    friend bool operator==(const PlutWrite &, const PlutWrite &) = default;
};

struct MlutEntry {
    std::uint16_t mlut_address = 0;
    std::uint16_t plut_address = 0;

    friend bool operator==(const MlutEntry &, const MlutEntry &) = default;
};

struct MlutWrite {
    std::uint8_t routing = 1;
    std::vector<MlutEntry> entries;

    friend bool operator==(const MlutWrite &, const MlutWrite &) = default;
};

struct GlutEntry {
    std::uint16_t gate_id = 0;
    std::uint16_t start = 0;
    std::uint16_t end = 0;

    friend bool operator==(const GlutEntry &, const GlutEntry &) = default;
};

struct GlutWrite {
    std::uint8_t routing = 1;
    std::vector<GlutEntry> entries;

    friend bool operator==(const GlutWrite &, const GlutWrite &) = default;
};

/// A segment streamed straight to the spline engines, bypassing the LUTs.
struct RawSegmentWord {
    std::uint8_t routing = 1;
    SplineSegment segment;

    friend bool operator==(const RawSegmentWord &, const RawSegmentWord &) = default;
};

using ProgrammingWord = std::variant<PlutWrite, MlutWrite, GlutWrite>;
using StreamWord = std::variant<GateSequenceWord, PlutWrite, MlutWrite, GlutWrite, RawSegmentWord>;

/// Encode into bits [0, 216) of a zeroed carrier.
Word256 encode_segment(const SplineSegment &seg);
/// Decode the 216-bit segment starting at `offset`; bits outside it are ignored.
SplineSegment decode_segment(const Word256 &block, unsigned offset = 0);
void validate_segment(const SplineSegment &seg);

std::uint16_t encode_metadata(const SegmentMetadata &meta);
SegmentMetadata decode_metadata(std::uint16_t bits);

GateSequenceWord pack_gate_ids(std::span<const std::uint16_t> ids, std::uint8_t routing);

Word256 encode(const GateSequenceWord &w);
Word256 encode(const PlutWrite &w);
Word256 encode(const MlutWrite &w);
Word256 encode(const GlutWrite &w);
Word256 encode(const RawSegmentWord &w);
Word256 encode(const ProgrammingWord &w);
Word256 encode(const StreamWord &w);

/// Dispatch on the type tag. Throws FormatError for unknown tags or counts
/// outside the variant's capacity.
StreamWord decode_word(const Word256 &block);
WordType word_type(const Word256 &block);

bool is_programming(const StreamWord &w);
std::string describe(const StreamWord &w);
std::string to_hex(const Word256 &w);

// Word-stream files: a plain concatenation of 32-byte records.
std::vector<Word256> read_stream(std::istream &in);
std::vector<Word256> read_stream(const std::filesystem::path &path);
void write_stream(std::ostream &out, std::span<const Word256> words);
void write_stream(const std::filesystem::path &path, std::span<const Word256> words);

} // namespace awm::codec
