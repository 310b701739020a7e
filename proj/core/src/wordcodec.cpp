#include <awm/errors.hpp>
#include <awm/wordcodec.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace awm::codec {

namespace {

// Segment layout.
constexpr unsigned kU0 = 0;
constexpr unsigned kU1 = 40;
constexpr unsigned kU2 = 80;
constexpr unsigned kU3 = 120;
constexpr unsigned kTau = 160;
constexpr unsigned kMeta = 200;

// Sequencing word metadata.
constexpr unsigned kSeqCount = 220;
constexpr unsigned kSeqCountBits = 5;
constexpr unsigned kSeqRouting = 225;

// PLUT write.
constexpr unsigned kPlutAddress = 216;
constexpr unsigned kPlutRouting = 228;

// MLUT write: 10 x (12-bit MLUT address, 12-bit PLUT address).
constexpr unsigned kMlutEntryBits = 24;
constexpr unsigned kMlutCount = 240;
constexpr unsigned kMlutCountBits = 4;
constexpr unsigned kMlutRouting = 244;

// GLUT write: 6 x (11-bit gate ID, 12-bit start, 12-bit end).
constexpr unsigned kGlutEntryBits = 35;
constexpr unsigned kGlutCount = 210;
constexpr unsigned kGlutCountBits = 3;
constexpr unsigned kGlutRouting = 213;

// Raw segment.
constexpr unsigned kRawRouting = 216;

static_assert(kMlutEntryBits * kMaxMlutEntriesPerWord <= kMlutCount);
static_assert(kGlutEntryBits * kMaxGlutEntriesPerWord <= kGlutCount);
static_assert(kMlutRouting + 8 <= kTypeOffset);
static_assert(kGlutRouting + 8 <= kTypeOffset);

void check_unsigned(const char *field, std::uint64_t v, unsigned width)
{
    if (!fits_unsigned(v, width))
        throw RangeError(field, std::to_string(v) + " does not fit in " + std::to_string(width) + " bits");
}

void check_signed(const char *field, std::int64_t v, unsigned width)
{
    if (!fits_signed(v, width))
        throw RangeError(field, std::to_string(v) + " does not fit in " + std::to_string(width) +
                                    "-bit two's complement");
}

void put_type(Word256 &w, WordType t)
{
    set_bits(w, kTypeOffset, kTypeBits, static_cast<std::uint64_t>(t));
}

void put_segment(Word256 &w, const SplineSegment &seg)
{
    validate_segment(seg);
    set_bits(w, kU0, kCoefficientBits, static_cast<std::uint64_t>(seg.u0));
    set_bits(w, kU1, kCoefficientBits, static_cast<std::uint64_t>(seg.u1));
    set_bits(w, kU2, kCoefficientBits, static_cast<std::uint64_t>(seg.u2));
    set_bits(w, kU3, kCoefficientBits, static_cast<std::uint64_t>(seg.u3));
    set_bits(w, kTau, kDurationBits, seg.tau);
    set_bits(w, kMeta, kMetadataBits, encode_metadata(seg.meta));
}

} // namespace

std::uint16_t encode_metadata(const SegmentMetadata &meta)
{
    check_unsigned("metadata.param", meta.param, 3);
    check_unsigned("metadata.tone", meta.tone, 1);
    unsigned bits = meta.param;
    bits |= unsigned(meta.tone) << 3;
    bits |= unsigned(meta.frame_accumulate) << 4;
    bits |= unsigned(meta.frame_final_only) << 5;
    bits |= unsigned(meta.phase_sync) << 6;
    bits |= unsigned(meta.ffwd_enable) << 7;
    return static_cast<std::uint16_t>(bits);
}

SegmentMetadata decode_metadata(std::uint16_t bits)
{
    SegmentMetadata m;
    m.param = bits & 0x7;
    m.tone = (bits >> 3) & 1;
    m.frame_accumulate = (bits >> 4) & 1;
    m.frame_final_only = (bits >> 5) & 1;
    m.phase_sync = (bits >> 6) & 1;
    m.ffwd_enable = (bits >> 7) & 1;
    return m;
}

void validate_segment(const SplineSegment &seg)
{
    if (seg.tau == 0)
        throw RangeError("tau", "segment duration must be at least one cycle");
    check_unsigned("tau", seg.tau, kDurationBits);
    check_signed("u0", seg.u0, kCoefficientBits);
    check_signed("u1", seg.u1, kCoefficientBits);
    check_signed("u2", seg.u2, kCoefficientBits);
    check_signed("u3", seg.u3, kCoefficientBits);
    encode_metadata(seg.meta);
}

Word256 encode_segment(const SplineSegment &seg)
{
    Word256 w{};
    put_segment(w, seg);
    return w;
}

SplineSegment decode_segment(const Word256 &block, unsigned offset)
{
    SplineSegment s;
    s.u0 = sign_extend(get_bits(block, offset + kU0, kCoefficientBits), kCoefficientBits);
    s.u1 = sign_extend(get_bits(block, offset + kU1, kCoefficientBits), kCoefficientBits);
    s.u2 = sign_extend(get_bits(block, offset + kU2, kCoefficientBits), kCoefficientBits);
    s.u3 = sign_extend(get_bits(block, offset + kU3, kCoefficientBits), kCoefficientBits);
    s.tau = get_bits(block, offset + kTau, kDurationBits);
    s.meta = decode_metadata(static_cast<std::uint16_t>(get_bits(block, offset + kMeta, kMetadataBits)));
    return s;
}

GateSequenceWord pack_gate_ids(std::span<const std::uint16_t> ids, std::uint8_t routing)
{
    if (ids.empty())
        throw CapacityError("sequence word", "at least one gate ID is required");
    if (ids.size() > kMaxGatesPerWord)
        throw CapacityError("sequence word", std::to_string(ids.size()) + " gate IDs exceed the capacity of " +
                                                 std::to_string(kMaxGatesPerWord));
    for (auto id : ids)
        check_unsigned("gate_id", id, kGateIdBits);
    return GateSequenceWord{{ids.begin(), ids.end()}, routing};
}

Word256 encode(const GateSequenceWord &w)
{
    // Re-validate: the struct may have been built by hand.
    pack_gate_ids(w.gate_ids, w.routing);
    Word256 out{};
    for (std::size_t i = 0; i < w.gate_ids.size(); ++i)
        set_bits(out, unsigned(i) * kGateIdBits, kGateIdBits, w.gate_ids[i]);
    set_bits(out, kSeqCount, kSeqCountBits, w.gate_ids.size());
    set_bits(out, kSeqRouting, 8, w.routing);
    put_type(out, WordType::Sequence);
    return out;
}

Word256 encode(const PlutWrite &w)
{
    check_unsigned("plut.address", w.address, kLutAddressBits);
    Word256 out{};
    put_segment(out, w.segment);
    set_bits(out, kPlutAddress, kLutAddressBits, w.address);
    set_bits(out, kPlutRouting, 8, w.routing);
    put_type(out, WordType::PlutWrite);
    return out;
}

Word256 encode(const MlutWrite &w)
{
    if (w.entries.empty() || w.entries.size() > kMaxMlutEntriesPerWord)
        throw CapacityError("MLUT word", "must carry 1.." + std::to_string(kMaxMlutEntriesPerWord) +
                                             " entries, got " + std::to_string(w.entries.size()));
    Word256 out{};
    for (std::size_t i = 0; i < w.entries.size(); ++i) {
        const auto &e = w.entries[i];
        check_unsigned("mlut.mlut_address", e.mlut_address, kLutAddressBits);
        check_unsigned("mlut.plut_address", e.plut_address, kLutAddressBits);
        unsigned base = unsigned(i) * kMlutEntryBits;
        set_bits(out, base, kLutAddressBits, e.mlut_address);
        set_bits(out, base + kLutAddressBits, kLutAddressBits, e.plut_address);
    }
    set_bits(out, kMlutCount, kMlutCountBits, w.entries.size());
    set_bits(out, kMlutRouting, 8, w.routing);
    put_type(out, WordType::MlutWrite);
    return out;
}

Word256 encode(const GlutWrite &w)
{
    if (w.entries.empty() || w.entries.size() > kMaxGlutEntriesPerWord)
        throw CapacityError("GLUT word", "must carry 1.." + std::to_string(kMaxGlutEntriesPerWord) +
                                             " entries, got " + std::to_string(w.entries.size()));
    Word256 out{};
    for (std::size_t i = 0; i < w.entries.size(); ++i) {
        const auto &e = w.entries[i];
        check_unsigned("glut.gate_id", e.gate_id, kGateIdBits);
        check_unsigned("glut.start", e.start, kLutAddressBits);
        check_unsigned("glut.end", e.end, kLutAddressBits);
        unsigned base = unsigned(i) * kGlutEntryBits;
        set_bits(out, base, kGateIdBits, e.gate_id);
        set_bits(out, base + kGateIdBits, kLutAddressBits, e.start);
        set_bits(out, base + kGateIdBits + kLutAddressBits, kLutAddressBits, e.end);
    }
    set_bits(out, kGlutCount, kGlutCountBits, w.entries.size());
    set_bits(out, kGlutRouting, 8, w.routing);
    put_type(out, WordType::GlutWrite);
    return out;
}

Word256 encode(const RawSegmentWord &w)
{
    Word256 out{};
    put_segment(out, w.segment);
    set_bits(out, kRawRouting, 8, w.routing);
    put_type(out, WordType::RawSegment);
    return out;
}

Word256 encode(const ProgrammingWord &w)
{
    return std::visit([](const auto &v) { return encode(v); }, w);
}

Word256 encode(const StreamWord &w)
{
    return std::visit([](const auto &v) { return encode(v); }, w);
}

WordType word_type(const Word256 &block)
{
    auto t = get_bits(block, kTypeOffset, kTypeBits);
    if (t < 1 || t > 5)
        throw FormatError("unknown word type tag " + std::to_string(t));
    return static_cast<WordType>(t);
}

StreamWord decode_word(const Word256 &block)
{
    switch (word_type(block)) {
    case WordType::Sequence: {
        auto count = get_bits(block, kSeqCount, kSeqCountBits);
        if (count < 1 || count > kMaxGatesPerWord)
            throw FormatError("sequence word gate count " + std::to_string(count) + " outside 1..20");
        GateSequenceWord w;
        w.routing = static_cast<std::uint8_t>(get_bits(block, kSeqRouting, 8));
        w.gate_ids.reserve(count);
        for (unsigned i = 0; i < count; ++i)
            w.gate_ids.push_back(static_cast<std::uint16_t>(get_bits(block, i * kGateIdBits, kGateIdBits)));
        return w;
    }
    case WordType::PlutWrite: {
        PlutWrite w;
        w.segment = decode_segment(block);
        w.address = static_cast<std::uint16_t>(get_bits(block, kPlutAddress, kLutAddressBits));
        w.routing = static_cast<std::uint8_t>(get_bits(block, kPlutRouting, 8));
        return w;
    }
    case WordType::MlutWrite: {
        auto count = get_bits(block, kMlutCount, kMlutCountBits);
        if (count < 1 || count > kMaxMlutEntriesPerWord)
            throw FormatError("MLUT word entry count " + std::to_string(count) + " outside 1..10");
        MlutWrite w;
        w.routing = static_cast<std::uint8_t>(get_bits(block, kMlutRouting, 8));
        for (unsigned i = 0; i < count; ++i) {
            unsigned base = i * kMlutEntryBits;
            w.entries.push_back({static_cast<std::uint16_t>(get_bits(block, base, kLutAddressBits)),
                                 static_cast<std::uint16_t>(get_bits(block, base + kLutAddressBits, kLutAddressBits))});
        }
        return w;
    }
    case WordType::GlutWrite: {
        auto count = get_bits(block, kGlutCount, kGlutCountBits);
        if (count < 1 || count > kMaxGlutEntriesPerWord)
            throw FormatError("GLUT word entry count " + std::to_string(count) + " outside 1..6");
        GlutWrite w;
        w.routing = static_cast<std::uint8_t>(get_bits(block, kGlutRouting, 8));
        for (unsigned i = 0; i < count; ++i) {
            unsigned base = i * kGlutEntryBits;
            w.entries.push_back(
                {static_cast<std::uint16_t>(get_bits(block, base, kGateIdBits)),
                 static_cast<std::uint16_t>(get_bits(block, base + kGateIdBits, kLutAddressBits)),
                 static_cast<std::uint16_t>(get_bits(block, base + kGateIdBits + kLutAddressBits, kLutAddressBits))});
        }
        return w;
    }
    case WordType::RawSegment: {
        RawSegmentWord w;
        w.segment = decode_segment(block);
        w.routing = static_cast<std::uint8_t>(get_bits(block, kRawRouting, 8));
        return w;
    }
    }
    throw FormatError("unreachable word type");
}

bool is_programming(const StreamWord &w)
{
    return std::holds_alternative<PlutWrite>(w) || std::holds_alternative<MlutWrite>(w) ||
           std::holds_alternative<GlutWrite>(w);
}

namespace {

std::string routing_str(std::uint8_t r)
{
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0x%02x", r);
    return buf;
}

std::string segment_str(const SplineSegment &s)
{
    std::ostringstream os;
    os << "{engine=" << s.meta.engine() << " tau=" << s.tau << " u3=" << s.u3 << " u2=" << s.u2
       << " u1=" << s.u1 << " u0=" << s.u0;
    if (s.meta.frame_accumulate)
        os << (s.meta.frame_final_only ? " frame=final" : " frame=sum");
    if (s.meta.phase_sync)
        os << " sync";
    if (s.meta.ffwd_enable)
        os << " ffwd";
    os << "}";
    return os.str();
}

struct Describer {
    std::string operator()(const GateSequenceWord &w) const
    {
        std::string s = "SEQ routing=" + routing_str(w.routing) + " ids=[";
        for (std::size_t i = 0; i < w.gate_ids.size(); ++i)
            s += (i ? "," : "") + std::to_string(w.gate_ids[i]);
        return s + "]";
    }
    std::string operator()(const PlutWrite &w) const
    {
        return "PLUT routing=" + routing_str(w.routing) + " addr=" + std::to_string(w.address) + " " +
               segment_str(w.segment);
    }
    std::string operator()(const MlutWrite &w) const
    {
        std::string s = "MLUT routing=" + routing_str(w.routing);
        for (const auto &e : w.entries)
            s += " " + std::to_string(e.mlut_address) + "->" + std::to_string(e.plut_address);
        return s;
    }
    std::string operator()(const GlutWrite &w) const
    {
        std::string s = "GLUT routing=" + routing_str(w.routing);
        for (const auto &e : w.entries)
            s += " " + std::to_string(e.gate_id) + ":[" + std::to_string(e.start) + "," + std::to_string(e.end) + "]";
        return s;
    }
    std::string operator()(const RawSegmentWord &w) const
    {
        return "RAW routing=" + routing_str(w.routing) + " " + segment_str(w.segment);
    }
};

} // namespace

std::string describe(const StreamWord &w)
{
    return std::visit(Describer{}, w);
}

std::string to_hex(const Word256 &w)
{
    // Most significant byte first, so bit 255 is the leftmost digit.
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        s.push_back(digits[*it >> 4]);
        s.push_back(digits[*it & 0xf]);
    }
    return s;
}

std::vector<Word256> read_stream(std::istream &in)
{
    std::vector<Word256> words;
    Word256 w;
    while (true) {
        in.read(reinterpret_cast<char *>(w.data()), w.size());
        auto got = in.gcount();
        if (got == 0)
            break;
        if (got != static_cast<std::streamsize>(w.size()))
            throw FormatError("word stream length is not a multiple of 32 bytes (trailing " + std::to_string(got) +
                              " bytes)");
        words.push_back(w);
    }
    return words;
}

std::vector<Word256> read_stream(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open word stream " + path.string());
    return read_stream(in);
}

void write_stream(std::ostream &out, std::span<const Word256> words)
{
    for (const auto &w : words)
        out.write(reinterpret_cast<const char *>(w.data()), w.size());
}

void write_stream(const std::filesystem::path &path, std::span<const Word256> words)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ConfigError("cannot write word stream " + path.string());
    write_stream(out, words);
}

} // namespace awm::codec
