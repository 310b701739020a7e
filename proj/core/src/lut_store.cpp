#include <awm/errors.hpp>
#include <awm/lut_store.hpp>

#include <json.hpp>

#include <algorithm>

namespace awm::lut {

using codec::SplineSegment;

namespace {

void check_address(const char *table, std::size_t addr, std::size_t depth)
{
    if (addr >= depth)
        throw RangeError(table, "address " + std::to_string(addr) + " outside depth " + std::to_string(depth));
}

} // namespace

LutSet::LutSet() : plut_(kPlutDepth), mlut_(kMlutDepth), glut_(kGlutDepth) {}

void LutSet::write_plut(std::uint16_t address, const SplineSegment &seg)
{
    check_address("PLUT", address, kPlutDepth);
    codec::validate_segment(seg);
    plut_[address] = seg;
}

void LutSet::write_mlut(std::uint16_t address, std::uint16_t plut_address)
{
    check_address("MLUT", address, kMlutDepth);
    check_address("PLUT", plut_address, kPlutDepth);
    mlut_[address] = plut_address;
}

void LutSet::write_glut(std::uint16_t gate_id, GateRange range)
{
    check_address("GLUT", gate_id, kGlutDepth);
    check_address("MLUT", range.start, kMlutDepth);
    check_address("MLUT", range.end, kMlutDepth);
    if (range.start > range.end)
        throw RangeError("GLUT", "gate " + std::to_string(gate_id) + " has start " + std::to_string(range.start) +
                                     " after end " + std::to_string(range.end));
    glut_[gate_id] = range;
}

void LutSet::program(const codec::ProgrammingWord &word)
{
    if (auto p = std::get_if<codec::PlutWrite>(&word)) {
        write_plut(p->address, p->segment);
    }
    else if (auto m = std::get_if<codec::MlutWrite>(&word)) {
        for (const auto &e : m->entries)
            write_mlut(e.mlut_address, e.plut_address);
    }
    else {
        for (const auto &e : std::get<codec::GlutWrite>(word).entries)
            write_glut(e.gate_id, {e.start, e.end});
    }
}

const std::optional<SplineSegment> &LutSet::plut(std::uint16_t address) const
{
    check_address("PLUT", address, kPlutDepth);
    return plut_[address];
}

const std::optional<std::uint16_t> &LutSet::mlut(std::uint16_t address) const
{
    check_address("MLUT", address, kMlutDepth);
    return mlut_[address];
}

const std::optional<GateRange> &LutSet::glut(std::uint16_t gate_id) const
{
    check_address("GLUT", gate_id, kGlutDepth);
    return glut_[gate_id];
}

GateRange LutSet::gate_range(std::uint16_t gate_id) const
{
    const auto &g = glut(gate_id);
    if (!g)
        throw LookupError("gate ID " + std::to_string(gate_id) + " is not programmed");
    return *g;
}

SplineSegment LutSet::segment_at(std::uint16_t mlut_address) const
{
    const auto &m = mlut(mlut_address);
    if (!m)
        throw LookupError("MLUT address " + std::to_string(mlut_address) + " is not programmed");
    const auto &p = plut(*m);
    if (!p)
        throw LookupError("PLUT address " + std::to_string(*m) + " (via MLUT " + std::to_string(mlut_address) +
                          ") is not programmed");
    return *p;
}

std::vector<SplineSegment> LutSet::read_gate(std::uint16_t gate_id) const
{
    auto range = gate_range(gate_id);
    std::vector<SplineSegment> out;
    out.reserve(range.length());
    for (ReadoutIterator it(range, 0); !it.done();)
        out.push_back(segment_at(it.next()));
    return out;
}

unsigned route_engine(const codec::SegmentMetadata &meta)
{
    if (meta.param > static_cast<unsigned>(codec::ParamKind::Frame))
        throw FormatError("segment metadata names undefined parameter tag " + std::to_string(meta.param));
    return meta.engine();
}

GateSequencer::GateSequencer(unsigned channels) : luts_(channels)
{
    if (channels == 0 || channels > kMaxChannels)
        throw ConfigError("gate sequencer supports 1.." + std::to_string(kMaxChannels) + " channels");
}

LutSet &GateSequencer::channel(unsigned c)
{
    check_address("channel", c, luts_.size());
    return luts_[c];
}

const LutSet &GateSequencer::channel(unsigned c) const
{
    check_address("channel", c, luts_.size());
    return luts_[c];
}

void GateSequencer::program(const codec::ProgrammingWord &word, unsigned channel)
{
    this->channel(channel).program(word);
}

std::vector<SplineSegment> GateSequencer::read_gate(std::uint16_t gate_id, unsigned channel) const
{
    return this->channel(channel).read_gate(gate_id);
}

std::vector<unsigned> GateSequencer::channels_in(std::uint8_t routing) const
{
    std::vector<unsigned> out;
    for (unsigned c = 0; c < 8; ++c) {
        if (!((routing >> c) & 1))
            continue;
        if (c >= luts_.size())
            throw RangeError("routing", "mask selects channel " + std::to_string(c) + " but only " +
                                            std::to_string(luts_.size()) + " channels exist");
        out.push_back(c);
    }
    return out;
}

std::vector<RoutedSegment> GateSequencer::process_word(const Word256 &block)
{
    return process_word(codec::decode_word(block));
}

std::vector<RoutedSegment> GateSequencer::process_word(const codec::StreamWord &word)
{
    std::vector<RoutedSegment> out;
    if (auto seq = std::get_if<codec::GateSequenceWord>(&word)) {
        auto chans = channels_in(seq->routing);
        for (auto id : seq->gate_ids) {
            for (auto c : chans) {
                const auto &lut = luts_[c];
                for (ReadoutIterator it(lut.gate_range(id), c); !it.done();) {
                    auto seg = lut.segment_at(it.next());
                    out.push_back({c, route_engine(seg.meta), seg});
                }
            }
        }
    }
    else if (auto raw = std::get_if<codec::RawSegmentWord>(&word)) {
        auto engine = route_engine(raw->segment.meta);
        for (auto c : channels_in(raw->routing))
            out.push_back({c, engine, raw->segment});
    }
    else {
        codec::ProgrammingWord pw;
        std::uint8_t routing = 0;
        if (auto p = std::get_if<codec::PlutWrite>(&word)) {
            pw = *p;
            routing = p->routing;
        }
        else if (auto m = std::get_if<codec::MlutWrite>(&word)) {
            pw = *m;
            routing = m->routing;
        }
        else {
            const auto &g = std::get<codec::GlutWrite>(word);
            pw = g;
            routing = g.routing;
        }
        for (auto c : channels_in(routing))
            luts_[c].program(pw);
    }
    return out;
}

namespace {

std::string segment_hex(const SplineSegment &seg)
{
    // 27 bytes, most significant first.
    auto block = codec::encode_segment(seg);
    auto hex = codec::to_hex(block);
    return hex.substr(hex.size() - 54);
}

SplineSegment segment_from_hex(const std::string &hex)
{
    if (hex.size() != 54)
        throw FormatError("PLUT snapshot entry must be 54 hex digits, got " + std::to_string(hex.size()));
    Word256 block{};
    for (std::size_t i = 0; i < 27; ++i) {
        auto byte = std::stoul(hex.substr(hex.size() - 2 * (i + 1), 2), nullptr, 16);
        block[i] = static_cast<std::uint8_t>(byte);
    }
    return codec::decode_segment(block);
}

std::uint16_t parse_address(const std::string &key)
{
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
        v = std::stoul(key, &pos, 10);
    }
    catch (const std::exception &) {
        throw FormatError("snapshot address '" + key + "' is not a decimal integer");
    }
    if (pos != key.size() || v > 0xffff)
        throw FormatError("snapshot address '" + key + "' is invalid");
    return static_cast<std::uint16_t>(v);
}

} // namespace

std::string GateSequencer::dump_snapshot() const
{
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["format"] = "awm-lut-snapshot";
    doc["version"] = 1;
    ordered_json chans = ordered_json::array();
    for (unsigned c = 0; c < luts_.size(); ++c) {
        const auto &lut = luts_[c];
        ordered_json plut = ordered_json::object(), mlut = ordered_json::object(), glut = ordered_json::object();
        for (std::size_t a = 0; a < kPlutDepth; ++a)
            if (auto &p = lut.plut(static_cast<std::uint16_t>(a)))
                plut[std::to_string(a)] = segment_hex(*p);
        for (std::size_t a = 0; a < kMlutDepth; ++a)
            if (auto &m = lut.mlut(static_cast<std::uint16_t>(a)))
                mlut[std::to_string(a)] = *m;
        for (std::size_t g = 0; g < kGlutDepth; ++g)
            if (auto &r = lut.glut(static_cast<std::uint16_t>(g)))
                glut[std::to_string(g)] = {r->start, r->end};
        chans.push_back({{"channel", c}, {"plut", plut}, {"mlut", mlut}, {"glut", glut}});
    }
    doc["channels"] = chans;
    return doc.dump(2);
}

GateSequencer GateSequencer::load_snapshot(std::string_view json)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    }
    catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("LUT snapshot is not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("format", "") != "awm-lut-snapshot")
            throw FormatError("not an awm LUT snapshot");
        const auto &chans = doc.at("channels");
        GateSequencer seq(static_cast<unsigned>(chans.size()));
        for (const auto &ch : chans) {
            auto &lut = seq.channel(ch.at("channel").get<unsigned>());
            for (const auto &[k, v] : ch.at("plut").items())
                lut.write_plut(parse_address(k), segment_from_hex(v.get<std::string>()));
            for (const auto &[k, v] : ch.at("mlut").items())
                lut.write_mlut(parse_address(k), v.get<std::uint16_t>());
            for (const auto &[k, v] : ch.at("glut").items())
                lut.write_glut(parse_address(k), {v.at(0).get<std::uint16_t>(), v.at(1).get<std::uint16_t>()});
        }
        return seq;
    }
    catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("malformed LUT snapshot: ") + e.what());
    }
}

} // namespace awm::lut
