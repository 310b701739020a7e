#include <awm/compiler.hpp>
#include <awm/errors.hpp>

#include <json.hpp>

#include <cmath>
#include <set>

namespace awm::compiler {

using codec::SegmentMetadata;
using codec::SplineSegment;

unsigned param_index(std::string_view name)
{
    for (unsigned i = 0; i < kParams; ++i)
        if (kParamNames[i] == name)
            return i;
    throw LookupError("unknown parameter '" + std::string(name) + "'");
}

const ChannelSpec &GateDefinition::channel(unsigned c) const
{
    static const ChannelSpec silent{};
    auto it = channels.find(c);
    return it == channels.end() ? silent : it->second;
}

void GateDefinition::validate() const
{
    if (duration < 1)
        throw RangeError("gate " + name, "duration must be at least one cycle");
    for (const auto &[c, spec] : channels) {
        if (c >= lut::kMaxChannels)
            throw RangeError("gate " + name, "channel " + std::to_string(c) + " outside 0..7");
        for (unsigned p = 0; p < kParams; ++p) {
            const auto &knots = spec.params[p].knots;
            if (knots.empty())
                continue;
            std::string where = "gate " + name + " channel " + std::to_string(c) + " " + std::string(kParamNames[p]);
            if (knots.size() < 2)
                throw RangeError(where, "a spline needs at least two knots");
            if (knots.front().time != 0)
                throw RangeError(where, "first knot must be at time 0");
            if (knots.back().time != duration)
                throw RangeError(where, "last knot must be at the gate duration " + std::to_string(duration));
            for (std::size_t i = 1; i < knots.size(); ++i)
                if (knots[i].time <= knots[i - 1].time)
                    throw RangeError(where, "knot times must be strictly increasing");
            for (const auto &k : knots)
                if (!std::isfinite(k.value))
                    throw RangeError(where, "knot values must be finite");
        }
    }
}

namespace {

std::int64_t round_coefficient(double v, const char *field, std::uint64_t t0, std::uint64_t t1)
{
    constexpr double lim = 549755813888.0; // 2^39
    double r = std::nearbyint(v);
    if (!(r >= -lim && r < lim))
        throw RangeError(field, "coefficient overflows 40 bits on knot interval [" + std::to_string(t0) + ", " +
                                    std::to_string(t1) + ")");
    return static_cast<std::int64_t>(r);
}

} // namespace

std::vector<SplineSegment> fit_segments(std::span<const Knot> knots, std::uint64_t duration, SegmentMetadata meta)
{
    if (knots.size() < 2)
        throw RangeError("knots", "a spline needs at least two knots");
    if (knots.front().time != 0 || knots.back().time != duration)
        throw RangeError("knots", "knots must start at 0 and end at the duration");
    const std::size_t n = knots.size();
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (knots[i + 1].time <= knots[i].time)
            throw RangeError("knots", "knot times must be strictly increasing");
        h[i] = static_cast<double>(knots[i + 1].time - knots[i].time);
    }

    // Second derivatives with natural ends (M_0 = M_{n-1} = 0), solved by the
    // Thomas algorithm on the interior rows.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        std::size_t k = n - 2;
        std::vector<double> diag(k), upper(k), rhs(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::size_t i = j + 1;
            diag[j] = 2.0 * (h[i - 1] + h[i]);
            upper[j] = h[i];
            rhs[j] = 6.0 * ((knots[i + 1].value - knots[i].value) / h[i] -
                            (knots[i].value - knots[i - 1].value) / h[i - 1]);
        }
        for (std::size_t j = 1; j < k; ++j) {
            double w = h[j] / diag[j - 1];
            diag[j] -= w * upper[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for (std::size_t j = k - 1; j-- > 0;)
            m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
    }

    std::vector<SplineSegment> out;
    out.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double c0 = knots[i].value;
        double c1 = (knots[i + 1].value - knots[i].value) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
        double c2 = m[i] / 2.0;
        double c3 = (m[i + 1] - m[i]) / (6.0 * h[i]);
        auto t0 = knots[i].time, t1 = knots[i + 1].time;
        SplineSegment s;
        s.meta = meta;
        s.tau = t1 - t0;
        s.u0 = round_coefficient(c0, "u0", t0, t1);
        s.u1 = round_coefficient(c1 + c2 + c3, "u1", t0, t1);
        s.u2 = round_coefficient(2.0 * c2 + 6.0 * c3, "u2", t0, t1);
        s.u3 = round_coefficient(6.0 * c3, "u3", t0, t1);
        codec::validate_segment(s);
        out.push_back(s);
    }
    return out;
}

std::vector<SplineSegment> param_segments(const GateDefinition &gate, unsigned channel, unsigned param)
{
    const auto &spec = gate.channel(channel);
    const auto &ps = spec.params.at(param);
    SegmentMetadata meta;
    meta.param = static_cast<std::uint8_t>(param % 4);
    meta.tone = static_cast<std::uint8_t>(param / 4);
    const auto &tone = spec.tones[meta.tone];
    auto kind = static_cast<codec::ParamKind>(meta.param);
    if (kind == codec::ParamKind::Frequency)
        meta.ffwd_enable = tone.ffwd;
    if (kind == codec::ParamKind::Frame && tone.frame == FrameMode::Sum)
        meta.frame_accumulate = true;

    std::vector<SplineSegment> segs;
    if (ps.is_constant()) {
        SplineSegment s;
        s.meta = meta;
        s.tau = gate.duration;
        s.u0 = ps.constant;
        codec::validate_segment(s);
        segs.push_back(s);
    }
    else {
        segs = fit_segments(ps.knots, gate.duration, meta);
    }
    if (kind == codec::ParamKind::Frequency && tone.sync)
        segs.front().meta.phase_sync = true;
    if (kind == codec::ParamKind::Frame && tone.frame == FrameMode::Final) {
        segs.back().meta.frame_accumulate = true;
        segs.back().meta.frame_final_only = true;
    }
    return segs;
}

std::vector<Word256> CompiledProgram::stream() const
{
    std::vector<Word256> out = programming;
    out.insert(out.end(), sequencing.begin(), sequencing.end());
    return out;
}

namespace {

std::string segment_key(const SplineSegment &s)
{
    auto block = codec::encode_segment(s);
    return std::string(reinterpret_cast<const char *>(block.data()), codec::kSegmentBits / 8);
}

std::uint8_t all_channels(unsigned channels)
{
    return static_cast<std::uint8_t>((1u << channels) - 1);
}

std::map<std::string, const GateDefinition *> index_gates(std::span<const GateDefinition> gates)
{
    std::map<std::string, const GateDefinition *> by_name;
    for (const auto &g : gates) {
        g.validate();
        if (!by_name.emplace(g.name, &g).second)
            throw ConfigError("gate '" + g.name + "' is defined twice");
    }
    return by_name;
}

void check_channels(unsigned channels)
{
    if (channels < 1 || channels > lut::kMaxChannels)
        throw ConfigError("channel count must be 1..8");
}

const GateDefinition &lookup(const std::map<std::string, const GateDefinition *> &by_name, const std::string &name)
{
    auto it = by_name.find(name);
    if (it == by_name.end())
        throw LookupError("circuit references undefined gate '" + name + "'");
    return *it->second;
}

std::uint16_t place_segment(ChannelTables &t, const SplineSegment &seg)
{
    auto key = segment_key(seg);
    if (auto it = t.dedup.find(key); it != t.dedup.end())
        return it->second;
    if (t.plut.size() >= lut::kPlutDepth)
        throw CapacityError("PLUT", "more than " + std::to_string(lut::kPlutDepth) +
                                        " unique segments on one channel; reprogram mid-circuit");
    auto addr = static_cast<std::uint16_t>(t.plut.size());
    t.plut.push_back(seg);
    t.plut_refs.push_back(0);
    t.dedup.emplace(std::move(key), addr);
    return addr;
}

std::uint16_t append_mlut(ChannelTables &t, std::uint16_t plut_addr)
{
    if (t.mlut.size() >= lut::kMlutDepth)
        throw CapacityError("MLUT", "more than " + std::to_string(lut::kMlutDepth) +
                                        " segment references on one channel; reprogram mid-circuit");
    auto addr = static_cast<std::uint16_t>(t.mlut.size());
    t.mlut.push_back(plut_addr);
    ++t.plut_refs[plut_addr];
    return addr;
}

// Merge identical writes across channels into one routing mask, keeping
// first-appearance order.
template <typename Entry, typename Key>
struct MaskedWrites {
    std::vector<std::pair<Entry, std::uint8_t>> items;
    std::map<Key, std::size_t> index;

    void add(const Key &key, const Entry &e, unsigned channel)
    {
        auto [it, fresh] = index.emplace(key, items.size());
        if (fresh)
            items.emplace_back(e, 0);
        items[it->second].second |= static_cast<std::uint8_t>(1u << channel);
    }
};

template <typename Word, typename Entry>
void pack_grouped(const std::vector<std::pair<Entry, std::uint8_t>> &items, std::size_t per_word,
                  std::vector<Word256> &out, std::size_t &count)
{
    std::vector<std::uint8_t> masks;
    for (const auto &[e, m] : items)
        if (std::find(masks.begin(), masks.end(), m) == masks.end())
            masks.push_back(m);
    for (auto mask : masks) {
        Word w;
        w.routing = mask;
        for (const auto &[e, m] : items) {
            if (m != mask)
                continue;
            w.entries.push_back(e);
            if (w.entries.size() == per_word) {
                out.push_back(codec::encode(w));
                ++count;
                w.entries.clear();
            }
        }
        if (!w.entries.empty()) {
            out.push_back(codec::encode(w));
            ++count;
        }
    }
}

template <typename Word, typename Entry>
void pack_single(unsigned channel, const std::vector<Entry> &entries, std::size_t per_word,
                 std::vector<codec::ProgrammingWord> &out)
{
    Word w;
    w.routing = static_cast<std::uint8_t>(1u << channel);
    for (const auto &e : entries) {
        w.entries.push_back(e);
        if (w.entries.size() == per_word) {
            out.push_back(w);
            w.entries.clear();
        }
    }
    if (!w.entries.empty())
        out.push_back(w);
}

} // namespace

CompiledProgram compile(std::span<const GateDefinition> gates, std::span<const std::string> circuit, unsigned channels)
{
    check_channels(channels);
    auto by_name = index_gates(gates);

    CompiledProgram prog;
    prog.channels = channels;
    prog.tables.resize(channels);
    for (const auto &name : circuit) {
        auto [it, fresh] = prog.gate_ids.emplace(name, static_cast<std::uint16_t>(prog.gates.size()));
        if (fresh) {
            if (prog.gates.size() >= lut::kGlutDepth)
                throw CapacityError("GLUT", "more than " + std::to_string(lut::kGlutDepth) + " distinct gates");
            prog.gates.push_back(lookup(by_name, name));
        }
        prog.circuit.push_back(it->second);
    }

    prog.layout.resize(prog.gates.size(), GateLayout(channels));
    for (std::uint16_t id = 0; id < prog.gates.size(); ++id) {
        const auto &gate = prog.gates[id];
        for (unsigned c = 0; c < channels; ++c) {
            auto &t = prog.tables[c];
            auto start = static_cast<std::uint16_t>(t.mlut.size());
            for (unsigned p = 0; p < kParams; ++p)
                for (const auto &seg : param_segments(gate, c, p))
                    prog.layout[id][c][p].push_back(append_mlut(t, place_segment(t, seg)));
            t.glut[id] = {start, static_cast<std::uint16_t>(t.mlut.size() - 1)};
        }
    }

    MaskedWrites<codec::PlutWrite, std::pair<std::uint16_t, std::string>> plut;
    MaskedWrites<codec::MlutEntry, std::pair<std::uint16_t, std::uint16_t>> mlut;
    MaskedWrites<codec::GlutEntry, std::tuple<std::uint16_t, std::uint16_t, std::uint16_t>> glut;
    for (unsigned c = 0; c < channels; ++c) {
        const auto &t = prog.tables[c];
        for (std::size_t a = 0; a < t.plut.size(); ++a) {
            codec::PlutWrite w;
            w.address = static_cast<std::uint16_t>(a);
            w.segment = t.plut[a];
            plut.add({w.address, segment_key(w.segment)}, w, c);
        }
        for (std::size_t a = 0; a < t.mlut.size(); ++a) {
            codec::MlutEntry e{static_cast<std::uint16_t>(a), t.mlut[a]};
            mlut.add({e.mlut_address, e.plut_address}, e, c);
        }
        for (const auto &[id, r] : t.glut) {
            codec::GlutEntry e{id, r.start, r.end};
            glut.add({id, r.start, r.end}, e, c);
        }
    }
    for (auto &[w, mask] : plut.items) {
        w.routing = mask;
        prog.programming.push_back(codec::encode(w));
        ++prog.counts.plut;
    }
    pack_grouped<codec::MlutWrite>(mlut.items, codec::kMaxMlutEntriesPerWord, prog.programming, prog.counts.mlut);
    pack_grouped<codec::GlutWrite>(glut.items, codec::kMaxGlutEntriesPerWord, prog.programming, prog.counts.glut);

    for (std::size_t i = 0; i < prog.circuit.size(); i += codec::kMaxGatesPerWord) {
        auto n = std::min<std::size_t>(codec::kMaxGatesPerWord, prog.circuit.size() - i);
        auto w = codec::pack_gate_ids(std::span(prog.circuit).subspan(i, n), all_channels(channels));
        prog.sequencing.push_back(codec::encode(w));
        ++prog.counts.sequence;
    }
    return prog;
}

std::vector<Word256> emit_raw_stream(std::span<const GateDefinition> gates, std::span<const std::string> circuit,
                                     unsigned channels)
{
    check_channels(channels);
    auto by_name = index_gates(gates);
    std::vector<Word256> out;
    for (const auto &name : circuit) {
        const auto &gate = lookup(by_name, name);
        for (unsigned c = 0; c < channels; ++c)
            for (unsigned p = 0; p < kParams; ++p)
                for (const auto &seg : param_segments(gate, c, p))
                    out.push_back(codec::encode(codec::RawSegmentWord{static_cast<std::uint8_t>(1u << c), seg}));
    }
    return out;
}

std::vector<codec::ProgrammingWord> delta_update(CompiledProgram &program, const std::string &gate, unsigned channel,
                                                 std::string_view param, const ParamSpec &spec)
{
    auto idit = program.gate_ids.find(gate);
    if (idit == program.gate_ids.end())
        throw LookupError("gate '" + gate + "' is not part of the compiled program");
    auto p = param_index(param);
    if (channel >= program.channels)
        throw RangeError("channel", std::to_string(channel) + " outside the program's " +
                                        std::to_string(program.channels) + " channels");
    auto id = idit->second;
    auto &def = program.gates[id];
    auto updated = def;
    updated.channels[channel].params[p] = spec;
    updated.validate();
    auto fresh = param_segments(updated, channel, p);

    auto &t = program.tables[channel];
    auto &layout = program.layout[id][channel];
    const auto &old_addrs = layout[p];

    std::vector<codec::ProgrammingWord> words;
    std::vector<codec::MlutEntry> mlut_writes;
    auto emit_plut = [&](std::uint16_t addr) {
        codec::PlutWrite w;
        w.routing = static_cast<std::uint8_t>(1u << channel);
        w.address = addr;
        w.segment = t.plut[addr];
        words.push_back(w);
    };
    // New segment placed at a new or deduplicated PLUT address.
    auto place = [&](const SplineSegment &seg) {
        auto before = t.plut.size();
        auto addr = place_segment(t, seg);
        if (t.plut.size() != before)
            emit_plut(addr);
        return addr;
    };

    if (fresh.size() == old_addrs.size()) {
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            auto m = old_addrs[i];
            auto a = t.mlut[m];
            if (t.plut[a] == fresh[i])
                continue;
            if (t.plut_refs[a] == 1) {
                auto old_key = segment_key(t.plut[a]);
                if (auto it = t.dedup.find(old_key); it != t.dedup.end() && it->second == a)
                    t.dedup.erase(it);
                t.plut[a] = fresh[i];
                t.dedup.emplace(segment_key(fresh[i]), a);
                emit_plut(a);
            }
            else {
                auto b = place(fresh[i]);
                --t.plut_refs[a];
                ++t.plut_refs[b];
                t.mlut[m] = b;
                mlut_writes.push_back({m, b});
            }
        }
        pack_single<codec::MlutWrite>(channel, mlut_writes, codec::kMaxMlutEntriesPerWord, words);
    }
    else {
        // Segment count changed: the gate gets a fresh contiguous MLUT range on
        // this channel. The old range stays allocated until a full recompile.
        auto range = t.glut.at(id);
        std::size_t needed = range.length() - old_addrs.size() + fresh.size();
        if (t.mlut.size() + needed > lut::kMlutDepth)
            throw CapacityError("MLUT", "no room to relocate gate '" + gate + "'");
        for (std::uint32_t m = range.start; m <= range.end; ++m)
            --t.plut_refs[t.mlut[m]];
        auto start = static_cast<std::uint16_t>(t.mlut.size());
        for (unsigned q = 0; q < kParams; ++q) {
            std::vector<std::uint16_t> addrs;
            if (q == p) {
                for (const auto &seg : fresh)
                    addrs.push_back(append_mlut(t, place(seg)));
            }
            else {
                for (auto m : layout[q])
                    addrs.push_back(append_mlut(t, t.mlut[m]));
            }
            layout[q] = std::move(addrs);
        }
        lut::GateRange moved{start, static_cast<std::uint16_t>(t.mlut.size() - 1)};
        t.glut[id] = moved;
        for (std::uint32_t m = moved.start; m <= moved.end; ++m)
            mlut_writes.push_back({static_cast<std::uint16_t>(m), t.mlut[m]});
        pack_single<codec::MlutWrite>(channel, mlut_writes, codec::kMaxMlutEntriesPerWord, words);
        words.push_back(codec::GlutWrite{static_cast<std::uint8_t>(1u << channel), {{id, moved.start, moved.end}}});
    }
    def = std::move(updated);
    return words;
}

std::string CompiledProgram::report_json() const
{
    nlohmann::ordered_json doc;
    doc["channels"] = channels;
    doc["words"] = {{"plut", counts.plut},
                    {"mlut", counts.mlut},
                    {"glut", counts.glut},
                    {"programming", counts.programming()},
                    {"sequence", counts.sequence},
                    {"total", counts.total()}};
    doc["bits"] = counts.total() * kWordBits;
    doc["circuit_length"] = circuit.size();
    doc["sequence_words_unpacked"] = unpacked_sequence_words();
    nlohmann::ordered_json ids = nlohmann::ordered_json::object();
    for (std::uint16_t id = 0; id < gates.size(); ++id)
        ids[gates[id].name] = id;
    doc["gate_ids"] = ids;
    nlohmann::ordered_json alloc = nlohmann::ordered_json::array();
    for (unsigned c = 0; c < channels; ++c) {
        const auto &t = tables[c];
        nlohmann::ordered_json glut = nlohmann::ordered_json::object();
        for (const auto &[id, r] : t.glut)
            glut[std::to_string(id)] = {r.start, r.end};
        alloc.push_back({{"channel", c}, {"plut_used", t.plut.size()}, {"mlut_used", t.mlut.size()}, {"glut", glut}});
    }
    doc["allocation"] = alloc;
    return doc.dump(2);
}

} // namespace awm::compiler
