#include <awm/errors.hpp>
#include <awm/lut_store.hpp>
#include <awm/simulator.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace awm::sim {

using nlohmann::json;

void SimConfig::validate() const
{
    if (channels < 1 || channels > lut::kMaxChannels)
        throw ConfigError("sim: channels must be 1..8");
    if (fifo_depth < 1)
        throw ConfigError("sim: fifo_depth must be at least 1");
    if (phase_bits < 1 || phase_bits > 64)
        throw ConfigError("sim: phase_bits must be 1..64");
    if (counter_bits < 1 || counter_bits > 64)
        throw ConfigError("sim: counter_bits must be 1..64");
    for (const auto &t : crosstalk)
        if (t.target >= channels || t.source >= channels)
            throw ConfigError("sim: crosstalk term references a channel outside the run");
}

namespace {

template <typename T>
void take(const json &obj, const char *key, T &dst)
{
    if (obj.contains(key))
        dst = obj.at(key).get<T>();
}

void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, const char *where)
{
    if (!obj.is_object())
        throw ConfigError(std::string(where) + ": expected an object");
    for (const auto &[key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

} // namespace

SimConfig parse_sim_config(std::string_view text, SimConfig cfg)
{
    try {
        auto doc = json::parse(text);
        reject_unknown(doc,
                       {"channels", "fifo_depth", "trigger_cycle", "max_cycles", "phase_bits", "counter_bits",
                        "counter_start", "feedforward", "primary_delay", "crosstalk"},
                       "sim config");
        take(doc, "channels", cfg.channels);
        take(doc, "fifo_depth", cfg.fifo_depth);
        take(doc, "trigger_cycle", cfg.trigger_cycle);
        take(doc, "max_cycles", cfg.max_cycles);
        take(doc, "phase_bits", cfg.phase_bits);
        take(doc, "counter_bits", cfg.counter_bits);
        take(doc, "counter_start", cfg.counter_start);
        take(doc, "primary_delay", cfg.primary_delay);
        if (doc.contains("feedforward")) {
            const auto &f = doc["feedforward"];
            reject_unknown(f, {"phase", "harmonic"}, "sim config feedforward");
            take(f, "phase", cfg.feedforward.ffwd_phase);
            take(f, "harmonic", cfg.feedforward.harmonic);
        }
        if (doc.contains("crosstalk")) {
            cfg.crosstalk.clear();
            for (const auto &t : doc["crosstalk"]) {
                reject_unknown(t, {"target", "source", "amplitude", "phase", "delay"}, "sim config crosstalk");
                dds::CrosstalkTerm term;
                take(t, "target", term.target);
                take(t, "source", term.source);
                take(t, "amplitude", term.amplitude);
                take(t, "phase", term.phase);
                take(t, "delay", term.delay);
                cfg.crosstalk.push_back(term);
            }
        }
    }
    catch (const json::exception &e) {
        throw ConfigError(std::string("sim config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string to_json(const SimConfig &cfg)
{
    nlohmann::ordered_json doc;
    doc["channels"] = cfg.channels;
    doc["fifo_depth"] = cfg.fifo_depth;
    doc["trigger_cycle"] = cfg.trigger_cycle;
    doc["max_cycles"] = cfg.max_cycles;
    doc["phase_bits"] = cfg.phase_bits;
    doc["counter_bits"] = cfg.counter_bits;
    doc["counter_start"] = cfg.counter_start;
    doc["feedforward"] = {{"phase", cfg.feedforward.ffwd_phase}, {"harmonic", cfg.feedforward.harmonic}};
    doc["primary_delay"] = cfg.primary_delay;
    auto terms = nlohmann::ordered_json::array();
    for (const auto &t : cfg.crosstalk)
        terms.push_back(
            {{"target", t.target}, {"source", t.source}, {"amplitude", t.amplitude}, {"phase", t.phase}, {"delay", t.delay}});
    doc["crosstalk"] = terms;
    return doc.dump(2);
}

ChannelInputs tone_inputs(const std::array<spline::EngineSample, spline::kParameters> &s, const dds::PhaseFormat &fmt)
{
    ChannelInputs out;
    for (unsigned k = 0; k < 2; ++k) {
        const auto &freq = s[4 * k];
        const auto &amp = s[4 * k + 1];
        const auto &phase = s[4 * k + 2];
        const auto &frame = s[4 * k + 3];
        auto &in = out[k];
        in.ftw = fmt.from_signed(freq.value);
        in.phase_word = fmt.from_signed(phase.value);
        in.amplitude = amp.value;
        in.frame_input = fmt.from_signed(frame.value);
        in.sync_trigger = freq.segment_start && freq.meta.phase_sync;
        in.ffwd_enable = freq.meta.ffwd_enable;
        in.frame_accumulate = frame.meta.frame_accumulate && !frame.underrun;
        in.frame_final_only = frame.meta.frame_final_only;
        in.frame_segment_end = frame.segment_end;
    }
    return out;
}

SimResult simulate(std::span<const Word256> stream, const SimConfig &cfg)
{
    cfg.validate();
    lut::GateSequencer sequencer(cfg.channels);
    std::vector<spline::EngineBank> banks(cfg.channels, spline::EngineBank(cfg.fifo_depth));
    for (const auto &word : stream)
        for (const auto &r : sequencer.process_word(word))
            banks[r.channel].feed(r.engine, r.segment);

    dds::PhaseFormat fmt(cfg.phase_bits);
    std::vector<dds::DdsCore> cores(cfg.channels, dds::DdsCore(fmt));
    for (auto &c : cores)
        c.feedforward() = cfg.feedforward;
    dds::CrosstalkMixer mixer(cfg.channels, cfg.crosstalk, cfg.primary_delay);
    dds::GlobalCounter counter(cfg.counter_bits);
    counter.set(cfg.counter_start);

    SimResult r;
    r.channels = cfg.channels;
    r.first_cycle = cfg.trigger_cycle;
    std::vector<dds::ChannelOutput> outputs(cfg.channels);
    auto all_drained = [&] {
        for (const auto &b : banks)
            if (!b.drained())
                return false;
        return true;
    };

    for (std::uint64_t cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        bool live = cycle >= cfg.trigger_cycle;
        if (live && all_drained()) {
            r.drained = true;
            break;
        }
        if (cycle == cfg.trigger_cycle)
            for (auto &b : banks)
                b.trigger();
        for (unsigned c = 0; c < cfg.channels; ++c) {
            auto tick = banks[c].tick();
            if (!tick.stepped)
                continue;
            auto in = tone_inputs(tick.samples, fmt);
            outputs[c] = cores[c].step(in, counter.value());
            r.inputs.push_back(in);
        }
        if (live) {
            for (double v : mixer.mix(outputs))
                r.samples.push_back(v);
            ++r.cycles;
        }
        counter.tick();
    }

    for (unsigned c = 0; c < cfg.channels; ++c)
        for (const auto &e : banks[c].events())
            r.events.push_back({e.cycle, c, e.engine, e.kind});
    std::stable_sort(r.events.begin(), r.events.end(),
                     [](const SimEvent &a, const SimEvent &b) { return a.cycle < b.cycle; });
    return r;
}

namespace {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_waveform_csv(std::ostream &out, const SimResult &r)
{
    out << "cycle,channel,sample\n";
    for (std::uint64_t k = 0; k < r.cycles; ++k)
        for (unsigned c = 0; c < r.channels; ++c)
            out << r.first_cycle + k << ',' << c << ',' << format_double(r.sample(k, c)) << '\n';
}

void write_inputs_csv(std::ostream &out, const SimResult &r)
{
    out << "cycle,channel,tone,ftw,phase_word,amplitude,frame,sync,ffwd,frame_flags\n";
    for (std::uint64_t k = 0; k < r.cycles; ++k)
        for (unsigned c = 0; c < r.channels; ++c) {
            const auto &in = r.input(k, c);
            for (unsigned t = 0; t < 2; ++t) {
                const auto &v = in[t];
                unsigned flags = (v.frame_accumulate ? 1u : 0u) | (v.frame_final_only ? 2u : 0u) |
                                 (v.frame_segment_end ? 4u : 0u);
                out << r.first_cycle + k << ',' << c << ',' << t << ',' << v.ftw << ',' << v.phase_word << ','
                    << v.amplitude << ',' << v.frame_input << ',' << v.sync_trigger << ',' << v.ffwd_enable << ','
                    << flags << '\n';
            }
        }
}

void write_events_csv(std::ostream &out, const SimResult &r)
{
    out << "cycle,channel,engine,kind\n";
    for (const auto &e : r.events)
        out << e.cycle << ',' << e.channel << ',' << e.engine << ',' << spline::to_string(e.kind) << '\n';
}

} // namespace awm::sim
