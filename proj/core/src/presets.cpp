#include <awm/channel_model.hpp>
#include <awm/errors.hpp>

#include <builtin_presets.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace awm::channel {

using nlohmann::json;

double fit_word_cost(const ChannelTimingModel &m, double payload, double rate)
{
    double words = std::ceil(payload / m.bus_width_bytes);
    double budget_ns = payload / rate * 1e9 - m.base_latency_ns;
    if (!(budget_ns > 0))
        throw ConfigError("preset '" + m.name + "': target throughput unreachable with the base latency");
    return budget_ns * 1e-9 * m.clock_hz / words;
}

double fit_stall_magnitude(const ChannelTimingModel &m, double payload, double rate)
{
    double nominal = m.transfer_time(payload);
    double stalled = payload / rate * 1e9;
    if (stalled < nominal)
        throw ConfigError("preset '" + m.name + "': minimum throughput exceeds the nominal throughput");
    return 1.0 - nominal / stalled;
}

namespace {

void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, const std::string &where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto &[key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void take(const json &obj, const char *key, T &dst)
{
    if (obj.contains(key))
        dst = obj.at(key).get<T>();
}

std::pair<double, double> target(const json &obj, const std::string &where)
{
    reject_unknown(obj, {"payload_bytes", "bytes_per_s"}, where);
    return {obj.at("payload_bytes").get<double>(), obj.at("bytes_per_s").get<double>()};
}

ChannelTimingModel parse_model(const json &p)
{
    ChannelTimingModel m;
    m.name = p.at("name").get<std::string>();
    auto where = "preset '" + m.name + "'";
    reject_unknown(p,
                   {"name", "mechanism", "board", "direction", "source", "clock_hz", "bus_width_bytes",
                    "base_latency_ns", "word_cost_cycles", "stall", "jitter", "anchors", "rate_cap", "handshake",
                    "fit_throughput", "fit_min_throughput"},
                   where);
    take(p, "mechanism", m.mechanism);
    take(p, "board", m.board);
    take(p, "direction", m.direction);
    take(p, "source", m.source);
    take(p, "clock_hz", m.clock_hz);
    take(p, "bus_width_bytes", m.bus_width_bytes);
    take(p, "base_latency_ns", m.base_latency_ns);
    take(p, "word_cost_cycles", m.word_cost_cycles);
    take(p, "rate_cap", m.rate_cap);
    if (p.contains("stall")) {
        reject_unknown(p["stall"], {"period", "magnitude"}, where + " stall");
        take(p["stall"], "period", m.stall.period);
        take(p["stall"], "magnitude", m.stall.magnitude);
    }
    if (p.contains("jitter")) {
        reject_unknown(p["jitter"], {"fraction"}, where + " jitter");
        take(p["jitter"], "fraction", m.jitter.fraction);
    }
    if (p.contains("anchors"))
        for (const auto &a : p["anchors"])
            m.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    if (p.contains("handshake")) {
        const auto &h = p["handshake"];
        reject_unknown(h, {"latency_count", "throughput_count", "bytes", "exchanges", "handshakes"},
                       where + " handshake");
        HandshakeCounts c;
        take(h, "latency_count", c.latency_count);
        take(h, "throughput_count", c.throughput_count);
        take(h, "bytes", c.bytes);
        take(h, "exchanges", c.exchanges);
        take(h, "handshakes", c.handshakes);
        m.handshake = c;
        m.base_latency_ns = gpio_latency(c.latency_count, m.clock_hz);
        m.bus_width_bytes = c.bytes;
        m.word_cost_cycles = c.throughput_count / (c.exchanges * c.handshakes);
    }
    if (p.contains("fit_throughput")) {
        auto [payload, rate] = target(p["fit_throughput"], where + " fit_throughput");
        m.word_cost_cycles = fit_word_cost(m, payload, rate);
    }
    if (p.contains("fit_min_throughput")) {
        auto [payload, rate] = target(p["fit_min_throughput"], where + " fit_min_throughput");
        m.stall.magnitude = fit_stall_magnitude(m, payload, rate);
    }
    m.validate();
    return m;
}

} // namespace

PresetLibrary PresetLibrary::parse(std::string_view text)
{
    PresetLibrary lib;
    try {
        auto doc = json::parse(text);
        reject_unknown(doc, {"format", "version", "presets"}, "preset file");
        if (doc.value("format", "") != "awm-channel-presets")
            throw ConfigError("preset file: format must be \"awm-channel-presets\"");
        for (const auto &p : doc.at("presets")) {
            auto m = parse_model(p);
            if (lib.contains(m.name))
                throw ConfigError("preset file: duplicate preset '" + m.name + "'");
            lib.models_.push_back(std::move(m));
        }
    }
    catch (const json::exception &e) {
        throw ConfigError(std::string("preset file: ") + e.what());
    }
    return lib;
}

const PresetLibrary &PresetLibrary::builtin()
{
    static const PresetLibrary lib = parse(detail::kBuiltinPresetJson);
    return lib;
}

bool PresetLibrary::contains(std::string_view name) const
{
    return std::any_of(models_.begin(), models_.end(), [&](const auto &m) { return m.name == name; });
}

const ChannelTimingModel &PresetLibrary::get(std::string_view name) const
{
    for (const auto &m : models_)
        if (m.name == name)
            return m;
    std::string known;
    for (const auto &n : names())
        known += (known.empty() ? "" : ", ") + n;
    throw LookupError("unknown preset '" + std::string(name) + "'; available: " + known);
}

std::vector<std::string> PresetLibrary::names() const
{
    std::vector<std::string> out;
    for (const auto &m : models_)
        out.push_back(m.name);
    return out;
}

RmsgTime rmsg_model(std::string_view direction, double payload)
{
    if (direction != "apu-rpu" && direction != "rpu-apu")
        throw LookupError("rmsg direction must be apu-rpu or rpu-apu");
    const auto &m = PresetLibrary::builtin().get("rmsg-" + std::string(direction));
    return {m.transfer_time(payload), m.extrapolated(payload)};
}

std::string to_json(const ChannelTimingModel &m)
{
    nlohmann::ordered_json doc;
    doc["name"] = m.name;
    doc["mechanism"] = m.mechanism;
    doc["board"] = m.board;
    doc["direction"] = m.direction;
    doc["clock_hz"] = m.clock_hz;
    doc["bus_width_bytes"] = m.bus_width_bytes;
    doc["base_latency_ns"] = m.base_latency_ns;
    doc["word_cost_cycles"] = m.word_cost_cycles;
    doc["stall"] = {{"period", m.stall.period}, {"magnitude", m.stall.magnitude}};
    doc["jitter"] = {{"fraction", m.jitter.fraction}};
    if (!m.anchors.empty()) {
        auto a = nlohmann::ordered_json::array();
        for (const auto &x : m.anchors)
            a.push_back({x.payload_bytes, x.time_ns});
        doc["anchors"] = a;
        doc["rate_cap"] = m.rate_cap;
    }
    if (m.handshake)
        doc["handshake"] = {{"latency_count", m.handshake->latency_count},
                            {"throughput_count", m.handshake->throughput_count},
                            {"bytes", m.handshake->bytes},
                            {"exchanges", m.handshake->exchanges},
                            {"handshakes", m.handshake->handshakes}};
    doc["source"] = m.source;
    return doc.dump(2);
}

} // namespace awm::channel
