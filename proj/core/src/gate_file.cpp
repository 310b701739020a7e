#include <awm/compiler.hpp>
#include <awm/errors.hpp>

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace awm::compiler {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, const std::string &where)
{
    for (const auto &[key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json &require(const json &obj, const char *key, const std::string &where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(where + ": missing '" + key + "'");
    return obj.at(key);
}

ParamSpec parse_param(const json &v, const std::string &where)
{
    if (v.is_number_integer())
        return ParamSpec::constant_value(v.get<std::int64_t>());
    if (!v.is_object())
        throw ConfigError(where + ": expected an integer, {\"constant\": v} or {\"knots\": [[t, v], ...]}");
    reject_unknown(v, {"constant", "knots"}, where);
    if (v.contains("constant") == v.contains("knots"))
        throw ConfigError(where + ": give exactly one of 'constant' or 'knots'");
    if (v.contains("constant")) {
        if (!v["constant"].is_number_integer())
            throw ConfigError(where + ": constant must be an integer");
        return ParamSpec::constant_value(v["constant"].get<std::int64_t>());
    }
    std::vector<Knot> knots;
    for (const auto &k : v["knots"]) {
        if (!k.is_array() || k.size() != 2 || !k[0].is_number_unsigned() || !k[1].is_number())
            throw ConfigError(where + ": each knot is [time, value] with a non-negative integer time");
        knots.push_back({k[0].get<std::uint64_t>(), k[1].get<double>()});
    }
    return ParamSpec::spline(std::move(knots));
}

FrameMode parse_frame_mode(const json &v, const std::string &where)
{
    auto s = v.is_string() ? v.get<std::string>() : std::string{};
    if (s == "none")
        return FrameMode::None;
    if (s == "final")
        return FrameMode::Final;
    if (s == "sum")
        return FrameMode::Sum;
    throw ConfigError(where + ": frame must be \"none\", \"final\" or \"sum\"");
}

void apply_channel(ChannelSpec &spec, const json &obj, const std::string &where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": channel entry must be an object");
    for (const auto &[key, v] : obj.items()) {
        if (key == "tone0" || key == "tone1") {
            auto &tone = spec.tones[key.back() - '0'];
            std::string tw = where + "." + key;
            reject_unknown(v, {"sync", "ffwd", "frame"}, tw);
            if (v.contains("sync"))
                tone.sync = v["sync"].get<bool>();
            if (v.contains("ffwd"))
                tone.ffwd = v["ffwd"].get<bool>();
            if (v.contains("frame"))
                tone.frame = parse_frame_mode(v["frame"], tw);
            continue;
        }
        unsigned p = 0;
        try {
            p = param_index(key);
        }
        catch (const LookupError &) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
        spec.params[p] = parse_param(v, where + "." + key);
    }
}

json parse_json(std::string_view text, const char *what)
{
    try {
        return json::parse(text);
    }
    catch (const json::parse_error &e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

} // namespace

GateLibrary parse_gate_file(std::string_view text)
{
    auto doc = parse_json(text, "gate file");
    reject_unknown(doc, {"channels", "gates"}, "gate file");
    GateLibrary lib;
    if (doc.contains("channels")) {
        auto n = doc["channels"].get<int>();
        if (n < 1 || n > static_cast<int>(lut::kMaxChannels))
            throw ConfigError("gate file: channels must be 1..8");
        lib.channels = static_cast<unsigned>(n);
    }
    try {
        for (const auto &g : require(doc, "gates", "gate file")) {
            GateDefinition def;
            def.name = require(g, "name", "gate").get<std::string>();
            std::string where = "gate '" + def.name + "'";
            reject_unknown(g, {"name", "duration", "channels"}, where);
            def.duration = require(g, "duration", where).get<std::uint64_t>();
            ChannelSpec base;
            const auto &chans = require(g, "channels", where);
            if (chans.contains("all"))
                apply_channel(base, chans["all"], where + ".all");
            std::set<unsigned> listed;
            for (const auto &[key, v] : chans.items()) {
                if (key == "all")
                    continue;
                unsigned c = 0;
                auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), c);
                if (ec != std::errc{} || ptr != key.data() + key.size() || c >= lib.channels)
                    throw ConfigError(where + ": channel key '" + key + "' is not 'all' or a channel index below " +
                                      std::to_string(lib.channels));
                ChannelSpec spec = base;
                apply_channel(spec, v, where + "." + key);
                def.channels[c] = spec;
                listed.insert(c);
            }
            if (chans.contains("all"))
                for (unsigned c = 0; c < lib.channels; ++c)
                    if (!listed.count(c))
                        def.channels[c] = base;
            lib.gates.push_back(std::move(def));
        }
    }
    catch (const json::exception &e) {
        throw ConfigError(std::string("gate file: ") + e.what());
    }
    for (const auto &g : lib.gates)
        g.validate();
    return lib;
}

std::vector<std::string> parse_circuit_file(std::string_view text)
{
    auto doc = parse_json(text, "circuit file");
    reject_unknown(doc, {"circuit"}, "circuit file");
    try {
        return require(doc, "circuit", "circuit file").get<std::vector<std::string>>();
    }
    catch (const json::exception &e) {
        throw ConfigError(std::string("circuit file: ") + e.what());
    }
}

std::string read_text_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace awm::compiler
