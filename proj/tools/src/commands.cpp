#include "commands.hpp"

#include <awm/analysis.hpp>
#include <awm/channel_model.hpp>
#include <awm/compiler.hpp>
#include <awm/errors.hpp>
#include <awm/simulator.hpp>
#include <awm/wordcodec.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace awm::cli {

using nlohmann::json;

namespace {

enum class Kind { Str, UInt, Float, Flag };

struct OptionSpec {
    const char *flag;
    const char *key;
    Kind kind;
    const char *help;
};

struct CommandSpec {
    const char *name;
    const char *help;
    std::vector<OptionSpec> options;
    std::vector<const char *> required;
};

const std::vector<CommandSpec> &commands()
{
    static const std::vector<CommandSpec> specs = {
        {"compile",
         "Compile gate definitions and a circuit into a word stream",
         {{"--gates", "gates", Kind::Str, "gate definition file (JSON)"},
          {"--circuit", "circuit", Kind::Str, "circuit file (JSON list of gate names)"},
          {"--out", "out", Kind::Str, "output word stream"},
          {"--raw", "raw", Kind::Flag, "emit a LUT-bypass stream instead"},
          {"--report", "report", Kind::Str, "allocation report path (default <out>.report.json)"}},
         {"gates", "circuit", "out"}},
        {"sim",
         "Simulate a word stream through sequencer, spline engines and DDS",
         {{"--stream", "stream", Kind::Str, "input word stream"},
          {"--channels", "channels", Kind::UInt, "number of output channels"},
          {"--cycles", "cycles", Kind::UInt, "maximum cycles to simulate"},
          {"--out", "out", Kind::Str, "waveform CSV (cycle,channel,sample)"},
          {"--events", "events", Kind::Str, "event log CSV"},
          {"--inputs", "inputs", Kind::Str, "DDS input trace CSV"}},
         {"stream", "out"}},
        {"bench",
         "Run trials of a channel timing preset over a payload sweep",
         {{"--preset", "preset", Kind::Str, "preset name"},
          {"--presets-file", "presets_file", Kind::Str, "preset library (default: built in)"},
          {"--payloads", "payloads", Kind::Str, "first:last powers of two, or a comma list"},
          {"--trials", "trials", Kind::UInt, "trials per payload"},
          {"--seed", "seed", Kind::UInt, "random seed"},
          {"--bins", "bins", Kind::UInt, "histogram bins per payload"},
          {"--out", "out", Kind::Str, "statistics JSON (default stdout)"},
          {"--hist", "hist", Kind::Str, "throughput histogram CSV"}},
         {"preset"}},
        {"analyze",
         "Reproduce the streaming bandwidth and latency arithmetic",
         {{"--out", "out", Kind::Str, "report JSON (default stdout)"},
          {"--markdown", "markdown", Kind::Str, "report as a markdown table"}},
         {}},
        {"decode",
         "Hex-dump and describe every word of a stream",
         {{"--stream", "stream", Kind::Str, "input word stream"}, {"--out", "out", Kind::Str, "output (default stdout)"}},
         {"stream"}},
    };
    return specs;
}

void check_required(const Settings &s, const CommandSpec &spec)
{
    for (const char *key : spec.required)
        if (s.at(key).is_null())
            throw ConfigError(std::string(spec.name) + ": missing required setting '" + key + "'");
}

std::ofstream open_out(const std::string &path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw ConfigError("cannot write " + path);
    return f;
}

void write_text(const std::string &path, const std::string &text)
{
    auto f = open_out(path);
    f << text;
}

template <typename T>
T get_or(const Settings &s, const char *key, T fallback)
{
    return s.at(key).is_null() ? fallback : s.at(key).get<T>();
}

analysis::StreamConfig parse_stream_config(const json &obj)
{
    analysis::StreamConfig cfg;
    for (const auto &[key, v] : obj.items()) {
        if (key == "bus_bytes")
            cfg.bus_bytes = v.get<double>();
        else if (key == "dma_hz")
            cfg.dma_hz = v.get<double>();
        else if (key == "channels")
            cfg.channels = v.get<unsigned>();
        else if (key == "params")
            cfg.params = v.get<unsigned>();
        else if (key == "seq_hz")
            cfg.seq_hz = v.get<double>();
        else if (key == "pack_capacity")
            cfg.pack_capacity = v.get<unsigned>();
        else
            throw ConfigError("analyze stream config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

json stats_json(const channel::TrialStats &s)
{
    return {{"median", s.median}, {"min", s.min}, {"max", s.max}, {"count", s.count}};
}

} // namespace

Settings defaults(const std::string &command)
{
    if (command == "compile")
        return {{"gates", nullptr}, {"circuit", nullptr}, {"out", nullptr}, {"raw", false}, {"report", nullptr}};
    if (command == "sim")
        return {{"stream", nullptr}, {"out", nullptr},    {"channels", nullptr}, {"cycles", nullptr},
                {"events", nullptr}, {"inputs", nullptr}, {"sim", json::object()}};
    if (command == "bench")
        return {{"preset", nullptr}, {"presets_file", nullptr}, {"payloads", "4:1048576"}, {"trials", 1000},
                {"seed", 1},         {"bins", 32},              {"out", nullptr},          {"hist", nullptr}};
    if (command == "analyze")
        return {{"out", nullptr}, {"markdown", nullptr}, {"stream", json::object()}};
    if (command == "decode")
        return {{"stream", nullptr}, {"out", nullptr}};
    throw ConfigError("unknown command '" + command + "'");
}

void merge_settings(Settings &base, const json &patch, const std::string &where)
{
    if (!patch.is_object())
        throw ConfigError(where + ": expected a JSON object");
    for (const auto &[key, v] : patch.items()) {
        if (!base.contains(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
        base[key] = v;
    }
}

std::vector<double> parse_payloads(const json &spec)
{
    if (spec.is_array()) {
        std::vector<double> out;
        for (const auto &v : spec)
            out.push_back(v.get<double>());
        if (out.empty())
            throw ConfigError("payloads: empty list");
        return out;
    }
    auto text = spec.get<std::string>();
    try {
        if (auto colon = text.find(':'); colon != std::string::npos)
            return channel::power_of_two_payloads(std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1)));
        std::vector<double> out;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ',');)
            out.push_back(std::stod(item));
        if (out.empty())
            throw ConfigError("payloads: empty list");
        return out;
    }
    catch (const std::logic_error &) {
        throw ConfigError("payloads: cannot parse '" + text + "'");
    }
}

int cmd_compile(const Settings &s, std::ostream &log)
{
    auto lib = compiler::parse_gate_file(compiler::read_text_file(s.at("gates")));
    auto circuit = compiler::parse_circuit_file(compiler::read_text_file(s.at("circuit")));
    auto out_path = s.at("out").get<std::string>();
    bool raw = s.at("raw").get<bool>();

    std::vector<Word256> words;
    nlohmann::ordered_json report;
    report["settings"] = s;
    report["mode"] = raw ? "raw" : "compiled";
    if (raw) {
        words = compiler::emit_raw_stream(lib.gates, circuit, lib.channels);
        report["channels"] = lib.channels;
        report["circuit_length"] = circuit.size();
        report["words"] = {{"total", words.size()}};
        report["words_per_gate"] = circuit.empty() ? 0.0 : double(words.size()) / double(circuit.size());
        report["bits_per_channel_per_gate"] =
            circuit.empty() ? 0.0 : double(words.size() * kWordBits) / double(circuit.size() * lib.channels);
    }
    else {
        auto prog = compiler::compile(lib.gates, circuit, lib.channels);
        words = prog.stream();
        auto alloc = nlohmann::ordered_json::parse(prog.report_json());
        for (auto &[k, v] : alloc.items())
            report[k] = v;
    }
    codec::write_stream(out_path, words);
    std::string report_path = get_or<std::string>(s, "report", out_path + ".report.json");
    write_text(report_path, report.dump(2) + "\n");
    log << "wrote " << words.size() << " words to " << out_path << "\n";
    return 0;
}

int cmd_sim(const Settings &s, std::ostream &log)
{
    auto words = codec::read_stream(std::filesystem::path(s.at("stream").get<std::string>()));
    sim::SimConfig cfg;
    if (!s.at("sim").empty())
        cfg = sim::parse_sim_config(s.at("sim").dump(), cfg);
    cfg.channels = get_or<unsigned>(s, "channels", cfg.channels);
    cfg.max_cycles = get_or<std::uint64_t>(s, "cycles", cfg.max_cycles);
    cfg.validate();

    auto result = sim::simulate(words, cfg);
    auto out_path = s.at("out").get<std::string>();
    {
        auto f = open_out(out_path);
        sim::write_waveform_csv(f, result);
    }
    if (!s.at("events").is_null()) {
        auto f = open_out(s.at("events"));
        sim::write_events_csv(f, result);
    }
    if (!s.at("inputs").is_null()) {
        auto f = open_out(s.at("inputs"));
        sim::write_inputs_csv(f, result);
    }
    nlohmann::ordered_json run;
    run["settings"] = s;
    run["sim"] = nlohmann::ordered_json::parse(sim::to_json(cfg));
    run["stream_words"] = words.size();
    run["cycles"] = result.cycles;
    run["drained"] = result.drained;
    run["events"] = result.events.size();
    write_text(out_path + ".run.json", run.dump(2) + "\n");
    log << "simulated " << result.cycles << " cycles on " << cfg.channels << " channels"
        << (result.drained ? "" : " (stopped at the cycle limit)") << ", " << result.events.size() << " events\n";
    return 0;
}

int cmd_bench(const Settings &s, std::ostream &log)
{
    auto lib = s.at("presets_file").is_null()
                   ? channel::PresetLibrary::builtin()
                   : channel::PresetLibrary::parse(compiler::read_text_file(s.at("presets_file")));
    const auto &model = lib.get(s.at("preset").get<std::string>());
    auto payloads = parse_payloads(s.at("payloads"));
    auto trials = s.at("trials").get<std::size_t>();
    auto seed = s.at("seed").get<std::uint64_t>();
    auto bins = s.at("bins").get<std::size_t>();
    auto runs = channel::sweep(model, payloads, trials, seed);

    nlohmann::ordered_json doc;
    doc["settings"] = s;
    doc["preset"] = nlohmann::ordered_json::parse(channel::to_json(model));
    auto arr = nlohmann::ordered_json::array();
    double best = 0.0;
    for (const auto &r : runs) {
        nlohmann::ordered_json row;
        row["payload_bytes"] = r.payload_bytes;
        row["extrapolated"] = r.extrapolated;
        row["stalled_trials"] = r.stalled;
        row["time_ns"] = stats_json(r.time);
        row["throughput_bytes_per_s"] = stats_json(r.throughput);
        arr.push_back(row);
        best = std::max(best, r.throughput.median);
    }
    doc["runs"] = arr;
    doc["max_median_throughput_bytes_per_s"] = best;

    if (s.at("out").is_null())
        log << doc.dump(2) << "\n";
    else
        write_text(s.at("out"), doc.dump(2) + "\n");
    if (!s.at("hist").is_null()) {
        auto f = open_out(s.at("hist"));
        f << "payload,bin_left,bin_right,count\n";
        f.precision(17);
        for (const auto &r : runs) {
            std::vector<double> rate;
            rate.reserve(r.time_ns.size());
            for (double t : r.time_ns)
                rate.push_back(r.payload_bytes / t * 1e9);
            for (const auto &b : channel::histogram(rate, bins))
                f << r.payload_bytes << ',' << b.left << ',' << b.right << ',' << b.count << '\n';
        }
    }
    return 0;
}

int cmd_analyze(const Settings &s, std::ostream &log)
{
    auto cfg = parse_stream_config(s.at("stream"));
    auto rows = analysis::reproduction_table(cfg);
    auto doc = nlohmann::ordered_json::parse(analysis::report_json(rows, cfg));
    doc["settings"] = s;
    if (s.at("out").is_null())
        log << doc.dump(2) << "\n";
    else
        write_text(s.at("out"), doc.dump(2) + "\n");
    if (!s.at("markdown").is_null())
        write_text(s.at("markdown"), analysis::report_markdown(rows));
    return 0;
}

int cmd_decode(const Settings &s, std::ostream &log)
{
    auto words = codec::read_stream(std::filesystem::path(s.at("stream").get<std::string>()));
    std::ostringstream text;
    for (std::size_t i = 0; i < words.size(); ++i)
        text << i << "  " << codec::to_hex(words[i]) << "  " << codec::describe(codec::decode_word(words[i])) << "\n";
    if (s.at("out").is_null())
        log << text.str();
    else
        write_text(s.at("out"), text.str());
    return 0;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"awmctl: pulse compiler, datapath simulator and channel timing models"};
    app.name(args.empty() ? "awmctl" : args.front());
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    bool json_errors = false;
    app.add_option("--config", config_path, "JSON settings file for the subcommand");
    app.add_flag("--json", json_errors, "print errors as JSON");

    struct Bound {
        const OptionSpec *spec;
        CLI::Option *opt;
        std::string text;
        bool flag = false;
    };
    std::map<std::string, std::pair<CLI::App *, std::vector<std::unique_ptr<Bound>>>> bound;
    for (const auto &cmd : commands()) {
        auto *sub = app.add_subcommand(cmd.name, cmd.help);
        auto &slot = bound[cmd.name];
        slot.first = sub;
        for (const auto &o : cmd.options) {
            auto b = std::make_unique<Bound>();
            b->spec = &o;
            if (o.kind == Kind::Flag)
                b->opt = sub->add_flag(o.flag, b->flag, o.help);
            else
                b->opt = sub->add_option(o.flag, b->text, o.help);
            slot.second.push_back(std::move(b));
        }
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty())
        rev.pop_back();
    try {
        app.parse(rev);
    }
    catch (const CLI::ParseError &e) {
        return app.exit(e, out, err);
    }

    try {
        for (const auto &cmd : commands()) {
            auto &[sub, opts] = bound[cmd.name];
            if (!sub->parsed())
                continue;
            Settings s = defaults(cmd.name);
            if (!config_path.empty())
                merge_settings(s, json::parse(compiler::read_text_file(config_path)), config_path);
            for (const auto &b : opts) {
                if (b->opt->count() == 0)
                    continue;
                const char *key = b->spec->key;
                try {
                    switch (b->spec->kind) {
                    case Kind::Str: s[key] = b->text; break;
                    case Kind::UInt: s[key] = std::stoull(b->text); break;
                    case Kind::Float: s[key] = std::stod(b->text); break;
                    case Kind::Flag: s[key] = b->flag; break;
                    }
                }
                catch (const std::logic_error &) {
                    throw ConfigError(std::string(b->spec->flag) + ": invalid value '" + b->text + "'");
                }
            }
            check_required(s, cmd);
            std::string name = cmd.name;
            if (name == "compile")
                return cmd_compile(s, out);
            if (name == "sim")
                return cmd_sim(s, out);
            if (name == "bench")
                return cmd_bench(s, out);
            if (name == "analyze")
                return cmd_analyze(s, out);
            return cmd_decode(s, out);
        }
        return 2;
    }
    catch (const std::exception &e) {
        std::string kind = "internal";
        if (auto *ae = dynamic_cast<const Error *>(&e))
            kind = ae->kind();
        else if (dynamic_cast<const json::exception *>(&e))
            kind = "config";
        if (json_errors)
            out << json{{"error", {{"kind", kind}, {"message", e.what()}}}}.dump() << "\n";
        else
            err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace awm::cli
