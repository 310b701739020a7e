#include <awm/analysis.hpp>
#include <awm/errors.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace awm::analysis {

void StreamConfig::validate() const
{
    if (!(bus_bytes > 0 && dma_hz > 0 && seq_hz > 0) || channels == 0 || params == 0)
        throw ConfigError("stream config: all quantities must be positive");
    if (pack_capacity == 0 || pack_capacity > 20)
        throw ConfigError("stream config: pack_capacity must be 1..20");
}

double dma_bandwidth(const StreamConfig &cfg)
{
    return cfg.bus_bytes * cfg.dma_hz;
}

double raw_gate_time(const StreamConfig &cfg)
{
    return gate_time(double(cfg.channels) * cfg.params, cfg.dma_hz);
}

double words_per_gate(double sequencing_words, unsigned channels, unsigned updated_params)
{
    return sequencing_words * channels + updated_params;
}

double gate_time(double words, double hz)
{
    if (!(hz > 0))
        throw ConfigError("gate time: clock must be positive");
    return words / hz * 1e9;
}

double steady_state_words(const StreamConfig &cfg)
{
    return double(cfg.channels) / cfg.pack_capacity;
}

double packed_words_per_gate(const StreamConfig &cfg, unsigned updated_params)
{
    return steady_state_words(cfg) + updated_params + 1.0;
}

double compression_factor(const StreamConfig &cfg)
{
    return double(cfg.channels) * cfg.params / steady_state_words(cfg);
}

double steady_state_bandwidth(const StreamConfig &cfg)
{
    return dma_bandwidth(cfg) / compression_factor(cfg);
}

namespace {

// Word slots in a gate; the epsilon keeps exact products such as 333 from
// landing one below after floating-point scaling.
double slots(const StreamConfig &cfg, double gate_time_ns)
{
    if (!(gate_time_ns > 0))
        throw RangeError("gate_time", "must be positive");
    return std::floor(cfg.dma_hz * gate_time_ns * 1e-9 + 1e-9);
}

} // namespace

std::int64_t update_budget(const StreamConfig &cfg, double gate_time_ns)
{
    return static_cast<std::int64_t>(slots(cfg, gate_time_ns)) - cfg.params;
}

std::int64_t full_plut_update_gates(const StreamConfig &cfg, double plut_total, double gate_time_ns)
{
    double per_gate = cfg.dma_hz * gate_time_ns * 1e-9;
    if (!(per_gate > 0))
        throw RangeError("gate_time", "must be positive");
    return static_cast<std::int64_t>(std::ceil(plut_total / per_gate - 1e-9));
}

std::int64_t full_plut_update_gates_interleaved(const StreamConfig &cfg, double plut_total, double gate_time_ns)
{
    auto budget = update_budget(cfg, gate_time_ns);
    if (budget <= 0)
        throw RangeError("gate_time", "no update budget left at this gate time");
    return static_cast<std::int64_t>(std::ceil(plut_total / double(budget) - 1e-9));
}

double sequencer_floor(const StreamConfig &cfg)
{
    return gate_time(cfg.params, cfg.seq_hz);
}

GpioDecomposition gpio_decompose(double t_fast, double t_mid, double t_slow, std::array<double, 3> s)
{
    double det = s[1] - s[0];
    if (std::abs(det) < 1e-12)
        throw Error("gpio decomposition: singular system (equal scale factors)");
    GpioDecomposition d;
    d.pl_ns = (t_mid - t_fast) / det;
    d.rpu_ns = t_fast - s[0] * d.pl_ns;
    d.residual_ns = t_slow - (d.rpu_ns + s[2] * d.pl_ns);
    return d;
}

double single_param_update_time(double payload, double rate, double base)
{
    if (!(rate > 0))
        throw ConfigError("update time: rate must be positive");
    return base + payload / rate * 1e9;
}

double single_param_update_time(const channel::ChannelTimingModel &model, double payload)
{
    return model.stalled_time(payload);
}

double ReportRow::compared() const
{
    if (round_digits < 0)
        return computed;
    double scale = std::pow(10.0, round_digits);
    return std::round(computed * scale) / scale;
}

bool ReportRow::pass() const
{
    double tol = relative ? tolerance * std::abs(reference) : tolerance;
    return std::abs(deviation()) <= tol + 1e-9 * std::max(1.0, std::abs(reference));
}

namespace {

ReportRow row(std::string key, std::string label, std::string unit, double computed, double reference,
              double tolerance, bool relative = false, int round_digits = -1, std::string note = {})
{
    return {std::move(key), std::move(label), std::move(unit), computed, reference, tolerance, relative,
            round_digits, std::move(note)};
}

} // namespace

std::vector<ReportRow> reproduction_table(const StreamConfig &cfg)
{
    cfg.validate();
    std::vector<ReportRow> rows;
    auto add = [&](ReportRow r) { rows.push_back(std::move(r)); };

    add(row("dma_bandwidth", "raw streaming bandwidth W_bus * f_DMA", "GB/s", dma_bandwidth(cfg) / 1e9, 10.656, 0.0));
    add(row("raw_gate_time", "raw streaming gate time, 64 words", "ns", raw_gate_time(cfg), 192.2, 0.1));
    add(row("initial_program_gate_time", "first execution, N_w = 11 per channel", "ns",
         gate_time(words_per_gate(11, cfg.channels, 0), cfg.dma_hz), 264.3, 0.1));
    add(row("full_update_gate_time", "N_w = S N_ch + P_upd = 16", "ns",
         gate_time(words_per_gate(1, cfg.channels, 8), cfg.dma_hz), 48.0, 0.0, false, 1));
    add(row("single_update_gate_time", "N_w = S N_ch + P_upd = 9", "ns",
         gate_time(words_per_gate(1, cfg.channels, 1), cfg.dma_hz), 27.0, 0.0, false, 1));
    add(row("packed_full_update_gate_time", "packed IDs, 8 parameter updates", "ns",
         gate_time(packed_words_per_gate(cfg, 8), cfg.dma_hz), 28.1, 0.02, true, 1,
         "accounting N_ch/20 + P_upd + 1 gives 9.4 words; the reference implies 9.36 words"));
    add(row("packed_single_update_gate_time", "packed IDs, 1 parameter update", "ns",
         gate_time(packed_words_per_gate(cfg, 1), cfg.dma_hz), 7.1, 0.02, true, 1,
         "accounting N_ch/20 + P_upd + 1 gives 2.4 words; the reference implies 2.36 words"));
    add(row("sequencer_floor", "sequencer feed limit N_p / f_seq", "ns", sequencer_floor(cfg), 19.5, 0.2));
    add(row("steady_state_words", "packed sequencing words per gate", "words", steady_state_words(cfg), 0.4, 0.0));
    add(row("compression_factor", "raw over packed sequencing bandwidth", "x", compression_factor(cfg), 160.0, 0.0));
    add(row("steady_state_bandwidth", "packed sequencing bandwidth", "MB/s", steady_state_bandwidth(cfg) / 1e6, 66.6,
         0.1));
    add(row("update_budget", "parameters writable between 1 us gates", "params",
         double(update_budget(cfg, 1000.0)), 325.0, 0.0));
    add(row("full_plut_update_gates", "1 us gates covering a full PLUT reload", "gates",
         double(full_plut_update_gates(cfg)), 99.0, 0.0,
         false, -1,
         "interleaved reload within the per-gate update budget needs " +
             std::to_string(full_plut_update_gates_interleaved(cfg)) + " gates"));

    const auto &presets = channel::PresetLibrary::builtin();
    add(row("single_param_update_time", "32 B update at the minimum DMA throughput", "us",
         single_param_update_time(presets.get("zcu111-dma-256-mm2s"), 32) / 1e3, 1.82, 0.01));

    auto g = gpio_decompose(95.6, 122.7, 193.2);
    add(row("gpio_t_rpu", "GPIO decomposition, RPU time", "ns", g.rpu_ns, 54.7, 1.5, false, -1,
         "exact solution of the first two equations"));
    add(row("gpio_t_pl333", "GPIO decomposition, AXI/PL time at 333 MHz", "ns", g.pl_ns, 40.9, 1.5, false, -1,
         "exact solution of the first two equations"));
    add(row("gpio_residual", "GPIO decomposition, 100 MHz check residual", "ns", g.residual_ns, 2.3, 0.5, false, -1,
         "reference residual was computed from rounded solutions"));
    return rows;
}

std::string report_json(const std::vector<ReportRow> &rows, const StreamConfig &cfg)
{
    nlohmann::ordered_json doc;
    doc["config"] = {{"bus_bytes", cfg.bus_bytes},   {"dma_hz", cfg.dma_hz}, {"channels", cfg.channels},
                     {"params", cfg.params},         {"seq_hz", cfg.seq_hz}, {"pack_capacity", cfg.pack_capacity}};
    auto arr = nlohmann::ordered_json::array();
    for (const auto &r : rows) {
        nlohmann::ordered_json row;
        row["key"] = r.key;
        row["label"] = r.label;
        row["unit"] = r.unit;
        row["computed"] = r.computed;
        row["reference"] = r.reference;
        row["deviation"] = r.deviation();
        row["tolerance"] = r.tolerance;
        row["tolerance_kind"] = r.relative ? "relative" : "absolute";
        row["pass"] = r.pass();
        if (!r.note.empty())
            row["note"] = r.note;
        arr.push_back(row);
    }
    doc["rows"] = arr;
    return doc.dump(2);
}

std::string report_markdown(const std::vector<ReportRow> &rows)
{
    std::ostringstream out;
    out << "| quantity | unit | computed | reference | deviation | tolerance | ok |\n";
    out << "|---|---|---:|---:|---:|---:|:-:|\n";
    char buf[256];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "| %s | %s | %.6g | %.6g | %+.3g | %.3g%s | %s |\n", r.label.c_str(),
                      r.unit.c_str(), r.computed, r.reference, r.deviation(), r.relative ? r.tolerance * 100 : r.tolerance,
                      r.relative ? "%" : "", r.pass() ? "yes" : "no");
        out << buf;
    }
    bool any = false;
    for (const auto &r : rows)
        if (!r.note.empty()) {
            if (!any)
                out << "\nNotes:\n\n";
            any = true;
            out << "- " << r.label << ": " << r.note << "\n";
        }
    return out.str();
}

} // namespace awm::analysis
