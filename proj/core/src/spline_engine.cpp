#include <awm/errors.hpp>
#include <awm/spline_engine.hpp>

#include <ostream>

namespace awm::spline {

namespace {
__extension__ using Wide = __int128;
}

ForwardDifferences to_forward_difference(std::int64_t c0, std::int64_t c1, std::int64_t c2, std::int64_t c3)
{
    // f(k+1) - f(k) at 0:  c1 + c2 + c3
    // second difference:   2 c2 + 6 c3
    // third difference:    6 c3
    Wide d0 = c0;
    Wide d1 = Wide(c1) + c2 + c3;
    Wide d2 = Wide(2) * c2 + Wide(6) * c3;
    Wide d3 = Wide(6) * c3;
    constexpr Wide lim = Wide(1) << (kRegisterBits - 1);
    auto check = [&](const char *name, Wide v) {
        if (v < -lim || v >= lim)
            throw RangeError(name, "forward difference overflows 40 bits");
        return static_cast<std::int64_t>(v);
    };
    return {check("u0", d0), check("u1", d1), check("u2", d2), check("u3", d3)};
}

codec::SplineSegment make_segment(std::uint64_t tau, const ForwardDifferences &d, codec::SegmentMetadata meta)
{
    codec::SplineSegment s;
    s.meta = meta;
    s.tau = tau;
    s.u0 = d.u0;
    s.u1 = d.u1;
    s.u2 = d.u2;
    s.u3 = d.u3;
    codec::validate_segment(s);
    return s;
}

SplineEngine::SplineEngine(std::size_t fifo_depth) : depth_(fifo_depth)
{
    if (fifo_depth == 0)
        throw ConfigError("spline engine FIFO depth must be positive");
}

bool SplineEngine::push(const codec::SplineSegment &seg)
{
    if (fifo_full())
        return false;
    fifo_.push_back(seg);
    return true;
}

EngineSample SplineEngine::step()
{
    EngineSample out;
    if (!active()) {
        if (fifo_.empty()) {
            ++underruns_;
            out.value = last_;
            out.meta = meta_;
            out.underrun = true;
            return out;
        }
        const auto &seg = fifo_.front();
        regs_ = {seg.u0, seg.u1, seg.u2, seg.u3};
        remaining_ = seg.tau;
        meta_ = seg.meta;
        fifo_.pop_front();
        out.segment_start = true;
    }
    out.value = regs_[0];
    out.meta = meta_;
    last_ = regs_[0];
    regs_[0] = wrap_signed(regs_[0] + regs_[1], kRegisterBits);
    regs_[1] = wrap_signed(regs_[1] + regs_[2], kRegisterBits);
    regs_[2] = wrap_signed(regs_[2] + regs_[3], kRegisterBits);
    out.segment_end = --remaining_ == 0;
    return out;
}

const char *to_string(BankEventKind k)
{
    return k == BankEventKind::Underrun ? "underrun" : "backpressure";
}

namespace {

template <std::size_t... I>
std::array<SplineEngine, sizeof...(I)> make_engines(std::size_t depth, std::index_sequence<I...>)
{
    return {((void)I, SplineEngine(depth))...};
}

} // namespace

EngineBank::EngineBank(std::size_t fifo_depth)
    : engines_(make_engines(fifo_depth, std::make_index_sequence<kParameters>{}))
{
}

void EngineBank::feed(unsigned engine, const codec::SplineSegment &seg)
{
    if (engine >= kParameters)
        throw RangeError("engine", "index " + std::to_string(engine) + " outside bank");
    staging_.emplace_back(engine, seg);
}

void EngineBank::feed(std::span<const lut::RoutedSegment> segments)
{
    for (const auto &r : segments)
        feed(r.engine, r.segment);
}

void EngineBank::trigger()
{
    triggered_ = true;
    for (auto &e : engines_)
        e.enable();
}

EngineBank::Tick EngineBank::tick()
{
    Tick t;
    if (!staging_.empty()) {
        auto &[engine, seg] = staging_.front();
        if (engines_[engine].push(seg)) {
            staging_.pop_front();
            in_backpressure_ = false;
        }
        else {
            if (!in_backpressure_)
                events_.push_back({cycle_, engine, BankEventKind::Backpressure});
            in_backpressure_ = true;
        }
    }
    if (triggered_) {
        t.stepped = true;
        for (unsigned i = 0; i < kParameters; ++i) {
            t.samples[i] = engines_[i].step();
            if (t.samples[i].underrun && !in_underrun_[i])
                events_.push_back({cycle_, i, BankEventKind::Underrun});
            in_underrun_[i] = t.samples[i].underrun;
        }
    }
    ++cycle_;
    return t;
}

bool EngineBank::drained() const noexcept
{
    if (!staging_.empty())
        return false;
    for (const auto &e : engines_)
        if (!e.idle())
            return false;
    return true;
}

std::vector<std::int64_t> replay(std::span<const codec::SplineSegment> segs)
{
    std::size_t depth = segs.empty() ? 1 : segs.size();
    SplineEngine e(depth);
    std::uint64_t total = 0;
    for (const auto &s : segs) {
        e.push(s);
        total += s.tau;
    }
    e.enable();
    std::vector<std::int64_t> out;
    out.reserve(total);
    for (std::uint64_t k = 0; k < total; ++k)
        out.push_back(e.step().value);
    return out;
}

std::vector<std::int64_t> replay(const codec::SplineSegment &seg)
{
    return replay(std::span<const codec::SplineSegment>(&seg, 1));
}

void write_trace_csv(std::ostream &out, std::span<const std::int64_t> samples, std::uint64_t first_cycle)
{
    out << "cycle,value\n";
    for (std::size_t k = 0; k < samples.size(); ++k)
        out << first_cycle + k << ',' << samples[k] << '\n';
}

} // namespace awm::spline
