#pragma once

// Third-order forward-difference interpolators and the per-channel bank
// that feeds them.

#include <awm/lut_store.hpp>
#include <awm/wordcodec.hpp>

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <vector>

namespace awm::spline {

inline constexpr unsigned kRegisterBits = codec::kCoefficientBits;
inline constexpr unsigned kParameters = lut::kEnginesPerChannel;
inline constexpr std::size_t kDefaultFifoDepth = 64;

struct ForwardDifferences {
    std::int64_t u0 = 0;
    std::int64_t u1 = 0;
    std::int64_t u2 = 0;
    std::int64_t u3 = 0;

    friend bool operator==(const ForwardDifferences &, const ForwardDifferences &) = default;
};

/// Forward differences at k = 0 of f(k) = c0 + c1 k + c2 k^2 + c3 k^3.
/// Throws RangeError if any difference needs more than 40 bits.
ForwardDifferences to_forward_difference(std::int64_t c0, std::int64_t c1, std::int64_t c2, std::int64_t c3);

/// Build a segment from polynomial coefficients in sample units.
codec::SplineSegment make_segment(std::uint64_t tau, const ForwardDifferences &d, codec::SegmentMetadata meta = {});

struct EngineSample {
    std::int64_t value = 0;
    codec::SegmentMetadata meta;
    bool segment_start = false;
    bool segment_end = false;
    bool underrun = false;
};

/// One interpolator: registers a0..a3 with wrapping 40-bit arithmetic and a
/// bounded segment FIFO.
class SplineEngine {
public:
    explicit SplineEngine(std::size_t fifo_depth = kDefaultFifoDepth);

    /// False when the FIFO is full (the caller must hold the segment).
    bool push(const codec::SplineSegment &seg);

    void enable() noexcept { enabled_ = true; }
    bool enabled() const noexcept { return enabled_; }

    /// Emit a0, then a0 += a1, a1 += a2, a2 += a3. Loads the next FIFO entry
    /// when no segment is active; on underrun holds the last value.
    EngineSample step();

    bool active() const noexcept { return remaining_ > 0; }
    bool idle() const noexcept { return !active() && fifo_.empty(); }
    std::size_t fifo_size() const noexcept { return fifo_.size(); }
    std::size_t fifo_depth() const noexcept { return depth_; }
    bool fifo_full() const noexcept { return fifo_.size() >= depth_; }
    std::uint64_t underrun_cycles() const noexcept { return underruns_; }

private:
    std::size_t depth_;
    std::deque<codec::SplineSegment> fifo_;
    std::array<std::int64_t, 4> regs_{};
    std::uint64_t remaining_ = 0;
    codec::SegmentMetadata meta_;
    std::int64_t last_ = 0;
    bool enabled_ = false;
    std::uint64_t underruns_ = 0;
};

enum class BankEventKind { Underrun, Backpressure };

struct BankEvent {
    std::uint64_t cycle = 0;
    unsigned engine = 0;
    BankEventKind kind = BankEventKind::Underrun;

    friend bool operator==(const BankEvent &, const BankEvent &) = default;
};

const char *to_string(BankEventKind k);

/// Eight engines of one channel behind a shared feed path that delivers at
/// most one segment per system clock, in arrival order.
class EngineBank {
public:
    explicit EngineBank(std::size_t fifo_depth = kDefaultFifoDepth);

    /// Queue segments for the feed path.
    void feed(unsigned engine, const codec::SplineSegment &seg);
    void feed(std::span<const lut::RoutedSegment> segments);

    /// Global trigger: all engines start on the next tick.
    void trigger();
    bool triggered() const noexcept { return triggered_; }

    struct Tick {
        bool stepped = false;
        std::array<EngineSample, kParameters> samples{};
    };

    /// Advance one system clock: move one pending segment into its FIFO
    /// (recording backpressure if that FIFO is full), then step every engine
    /// if triggered. Underrun and backpressure events are recorded once per
    /// contiguous run.
    Tick tick();

    bool drained() const noexcept;
    std::size_t pending() const noexcept { return staging_.size(); }
    std::uint64_t cycle() const noexcept { return cycle_; }
    const SplineEngine &engine(unsigned i) const { return engines_.at(i); }
    const std::vector<BankEvent> &events() const noexcept { return events_; }

private:
    std::array<SplineEngine, kParameters> engines_;
    std::deque<std::pair<unsigned, codec::SplineSegment>> staging_;
    std::vector<BankEvent> events_;
    std::array<bool, kParameters> in_underrun_{};
    bool in_backpressure_ = false;
    bool triggered_ = false;
    std::uint64_t cycle_ = 0;
};

/// Replay one segment on a fresh engine.
std::vector<std::int64_t> replay(const codec::SplineSegment &seg);
std::vector<std::int64_t> replay(std::span<const codec::SplineSegment> segs);

/// "cycle,value" rows for one engine trace.
void write_trace_csv(std::ostream &out, std::span<const std::int64_t> samples, std::uint64_t first_cycle = 0);

} // namespace awm::spline
