#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cpree/lattice.hpp"

namespace cpree {

// Tie order at equal times follows the enumerator order.
enum class EventKind : std::uint8_t { BgFlip = 0, Recovery1 = 1, RecoveryExtra = 2, Arrow = 3 };

const char* to_string(EventKind k);

struct Event {
    double time = 0.0;
    double mark = 0.0;           // BgFlip only: flips to 1 iff mark < p
    std::uint32_t site = 0;      // index into the log's lattice
    EventKind kind = EventKind::BgFlip;
    std::uint8_t direction = 0;  // Arrow only

    bool flips_to_one(double p) const { return mark < p; }
    friend bool operator==(const Event&, const Event&) = default;
};

// Total order used for the global timeline: time, kind, direction, site.
bool timeline_before(const Event& a, const Event& b);

// The realized graphical representation on [-L, L]^d x (0, horizon].
// Immutable; copies share storage. The event streams do not depend on p, so
// with_p() re-reads the same randomness at another background bias.
class EventLog {
public:
    // Assembles a log from explicit events (fixtures, deserialization).
    static EventLog from_events(const Params& params, const Box& box, double horizon,
                                std::uint64_t seed, std::vector<Event> events);

    const Params& params() const { return params_; }
    const Box& box() const { return storage_->lattice.box(); }
    const Lattice& lattice() const { return storage_->lattice; }
    double horizon() const { return storage_->horizon; }
    std::uint64_t seed() const { return storage_->seed; }

    // All events sorted by timeline_before.
    std::span<const Event> timeline() const { return storage_->timeline; }
    // Positions in timeline() of the events at one site, in time order.
    std::span<const std::uint32_t> site_slots(std::uint32_t site) const;
    std::vector<Event> site_events(std::uint32_t site) const;
    std::size_t size() const { return storage_->timeline.size(); }

    EventLog with_p(double p) const;

    friend bool operator==(const EventLog& a, const EventLog& b);

private:
    struct Storage {
        Lattice lattice;
        double horizon;
        std::uint64_t seed;
        std::vector<Event> timeline;
        std::vector<std::uint32_t> site_offsets;
        std::vector<std::uint32_t> slots;
    };

    EventLog(const Params& params, std::shared_ptr<const Storage> storage)
        : params_(params), storage_(std::move(storage)) {}

    Params params_;
    std::shared_ptr<const Storage> storage_;
};

// Superposed Poisson streams per site: BgFlip at rate gamma with uniform marks,
// Recovery1 at delta1, RecoveryExtra at delta0 - delta1, one arrow stream of
// rate 1 per direction. Each (site, kind) stream is keyed by (seed, site
// coordinates, kind), so logs over larger boxes or longer horizons agree with
// smaller ones wherever both are defined.
EventLog build_event_log(const Params& params, const Box& box, double horizon, std::uint64_t seed);

// Events at `site` with time in (s, t].
std::vector<Event> events_in(const EventLog& log, const Point& site, double s, double t);

// Binary fixture format, little-endian: "CPRE", u16 version, params, box,
// horizon, seed, then per site a u64 count and that many events.
void dump_event_log(const EventLog& log, std::ostream& out);
EventLog load_event_log(std::istream& in);

}  // namespace cpree
