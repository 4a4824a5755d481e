#include "cpree/event_log.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "cpree/rng.hpp"

namespace cpree {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::BgFlip: return "bg_flip";
        case EventKind::Recovery1: return "recovery1";
        case EventKind::RecoveryExtra: return "recovery_extra";
        case EventKind::Arrow: return "arrow";
    }
    return "?";
}

bool timeline_before(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.direction != b.direction) return a.direction < b.direction;
    return a.site < b.site;
}

namespace {

void append_stream(std::vector<Event>& out, std::uint64_t seed, std::uint32_t kind, std::uint64_t code,
                   std::uint32_t site, double rate, double horizon, EventKind ek, std::uint8_t dir) {
    if (!(rate > 0.0)) return;
    Stream stream(seed, kind, code);
    double t = 0.0;
    for (;;) {
        t += stream.next_exponential(rate);
        const double mark = ek == EventKind::BgFlip ? stream.next_uniform() : 0.0;
        if (t > horizon) break;
        out.push_back(Event{t, mark, site, ek, dir});
    }
}

// Counting sort into ~4 events per time bucket, then timeline_before inside
// each bucket. Same order as a full comparison sort, several times faster.
void sort_timeline(std::vector<Event>& events, double horizon) {
    const std::size_t n = events.size();
    if (n < 64) {
        std::sort(events.begin(), events.end(), timeline_before);
        return;
    }
    const std::size_t buckets = n / 4 + 1;
    const double scale = static_cast<double>(buckets) / horizon;
    auto bucket_of = [&](const Event& e) {
        return std::min(buckets - 1, static_cast<std::size_t>(e.time * scale));
    };
    std::vector<std::uint32_t> start(buckets + 1, 0);
    for (const Event& e : events) ++start[bucket_of(e) + 1];
    for (std::size_t b = 0; b < buckets; ++b) start[b + 1] += start[b];
    std::vector<Event> sorted(n);
    std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
    for (const Event& e : events) sorted[fill[bucket_of(e)]++] = e;
    for (std::size_t b = 0; b < buckets; ++b) {
        auto first = sorted.begin() + start[b], last = sorted.begin() + start[b + 1];
        if (last - first > 1) std::sort(first, last, timeline_before);
    }
    events.swap(sorted);
}

void validate_window(const Params& params, const Box& box, double horizon) {
    params.validate();
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
    if (box.half_width < 0) throw std::invalid_argument("box half-width must be nonnegative");
}

}  // namespace

EventLog EventLog::from_events(const Params& params, const Box& box, double horizon, std::uint64_t seed,
                               std::vector<Event> events) {
    validate_window(params, box, horizon);
    auto storage = std::make_shared<Storage>(Storage{Lattice(params.d, box), horizon, seed, {}, {}, {}});
    const Lattice& lat = storage->lattice;
    for (const Event& e : events) {
        if (e.site >= lat.size()) throw std::invalid_argument("event site outside box");
        if (!(e.time > 0.0 && e.time <= horizon)) throw std::invalid_argument("event time outside (0, horizon]");
        if (e.kind == EventKind::Arrow && e.direction >= lat.directions())
            throw std::invalid_argument("arrow direction out of range");
    }
    sort_timeline(events, horizon);

    storage->site_offsets.assign(lat.size() + 1, 0);
    for (const Event& e : events) ++storage->site_offsets[e.site + 1];
    for (std::size_t s = 0; s < lat.size(); ++s) storage->site_offsets[s + 1] += storage->site_offsets[s];
    storage->slots.resize(events.size());
    std::vector<std::uint32_t> fill(storage->site_offsets.begin(), storage->site_offsets.end() - 1);
    for (std::uint32_t i = 0; i < events.size(); ++i) storage->slots[fill[events[i].site]++] = i;
    storage->timeline = std::move(events);
    return EventLog(params, std::move(storage));
}

std::span<const std::uint32_t> EventLog::site_slots(std::uint32_t site) const {
    if (site >= lattice().size()) throw std::out_of_range("site index outside box");
    const auto& s = *storage_;
    return std::span<const std::uint32_t>(s.slots).subspan(s.site_offsets[site],
                                                           s.site_offsets[site + 1] - s.site_offsets[site]);
}

std::vector<Event> EventLog::site_events(std::uint32_t site) const {
    std::vector<Event> out;
    for (std::uint32_t slot : site_slots(site)) out.push_back(storage_->timeline[slot]);
    return out;
}

EventLog EventLog::with_p(double p) const {
    Params q = params_;
    q.p = p;
    q.validate();
    return EventLog(q, storage_);
}

bool operator==(const EventLog& a, const EventLog& b) {
    const Params& pa = a.params_;
    const Params& pb = b.params_;
    return pa.d == pb.d && pa.gamma == pb.gamma && pa.delta0 == pb.delta0 && pa.delta1 == pb.delta1 &&
           pa.p == pb.p && a.box().half_width == b.box().half_width && a.box().boundary == b.box().boundary &&
           a.horizon() == b.horizon() && a.seed() == b.seed() &&
           std::ranges::equal(a.timeline(), b.timeline());
}

EventLog build_event_log(const Params& params, const Box& box, double horizon, std::uint64_t seed) {
    validate_window(params, box, horizon);
    const Lattice lat(params.d, box);
    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(1.05 * params.total_rate() * horizon * lat.size()) + 16);
    for (std::uint32_t s = 0; s < lat.size(); ++s) {
        const std::uint64_t code = Lattice::site_code(lat.point(s));
        append_stream(events, seed, stream_kind::bg_flip, code, s, params.gamma, horizon, EventKind::BgFlip, 0);
        append_stream(events, seed, stream_kind::recovery1, code, s, params.delta1, horizon, EventKind::Recovery1, 0);
        append_stream(events, seed, stream_kind::recovery_extra, code, s, params.delta0 - params.delta1, horizon,
                      EventKind::RecoveryExtra, 0);
        for (int dir = 0; dir < lat.directions(); ++dir) {
            append_stream(events, seed, stream_kind::arrow_base + static_cast<std::uint32_t>(dir), code, s, 1.0,
                          horizon, EventKind::Arrow, static_cast<std::uint8_t>(dir));
        }
    }
    return EventLog::from_events(params, box, horizon, seed, std::move(events));
}

std::vector<Event> events_in(const EventLog& log, const Point& site, double s, double t) {
    if (!(s >= 0.0 && s < t && t <= log.horizon())) throw std::invalid_argument("interval must satisfy 0 <= s < t <= horizon");
    const std::uint32_t idx = log.lattice().index(site);
    std::vector<Event> out;
    for (std::uint32_t slot : log.site_slots(idx)) {
        const Event& e = log.timeline()[slot];
        if (e.time > s && e.time <= t) out.push_back(e);
    }
    return out;
}

// Serialization ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'P', 'R', 'E'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("truncated event log");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

void dump_event_log(const EventLog& log, std::ostream& out) {
    out.write(kMagic, 4);
    put<std::uint16_t>(out, kVersion);
    const Params& p = log.params();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.d));
    put<double>(out, p.gamma);
    put<double>(out, p.delta0);
    put<double>(out, p.delta1);
    put<double>(out, p.p);
    put<std::int32_t>(out, log.box().half_width);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(log.box().boundary));
    put<double>(out, log.horizon());
    put<std::uint64_t>(out, log.seed());
    put<std::uint64_t>(out, log.lattice().size());
    for (std::uint32_t s = 0; s < log.lattice().size(); ++s) {
        const auto slots = log.site_slots(s);
        put<std::uint64_t>(out, slots.size());
        for (std::uint32_t slot : slots) {
            const Event& e = log.timeline()[slot];
            put<double>(out, e.time);
            put<std::uint8_t>(out, static_cast<std::uint8_t>(e.kind));
            put<std::uint8_t>(out, e.direction);
            put<double>(out, e.mark);
        }
    }
}

EventLog load_event_log(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad event log magic");
    if (get<std::uint16_t>(in) != kVersion) throw std::runtime_error("unsupported event log version");
    Params p;
    p.d = static_cast<int>(get<std::uint32_t>(in));
    p.gamma = get<double>(in);
    p.delta0 = get<double>(in);
    p.delta1 = get<double>(in);
    p.p = get<double>(in);
    Box box;
    box.half_width = get<std::int32_t>(in);
    const auto boundary = get<std::uint8_t>(in);
    if (boundary > 1) throw std::runtime_error("bad boundary tag");
    box.boundary = static_cast<Boundary>(boundary);
    const double horizon = get<double>(in);
    const auto seed = get<std::uint64_t>(in);
    const auto n_sites = get<std::uint64_t>(in);
    const Lattice lat(p.d, box);
    if (n_sites != lat.size()) throw std::runtime_error("site count does not match box");
    std::vector<Event> events;
    for (std::uint32_t s = 0; s < n_sites; ++s) {
        const auto count = get<std::uint64_t>(in);
        for (std::uint64_t i = 0; i < count; ++i) {
            Event e;
            e.site = s;
            e.time = get<double>(in);
            const auto kind = get<std::uint8_t>(in);
            if (kind > 3) throw std::runtime_error("bad event kind");
            e.kind = static_cast<EventKind>(kind);
            e.direction = get<std::uint8_t>(in);
            e.mark = get<double>(in);
            events.push_back(e);
        }
    }
    return EventLog::from_events(p, box, horizon, seed, std::move(events));
}

}  // namespace cpree
