#pragma once

#include <string>
#include <vector>

namespace convsim {

enum class EventKind { organic, bandit, conversion };

inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::organic: return "organic";
        case EventKind::bandit: return "bandit";
        case EventKind::conversion: return "conversion";
    }
    return "?";
}

struct Event {
    int t = 0;
    EventKind kind = EventKind::organic;
    int product_id = 0;  // viewed product / conversion product / recommended product
    bool clicked = false;  // bandit events only

    bool operator==(const Event&) const = default;
};

inline bool is_click(const Event& e) { return e.kind == EventKind::bandit && e.clicked; }

struct Timeline {
    int user_id = 0;
    std::vector<Event> events;

    bool operator==(const Timeline&) const = default;

    // Every non-terminal step emits exactly one organic or bandit event, so the
    // number of simulated steps is recoverable from the last event.
    int num_steps() const { return events.empty() ? 0 : events.back().t + 1; }
};

}  // namespace convsim
