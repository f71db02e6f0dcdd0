#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace role {

// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

using Clock = std::function<Timestamp()>;

Timestamp system_now();

// Days since 1970-01-01 for a UTC timestamp.
std::int64_t day_number(Timestamp ts);

// "YYYY-MM-DD" for a day number.
std::string day_string(std::int64_t day);

std::int64_t days_from_civil(int year, unsigned month, unsigned day);

// Settable clock for tests and replays.
class ManualClock {
public:
    explicit ManualClock(Timestamp start = 0) : now_(start) {}
    Timestamp now() const { return now_; }
    void advance(Timestamp ms) { now_ += ms; }
    void set(Timestamp ts) { now_ = ts; }
    Clock as_clock() { return [this] { return now_; }; }

private:
    Timestamp now_;
};

}  // namespace role
