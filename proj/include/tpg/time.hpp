#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tpg {

using Time = std::int64_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when an explicit work budget runs out.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

constexpr Time time_max = std::numeric_limits<Time>::max() / 4;

constexpr Time sat_add(Time a, Time b)
{
    Time r = a + b;
    if (r > time_max) return time_max;
    return r;
}

// Upper end of a bound interval: a natural number or +infinity.
class Bound {
public:
    constexpr Bound() = default;
    constexpr Bound(Time v) : v_(v) {}

    static constexpr Bound infinity()
    {
        Bound b;
        b.inf_ = true;
        return b;
    }

    constexpr bool is_inf() const { return inf_; }
    constexpr bool is_finite() const { return !inf_; }

    constexpr Time value() const
    {
        if (inf_) throw Error("value() of an unbounded bound");
        return v_;
    }

    // Saturating: inf + k = inf.
    constexpr Bound plus(Time d) const { return inf_ ? *this : Bound(sat_add(v_, d)); }
    constexpr Bound plus(Bound o) const
    {
        if (inf_ || o.inf_) return infinity();
        return Bound(sat_add(v_, o.v_));
    }

    // Finite value or `cap` when unbounded.
    constexpr Time capped(Time cap) const { return inf_ ? cap : (v_ < cap ? v_ : cap); }

    friend constexpr bool operator==(Bound a, Bound b)
    {
        return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
    }
    friend constexpr bool operator<=(Time t, Bound b) { return b.inf_ || t <= b.v_; }
    friend constexpr bool operator<(Time t, Bound b) { return b.inf_ || t < b.v_; }
    friend constexpr bool operator<(Bound b, Time t) { return !b.inf_ && b.v_ < t; }
    friend constexpr bool operator<=(Bound a, Bound b)
    {
        if (b.inf_) return true;
        if (a.inf_) return false;
        return a.v_ <= b.v_;
    }

    std::string str() const { return inf_ ? "inf" : std::to_string(v_); }

private:
    Time v_ = 0;
    bool inf_ = false;
};

struct Interval {
    Time lo = 0;
    Bound hi = 0;

    constexpr bool contains(Time t) const { return lo <= t && t <= hi; }
    constexpr bool empty() const { return hi < lo; }
    constexpr bool within(const Interval& o) const { return o.lo <= lo && hi <= o.hi; }
    friend constexpr bool operator==(const Interval& a, const Interval& b)
    {
        return a.lo == b.lo && a.hi == b.hi;
    }
    std::string str() const { return "[" + std::to_string(lo) + "," + hi.str() + "]"; }
};

} // namespace tpg
