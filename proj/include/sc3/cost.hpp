#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace sc3 {

// LQR cost value. A loop whose closed-loop information does not exceed its
// intrinsic entropy cannot be stabilized; its cost is represented by a
// dedicated infinite state rather than a floating-point sentinel.
class LqrCost {
public:
    static LqrCost finite(double v) { return LqrCost{true, v}; }
    static LqrCost infinite() { return LqrCost{false, 0.0}; }

    bool is_finite() const { return finite_; }
    double value() const { return value_; }

    // Infinite compares greater than every finite cost.
    friend bool operator<(const LqrCost& a, const LqrCost& b) {
        if (a.finite_ && b.finite_) return a.value_ < b.value_;
        return a.finite_ && !b.finite_;
    }
    friend bool operator<=(const LqrCost& a, const LqrCost& b) { return !(b < a); }

    LqrCost& operator+=(const LqrCost& o) {
        if (!o.finite_) finite_ = false;
        if (finite_) value_ += o.value_;
        return *this;
    }
    friend LqrCost operator+(LqrCost a, const LqrCost& b) { return a += b; }

    // For diagnostics and CSV output; infinite renders as "inf".
    double as_double() const {
        return finite_ ? value_ : std::numeric_limits<double>::infinity();
    }

private:
    LqrCost(bool f, double v) : finite_(f), value_(v) {}
    bool finite_;
    double value_;
};

} // namespace sc3
