#pragma once

#include <cmath>

namespace klb {

/// Neumaier-compensated accumulator that also tracks sum |term|,
/// from which a rounding bound for the result can be formed.
template <typename Real>
class CompensatedSum {
public:
    CompensatedSum() = default;

    void add(const Real& term) {
        using std::abs;
        const Real t = sum_ + term;
        if (abs(sum_) >= abs(term)) {
            carry_ += (sum_ - t) + term;
        } else {
            carry_ += (term - t) + sum_;
        }
        sum_ = t;
        magnitude_ += abs(term);
        ++count_;
    }

    Real value() const { return sum_ + carry_; }
    Real magnitude() const { return magnitude_; }
    long count() const { return count_; }

    /// Rounding bound 2u * sum|term| (Neumaier), u the unit roundoff,
    /// assuming each term already carries at most `term_ulps` ulps of error.
    Real error_bound(const Real& unit_roundoff, const Real& term_ulps = Real(1)) const {
        return (Real(2) + term_ulps) * unit_roundoff * magnitude_;
    }

private:
    Real sum_{0};
    Real carry_{0};
    Real magnitude_{0};
    long count_ = 0;
};

}  // namespace klb
