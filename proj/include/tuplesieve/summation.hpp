#ifndef TUPLESIEVE_SUMMATION_HPP
#define TUPLESIEVE_SUMMATION_HPP

#include <cmath>
#include <span>

namespace tuplesieve {

// Neumaier-compensated running sum. Used wherever more than ~10^6 terms are
// accumulated; plain addition loses the digits the correlation ratios need.
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    CompensatedSum& operator+=(double x)
    {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        return *this;
    }

    CompensatedSum& operator+=(const CompensatedSum& other)
    {
        *this += other.sum_;
        *this += other.comp_;
        return *this;
    }

    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs)
{
    CompensatedSum s;
    for (double x : xs) {
        s += x;
    }
    return s.value();
}

} // namespace tuplesieve

#endif // TUPLESIEVE_SUMMATION_HPP
