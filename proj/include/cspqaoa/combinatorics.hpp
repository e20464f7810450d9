#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cspqaoa/common.hpp"

namespace cspqaoa {

using BigInt = boost::multiprecision::cpp_int;

/// q! as an exact big integer (q >= 0).
inline BigInt factorial(int64_t q) {
    if (q < 0) throw Error("factorial: negative argument");
    BigInt f = 1;
    for (int64_t i = 2; i <= q; ++i) f *= i;
    return f;
}

/// Exact multinomial coefficient q! / (parts[0]! ... parts[r-1]!).
/// Vanishing convention: any negative part, or parts not summing to q, gives 0.
inline BigInt multinomial(int64_t q, std::span<const int64_t> parts) {
    int64_t sum = 0;
    for (int64_t p : parts) {
        if (p < 0) return 0;
        sum += p;
    }
    if (sum != q) return 0;
    BigInt result = factorial(q);
    for (int64_t p : parts) result /= factorial(p);
    return result;
}

/// Exact binomial coefficient with the same vanishing convention.
inline BigInt binomial(int64_t a, int64_t b) {
    if (b < 0 || b > a || a < 0) return 0;
    std::array<int64_t, 2> parts{b, a - b};
    return multinomial(a, parts);
}

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log of the multinomial coefficient via log-Gamma, absolute error <= 1e-12
/// for q <= 64. Vanishing cases return the log-zero sentinel (-infinity).
inline double log_multinomial(int64_t q, std::span<const int64_t> parts) {
    int64_t sum = 0;
    for (int64_t p : parts) {
        if (p < 0) return kLogZero;
        sum += p;
    }
    if (sum != q) return kLogZero;
    double result = std::lgamma(static_cast<double>(q) + 1.0);
    for (int64_t p : parts) result -= std::lgamma(static_cast<double>(p) + 1.0);
    return result;
}

/// Number of compositions of q into `parts` ordered non-negative parts.
inline BigInt count_configs(int64_t q, int parts) {
    return binomial(q + parts - 1, parts - 1);
}

/// Streaming enumeration of all compositions of q into a fixed number of
/// ordered non-negative parts, in strictly increasing lexicographic order
/// (first (0,...,0,q), last (q,0,...,0)). Nothing is materialized, so the
/// 8-part space at q ~ 30 (~10^7 entries) iterates in constant memory.
class CompositionRange {
public:
    CompositionRange(int64_t q, int parts) : q_(q), parts_(parts) {
        if (q < 0 || parts < 1) throw Error("CompositionRange: need q >= 0 and parts >= 1");
    }

    class Iterator {
    public:
        using value_type = std::vector<int64_t>;
        using difference_type = std::ptrdiff_t;
        using iterator_category = std::input_iterator_tag;
        using pointer = const value_type*;
        using reference = const value_type&;

        Iterator() = default;
        Iterator(int64_t q, int parts, bool at_end) : current_(parts, 0), done_(at_end) {
            if (!at_end) current_.back() = q;
        }

        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }

        Iterator& operator++() {
            // Advance to the lexicographic successor: locate the last nonzero
            // part t; its left neighbor gains 1 and the remainder moves to the
            // final slot (the smallest suffix with the remaining sum).
            int t = static_cast<int>(current_.size()) - 1;
            while (t >= 0 && current_[t] == 0) --t;
            if (t <= 0) {
                done_ = true;
                return *this;
            }
            int64_t rest = current_[t] - 1;
            current_[t - 1] += 1;
            for (size_t j = t; j < current_.size(); ++j) current_[j] = 0;
            current_.back() = rest;
            return *this;
        }

        Iterator operator++(int) {
            Iterator before = *this;
            ++*this;
            return before;
        }

        bool operator==(const Iterator& rhs) const {
            if (done_ != rhs.done_) return false;
            return done_ || current_ == rhs.current_;
        }
        bool operator!=(const Iterator& rhs) const { return !(*this == rhs); }

    private:
        std::vector<int64_t> current_;
        bool done_ = true;
    };

    Iterator begin() const { return Iterator(q_, parts_, false); }
    Iterator end() const { return Iterator(q_, parts_, true); }

private:
    int64_t q_;
    int parts_;
};

/// Counts of the 8 positionwise bit triplets s = (s1, s0, sm1) of a bitstring
/// triplet, indexed by 4*s1 + 2*s0 + s(-1).
struct ConfigNumbers {
    std::array<int64_t, 8> n{};

    int64_t weight() const {
        int64_t w = 0;
        for (int64_t v : n) w += v;
        return w;
    }
    bool operator==(const ConfigNumbers&) const = default;
};

/// The four collapsed cells n'_00, n'_01, n'_10, n'_11 (indexed 2*s0 + sm1),
/// where cell c merges triplet counts c and 7-c (a triplet and its bitwise
/// complement land in the same cell).
struct ReducedConfigNumbers {
    std::array<int64_t, 4> cells{};

    int64_t weight() const { return cells[0] + cells[1] + cells[2] + cells[3]; }
    bool operator==(const ReducedConfigNumbers&) const = default;
};

/// Positionwise complement of all three bitstrings: n̄_s = n_{s̄}.
inline ConfigNumbers negate_config(const ConfigNumbers& c) {
    ConfigNumbers out;
    for (int s = 0; s < 8; ++s) out.n[s] = c.n[7 - s];
    return out;
}

inline ReducedConfigNumbers reduce_config(const ConfigNumbers& c) {
    ReducedConfigNumbers out;
    for (int cell = 0; cell < 4; ++cell) out.cells[cell] = c.n[cell] + c.n[7 - cell];
    return out;
}

/// Configuration numbers of an explicit triplet of n-bit assignments
/// (bit j of each word is variable j's value).
inline ConfigNumbers config_of_triplet(int n, uint64_t z1, uint64_t z0, uint64_t zm1) {
    if (n < 0 || n > 64) throw Error("config_of_triplet: n out of range");
    ConfigNumbers out;
    for (int j = 0; j < n; ++j) {
        int s = static_cast<int>(((z1 >> j) & 1) << 2 | ((z0 >> j) & 1) << 1 | ((zm1 >> j) & 1));
        out.n[s] += 1;
    }
    return out;
}

}  // namespace cspqaoa
