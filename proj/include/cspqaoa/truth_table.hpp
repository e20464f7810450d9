#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cspqaoa/common.hpp"

namespace cspqaoa {

/// Boolean function on k bits given as its full value table.  Row i holds the
/// truth value for the assignment whose bit q is (i >> q) & 1, i.e. the first
/// clause position is the least-significant bit of the row index.
struct TruthTable {
    int k = 0;
    std::vector<bool> values;

    TruthTable() = default;

    TruthTable(int k_bits, std::vector<bool> rows) : k(k_bits), values(std::move(rows)) {
        if (k < 1) throw Error("truth table needs k >= 1");
        if (values.size() != (std::size_t{1} << k))
            throw Error(strf("truth table for k=%d needs %llu rows, got %zu", k,
                             static_cast<unsigned long long>(1ULL << k), values.size()));
    }

    std::size_t rows() const { return values.size(); }

    bool operator==(const TruthTable& other) const {
        return k == other.k && values == other.values;
    }
};

/// Truth table that depends only on the number of true inputs; entry h of
/// weight_values is the value on rows of popcount h.
struct HammingSpec {
    int k = 0;
    std::vector<bool> weight_values;

    HammingSpec() = default;

    HammingSpec(int k_bits, std::vector<bool> by_weight) : k(k_bits), weight_values(std::move(by_weight)) {
        if (k < 1) throw Error("hamming table needs k >= 1");
        if (weight_values.size() != static_cast<std::size_t>(k) + 1)
            throw Error(strf("hamming spec for k=%d needs %d weight values, got %zu", k, k + 1,
                             weight_values.size()));
    }

    TruthTable expand() const {
        std::vector<bool> rows(std::size_t{1} << k);
        for (std::size_t i = 0; i < rows.size(); ++i)
            rows[i] = weight_values[std::popcount(i)];
        return TruthTable(k, std::move(rows));
    }
};

/// Number of satisfying rows of the table.
inline int count_true_rows(const TruthTable& table) {
    int count = 0;
    for (bool v : table.values) count += v;
    return count;
}

/// Returns the weight profile if the table's value depends only on the row
/// popcount, and nothing otherwise.
inline std::optional<HammingSpec> try_hamming_spec(const TruthTable& table) {
    std::vector<bool> by_weight(static_cast<std::size_t>(table.k) + 1);
    std::vector<bool> seen(by_weight.size(), false);
    for (std::size_t i = 0; i < table.rows(); ++i) {
        int h = std::popcount(i);
        if (!seen[h]) {
            seen[h] = true;
            by_weight[h] = table.values[i];
        } else if (by_weight[h] != table.values[i]) {
            return std::nullopt;
        }
    }
    return HammingSpec(table.k, std::move(by_weight));
}

/// True iff the table is satisfied exactly on rows of popcount 1.
inline bool is_one_in_k(const TruthTable& table) {
    for (std::size_t i = 0; i < table.rows(); ++i)
        if (table.values[i] != (std::popcount(i) == 1)) return false;
    return true;
}

/// True iff the table is the not-all-equal table: false exactly on the
/// all-false and all-true rows.
inline bool is_nae(const TruthTable& table) {
    for (std::size_t i = 0; i < table.rows(); ++i) {
        int h = std::popcount(i);
        if (table.values[i] != (h != 0 && h != table.k)) return false;
    }
    return true;
}

namespace ttdetail {

inline int parse_k(const std::string& spec, std::size_t from, std::size_t to) {
    if (from >= to) throw Error("truth table spec: missing k in '" + spec + "'");
    int k = 0;
    for (std::size_t i = from; i < to; ++i) {
        char c = spec[i];
        if (c < '0' || c > '9') throw Error("truth table spec: bad k in '" + spec + "'");
        k = k * 10 + (c - '0');
        if (k > 30) throw Error("truth table spec: k too large in '" + spec + "'");
    }
    if (k < 1) throw Error("truth table spec: k must be >= 1 in '" + spec + "'");
    return k;
}

inline std::vector<bool> parse_bits(const std::string& spec, std::size_t from, std::size_t count,
                                    const char* what) {
    if (spec.size() - from != count)
        throw Error(strf("truth table spec: %s needs %zu bits, got %zu in '%s'", what, count,
                         spec.size() - from, spec.c_str()));
    std::vector<bool> bits(count);
    for (std::size_t i = 0; i < count; ++i) {
        char c = spec[from + i];
        if (c != '0' && c != '1') throw Error("truth table spec: expected 0/1 in '" + spec + "'");
        bits[i] = c == '1';
    }
    return bits;
}

}  // namespace ttdetail

/// Parses a table spec: a 0/1 string of length 2^k (character i = row i), or
/// one of the named families `ksat:<k>`, `nae:<k>`, `1in:<k>`,
/// `hamming:<k>:<k+1 bits by weight>`.
inline TruthTable parse_truth_table(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) {
        if (spec.empty()) throw Error("truth table spec: empty");
        std::size_t len = spec.size();
        int k = 0;
        while ((std::size_t{1} << k) < len) ++k;
        if ((std::size_t{1} << k) != len || k < 1)
            throw Error("truth table spec: bit string length must be 2^k with k >= 1 in '" + spec +
                        "'");
        return TruthTable(k, ttdetail::parse_bits(spec, 0, len, "table"));
    }

    std::string family = spec.substr(0, colon);
    if (family == "hamming") {
        auto colon2 = spec.find(':', colon + 1);
        if (colon2 == std::string::npos)
            throw Error("truth table spec: hamming needs <k>:<bits> in '" + spec + "'");
        int k = ttdetail::parse_k(spec, colon + 1, colon2);
        auto bits = ttdetail::parse_bits(spec, colon2 + 1, static_cast<std::size_t>(k) + 1,
                                         "hamming weights");
        return HammingSpec(k, std::move(bits)).expand();
    }

    int k = ttdetail::parse_k(spec, colon + 1, spec.size());
    std::vector<bool> rows(std::size_t{1} << k);
    if (family == "ksat") {
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i != 0;
    } else if (family == "nae") {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            int h = std::popcount(i);
            rows[i] = h != 0 && h != k;
        }
    } else if (family == "1in") {
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = std::popcount(i) == 1;
    } else {
        throw Error("truth table spec: unknown family '" + family + "'");
    }
    return TruthTable(k, std::move(rows));
}

}  // namespace cspqaoa
