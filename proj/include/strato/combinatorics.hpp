#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "strato/error.hpp"

namespace strato {

/// Split of {1..k} into r unordered pairs and an increasing remainder.
/// Canonical form: each pair (a, b) has a < b and pairs are sorted by first
/// element.
struct PairPartition {
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> remainder;

    friend bool operator==(const PairPartition&, const PairPartition&) = default;
    friend auto operator<=>(const PairPartition&, const PairPartition&) = default;
};

/// Gapped tuple (s_l, ..., s_1) selecting adjacent positions (s, s+1) to merge;
/// stored outermost first, s_{p+1} > s_p + 1.
struct CorrectionTuple {
    std::vector<int> s;

    friend bool operator==(const CorrectionTuple&, const CorrectionTuple&) = default;
};

// k! / (2^r r! (k-2r)!)
inline std::uint64_t pair_partition_count(int k, int r) {
    std::uint64_t n = 1;
    for (int i = 1; i <= k; ++i) n *= static_cast<std::uint64_t>(i);
    std::uint64_t d = 1;
    for (int i = 0; i < r; ++i) d *= 2;
    for (int i = 1; i <= r; ++i) d *= static_cast<std::uint64_t>(i);
    for (int i = 1; i <= k - 2 * r; ++i) d *= static_cast<std::uint64_t>(i);
    return n / d;
}

inline bool is_valid(const PairPartition& p, int k) {
    std::vector<int> seen(static_cast<std::size_t>(k) + 1, 0);
    int prev_first = 0;
    for (auto [a, b] : p.pairs) {
        if (!(a < b) || a < 1 || b > k || a <= prev_first) return false;
        prev_first = a;
        ++seen[static_cast<std::size_t>(a)];
        ++seen[static_cast<std::size_t>(b)];
    }
    for (std::size_t i = 0; i < p.remainder.size(); ++i) {
        const int q = p.remainder[i];
        if (q < 1 || q > k || (i > 0 && p.remainder[i - 1] >= q)) return false;
        ++seen[static_cast<std::size_t>(q)];
    }
    for (int i = 1; i <= k; ++i) {
        if (seen[static_cast<std::size_t>(i)] != 1) return false;
    }
    return true;
}

/// All partitions of {1..k} into r pairs plus remainder, in lexicographic
/// order of their canonical form.
inline std::vector<PairPartition> pair_partitions(int k, int r) {
    if (k < 2 || r < 1 || 2 * r > k) throw contract_error("pair count r must satisfy 1 <= r <= floor(k/2)");
    std::vector<PairPartition> out;
    std::vector<bool> used(static_cast<std::size_t>(k) + 1, false);
    PairPartition cur;

    auto recurse = [&](auto&& self) -> void {
        int e = 1;
        while (e <= k && used[static_cast<std::size_t>(e)]) ++e;
        if (e > k) {
            if (static_cast<int>(cur.pairs.size()) == r) out.push_back(cur);
            return;
        }
        used[static_cast<std::size_t>(e)] = true;
        if (static_cast<int>(cur.remainder.size()) < k - 2 * r) {
            cur.remainder.push_back(e);
            self(self);
            cur.remainder.pop_back();
        }
        if (static_cast<int>(cur.pairs.size()) < r) {
            for (int f = e + 1; f <= k; ++f) {
                if (used[static_cast<std::size_t>(f)]) continue;
                used[static_cast<std::size_t>(f)] = true;
                cur.pairs.emplace_back(e, f);
                self(self);
                cur.pairs.pop_back();
                used[static_cast<std::size_t>(f)] = false;
            }
        }
        used[static_cast<std::size_t>(e)] = false;
    };
    recurse(recurse);
    std::sort(out.begin(), out.end());
    return out;
}

/// The index set A_{k,l}: tuples with entries in 1..k-1 and gaps of at least 2.
inline std::vector<CorrectionTuple> correction_index_sets(int k, int l) {
    if (l < 1 || 2 * l > k) throw contract_error("depth l must satisfy 1 <= l <= floor(k/2)");
    std::vector<std::vector<int>> ascending;
    std::vector<int> cur;
    auto recurse = [&](auto&& self, int next_min) -> void {
        if (static_cast<int>(cur.size()) == l) {
            ascending.push_back(cur);
            return;
        }
        for (int s = next_min; s <= k - 1; ++s) {
            cur.push_back(s);
            self(self, s + 2);
            cur.pop_back();
        }
    };
    recurse(recurse, 1);
    std::vector<CorrectionTuple> out;
    for (auto& a : ascending) out.push_back(CorrectionTuple{{a.rbegin(), a.rend()}});
    return out;
}

inline bool is_valid(const CorrectionTuple& c, int k) {
    for (std::size_t i = 0; i < c.s.size(); ++i) {
        if (c.s[i] < 1 || c.s[i] > k - 1) return false;
        if (i > 0 && !(c.s[i - 1] > c.s[i] + 1)) return false;
    }
    return !c.s.empty();
}

}  // namespace strato
