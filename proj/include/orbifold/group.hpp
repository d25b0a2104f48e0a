#pragma once

// Finite groups as explicit Cayley tables, plus the derived conjugacy data,
// mu_m-valued 2-cocycle machinery (additive encoding), brute-force H^2, and
// the exact-rational age grading. Elements are dense indices 0..order-1.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "orbifold/errors.hpp"

namespace orbifold {

// ---------------------------------------------------------------------------
// Exact rationals (for the age grading only; denominators stay tiny).

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw ValidationError("rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    Rational operator+(const Rational& rhs) const { return Rational(num * rhs.den + rhs.num * den, den * rhs.den); }
    bool operator==(const Rational& rhs) const { return num == rhs.num && den == rhs.den; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Sum of tangent-space rotation exponents lambda_j in [0, 1), exact.
inline Rational age(const std::vector<Rational>& rotation_angles) {
    Rational sum(0, 1);
    for (const Rational& r : rotation_angles) {
        if (r.num < 0 || r.num >= r.den)
            throw ValidationError("age: rotation angle " + std::to_string(r.num) + "/" + std::to_string(r.den) +
                                  " lies outside [0, 1)");
        sum = sum + r;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Cayley tables.

class FiniteGroupTable {
public:
    /// Builds and fully validates a group from a row-major multiplication
    /// table, naming the first failing group axiom on rejection.
    static FiniteGroupTable from_rows(const std::vector<std::vector<int>>& rows) {
        const int n = static_cast<int>(rows.size());
        if (n <= 0) throw ValidationError("group table: order must be positive");
        std::vector<int> flat;
        flat.reserve(static_cast<std::size_t>(n) * n);
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(rows[r].size()) != n)
                throw ValidationError("group table: row " + std::to_string(r) + " has " +
                                      std::to_string(rows[r].size()) + " entries, expected " + std::to_string(n));
            for (int v : rows[r]) {
                if (v < 0 || v >= n)
                    throw ValidationError("group table: entry " + std::to_string(v) + " outside 0.." +
                                          std::to_string(n - 1));
                flat.push_back(v);
            }
        }
        return from_flat(n, std::move(flat));
    }

    static FiniteGroupTable from_flat(int n, std::vector<int> flat) {
        if (n <= 0 || static_cast<int>(flat.size()) != n * n)
            throw ValidationError("group table: flat table must have order^2 entries");
        for (int v : flat)
            if (v < 0 || v >= n) throw ValidationError("group table: entry outside element range");
        FiniteGroupTable g;
        g.order_ = n;
        g.table_ = std::move(flat);
        g.validate_axioms();
        return g;
    }

    int order() const { return order_; }
    int identity() const { return identity_; }
    int mul(int g, int h) const { return table_[static_cast<std::size_t>(g) * order_ + h]; }
    int inverse(int g) const { return inverse_[g]; }
    const std::vector<int>& flat_table() const { return table_; }

    bool is_abelian() const {
        for (int g = 0; g < order_; ++g)
            for (int h = g + 1; h < order_; ++h)
                if (mul(g, h) != mul(h, g)) return false;
        return true;
    }

private:
    void validate_axioms() {
        const int n = order_;
        // Latin square: rows then columns.
        std::vector<char> seen(n);
        for (int r = 0; r < n; ++r) {
            std::fill(seen.begin(), seen.end(), 0);
            for (int c = 0; c < n; ++c) seen[mul(r, c)] = 1;
            for (int v = 0; v < n; ++v)
                if (!seen[v])
                    throw ValidationError("group table: row " + std::to_string(r) +
                                          " is not a permutation of 0.." + std::to_string(n - 1));
        }
        for (int c = 0; c < n; ++c) {
            std::fill(seen.begin(), seen.end(), 0);
            for (int r = 0; r < n; ++r) seen[mul(r, c)] = 1;
            for (int v = 0; v < n; ++v)
                if (!seen[v])
                    throw ValidationError("group table: column " + std::to_string(c) +
                                          " is not a permutation of 0.." + std::to_string(n - 1));
        }
        for (int g = 0; g < n; ++g)
            for (int h = 0; h < n; ++h)
                for (int k = 0; k < n; ++k)
                    if (mul(mul(g, h), k) != mul(g, mul(h, k)))
                        throw ValidationError("group table: associativity fails at (g,h,k)=(" + std::to_string(g) +
                                              "," + std::to_string(h) + "," + std::to_string(k) + ")");
        identity_ = -1;
        for (int e = 0; e < n; ++e) {
            bool ok = true;
            for (int g = 0; g < n && ok; ++g) ok = (mul(e, g) == g && mul(g, e) == g);
            if (ok) {
                identity_ = e;
                break;
            }
        }
        if (identity_ < 0) throw ValidationError("group table: no two-sided identity element");
        inverse_.assign(n, -1);
        for (int g = 0; g < n; ++g) {
            for (int h = 0; h < n; ++h)
                if (mul(g, h) == identity_ && mul(h, g) == identity_) {
                    inverse_[g] = h;
                    break;
                }
            if (inverse_[g] < 0)
                throw ValidationError("group table: element " + std::to_string(g) + " has no two-sided inverse");
        }
    }

    int order_ = 0;
    int identity_ = 0;
    std::vector<int> table_;
    std::vector<int> inverse_;
};

inline std::vector<std::string> group_preset_names() { return {"trivial", "Z2", "Z3", "Z4", "Z2xZ2", "S3"}; }

/// Named small groups used by scenario files. S3 enumerates the permutations
/// of {0,1,2} in lexicographic one-line order and composes left-to-right:
/// (s * t)(x) = s(t(x)).
inline FiniteGroupTable group_preset(const std::string& name) {
    auto cyclic = [](int n) {
        std::vector<int> flat(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) flat[static_cast<std::size_t>(i) * n + j] = (i + j) % n;
        return FiniteGroupTable::from_flat(n, std::move(flat));
    };
    if (name == "trivial") return cyclic(1);
    if (name == "Z2") return cyclic(2);
    if (name == "Z3") return cyclic(3);
    if (name == "Z4") return cyclic(4);
    if (name == "Z2xZ2") {
        std::vector<int> flat(16);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) flat[static_cast<std::size_t>(i) * 4 + j] = i ^ j;
        return FiniteGroupTable::from_flat(4, std::move(flat));
    }
    if (name == "S3") {
        std::vector<std::vector<int>> perms;
        std::vector<int> p = {0, 1, 2};
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
        const int n = static_cast<int>(perms.size());
        auto index_of = [&](const std::vector<int>& q) {
            for (int i = 0; i < n; ++i)
                if (perms[i] == q) return i;
            return -1;
        };
        std::vector<int> flat(static_cast<std::size_t>(n) * n);
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) {
                std::vector<int> comp(3);
                for (int x = 0; x < 3; ++x) comp[x] = perms[s][perms[t][x]];
                flat[static_cast<std::size_t>(s) * n + t] = index_of(comp);
            }
        return FiniteGroupTable::from_flat(n, std::move(flat));
    }
    throw ValidationError("unknown group preset '" + name + "'");
}

/// S3 preset elements as permutations of {0,1,2}, lexicographic one-line order.
inline std::vector<std::vector<int>> s3_permutations() {
    std::vector<std::vector<int>> perms;
    std::vector<int> p = {0, 1, 2};
    do {
        perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return perms;
}

// ---------------------------------------------------------------------------
// Conjugacy data.

struct ConjugacyData {
    std::vector<std::vector<int>> classes;      // sorted by representative; each ascending
    std::vector<int> representative;            // minimal element of each class
    std::vector<std::vector<int>> centralizer;  // of the representative, ascending
    std::vector<int> class_of;                  // element -> class index
    int identity_class = 0;
};

/// Partition into conjugacy classes by brute conjugation h g h^{-1}. Sweeping
/// elements in ascending order makes the first unseen element of a class its
/// minimum, so representatives and class order are canonical.
inline ConjugacyData conjugacy_classes(const FiniteGroupTable& group) {
    const int n = group.order();
    ConjugacyData out;
    out.class_of.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        if (out.class_of[a] >= 0) continue;
        std::set<int> cls;
        for (int h = 0; h < n; ++h) cls.insert(group.mul(group.mul(h, a), group.inverse(h)));
        const int ci = static_cast<int>(out.classes.size());
        for (int x : cls) out.class_of[x] = ci;
        out.classes.emplace_back(cls.begin(), cls.end());
        out.representative.push_back(*cls.begin());
        std::vector<int> cent;
        for (int h = 0; h < n; ++h)
            if (group.mul(h, a) == group.mul(a, h)) cent.push_back(h);
        out.centralizer.push_back(std::move(cent));
    }
    out.identity_class = out.class_of[group.identity()];
    return out;
}

// ---------------------------------------------------------------------------
// mu_m-valued 2-cocycles, encoded additively as residues mod m.

struct TwoCocycle {
    int modulus = 1;          // m; values live in Z/m standing for the m-th roots of unity
    std::vector<int> values;  // order x order, row-major
};

/// Checks the (constant-in-x) cocycle identity
///   v[g][h] + v[g*h][k] == v[g][h*k] + v[h][k]  (mod m)
/// over all triples, reporting the first violation.
inline ValidationReport validate_cocycle(const FiniteGroupTable& group, const TwoCocycle& alpha) {
    if (alpha.modulus <= 0) throw ValidationError("cocycle: modulus m must be positive");
    const int n = group.order();
    const int m = alpha.modulus;
    if (static_cast<int>(alpha.values.size()) != n * n)
        throw ValidationError("cocycle: values table must be order x order");
    auto val = [&](int a, int b) {
        int v = alpha.values[static_cast<std::size_t>(a) * n + b] % m;
        return v < 0 ? v + m : v;
    };
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            for (int k = 0; k < n; ++k) {
                const int lhs = val(g, h) + val(group.mul(g, h), k);
                const int rhs = val(g, group.mul(h, k)) + val(h, k);
                if ((lhs - rhs) % m != 0)
                    return {false,
                            "cocycle condition fails at (g,h,k)=(" + std::to_string(g) + "," + std::to_string(h) +
                                "," + std::to_string(k) + ")",
                            {g, h, k}};
            }
    return {};
}

/// Coboundary of beta: (delta beta)(g,h) = beta(g) + beta(h) - beta(g*h) mod m.
inline TwoCocycle coboundary(const FiniteGroupTable& group, const std::vector<int>& beta, int m) {
    const int n = group.order();
    if (static_cast<int>(beta.size()) != n) throw ValidationError("coboundary: beta must have one value per element");
    TwoCocycle out;
    out.modulus = m;
    out.values.assign(static_cast<std::size_t>(n) * n, 0);
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h) {
            int v = (beta[g] + beta[h] - beta[group.mul(g, h)]) % m;
            if (v < 0) v += m;
            out.values[static_cast<std::size_t>(g) * n + h] = v;
        }
    return out;
}

struct CohomologySummary {
    int modulus = 1;
    long long candidates_scanned = 0;  // normalized tables enumerated
    long long cocycle_count = 0;       // normalized cocycles surviving the triple filter
    long long coboundary_count = 0;    // distinct normalized coboundaries
    int class_count = 0;
    std::vector<TwoCocycle> representatives;  // lexicographically smallest member per class
};

/// Search-space cap for h2_brute_force: m^((order-1)^2) normalized candidates.
inline constexpr long long kCohomologyGuard = 1LL << 20;

/// Exhaustive H^2(G, mu_m): enumerates normalized cocycles
/// (alpha(1,g) = alpha(g,1) = 0), filters by the cocycle identity, and
/// quotients by coboundaries of normalized beta. Normalization does not
/// change class counts; it only shrinks the search space.
inline CohomologySummary h2_brute_force(const FiniteGroupTable& group, int m) {
    if (m <= 0) throw ValidationError("h2_brute_force: modulus m must be positive");
    const int n = group.order();
    const int e = group.identity();
    std::vector<std::pair<int, int>> slots;  // free (g,h) pairs in row-major order
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            if (g != e && h != e) slots.emplace_back(g, h);
    const int free_count = static_cast<int>(slots.size());
    double log_candidates = free_count * std::log2(static_cast<double>(m));
    if (log_candidates > std::log2(static_cast<double>(kCohomologyGuard)))
        throw GuardError("h2_brute_force: search space m^((order-1)^2) = " + std::to_string(m) + "^" +
                         std::to_string(free_count) + " exceeds the guard of " + std::to_string(kCohomologyGuard) +
                         " candidates");

    CohomologySummary out;
    out.modulus = m;

    auto is_cocycle = [&](const std::vector<int>& vals) {
        for (int g = 0; g < n; ++g)
            for (int h = 0; h < n; ++h)
                for (int k = 0; k < n; ++k) {
                    const int lhs = vals[static_cast<std::size_t>(g) * n + h] +
                                    vals[static_cast<std::size_t>(group.mul(g, h)) * n + k];
                    const int rhs = vals[static_cast<std::size_t>(g) * n + group.mul(h, k)] +
                                    vals[static_cast<std::size_t>(h) * n + k];
                    if ((lhs - rhs) % m != 0) return false;
                }
        return true;
    };

    // Enumerate candidates with an odometer over the free slots (lex order).
    std::vector<int> digits(free_count, 0);
    std::vector<int> vals(static_cast<std::size_t>(n) * n, 0);
    std::vector<std::vector<int>> cocycles;
    while (true) {
        ++out.candidates_scanned;
        for (int i = 0; i < free_count; ++i)
            vals[static_cast<std::size_t>(slots[i].first) * n + slots[i].second] = digits[i];
        if (is_cocycle(vals)) cocycles.push_back(vals);
        int pos = free_count - 1;
        while (pos >= 0 && digits[pos] == m - 1) {
            digits[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++digits[pos];
    }
    out.cocycle_count = static_cast<long long>(cocycles.size());

    // Distinct normalized coboundaries: beta over non-identity elements, beta(e) = 0.
    std::set<std::vector<int>> boundaries;
    std::vector<int> beta(n, 0);
    std::vector<int> bdigits(std::max(n - 1, 0), 0);
    std::vector<int> free_elems;
    for (int g = 0; g < n; ++g)
        if (g != e) free_elems.push_back(g);
    while (true) {
        for (std::size_t i = 0; i < free_elems.size(); ++i) beta[free_elems[i]] = bdigits[i];
        boundaries.insert(coboundary(group, beta, m).values);
        int pos = static_cast<int>(bdigits.size()) - 1;
        while (pos >= 0 && bdigits[pos] == m - 1) {
            bdigits[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++bdigits[pos];
    }
    out.coboundary_count = static_cast<long long>(boundaries.size());

    // Quotient: sweeping cocycles in lex order marks each coset at its
    // lexicographically smallest member, which becomes the representative.
    std::set<std::vector<int>> visited;
    for (const std::vector<int>& alpha : cocycles) {
        if (visited.count(alpha)) continue;
        ++out.class_count;
        TwoCocycle rep;
        rep.modulus = m;
        rep.values = alpha;
        out.representatives.push_back(std::move(rep));
        for (const std::vector<int>& b : boundaries) {
            std::vector<int> shifted(alpha.size());
            for (std::size_t i = 0; i < alpha.size(); ++i) shifted[i] = (alpha[i] + b[i]) % m;
            visited.insert(std::move(shifted));
        }
    }
    return out;
}

}  // namespace orbifold
