#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

// Exact integer linear algebra for finitely generated abelian groups and the
// cohomology of 2-sphere bundles over closed oriented 4-manifolds.
//
// Groups are stored in invariant-factor normal form and compared only in that
// form. All arithmetic is arbitrary-precision.
namespace twistorlab::homology {

using BigInt = boost::multiprecision::cpp_int;

class HomologyError : public std::runtime_error {
  public:
    explicit HomologyError(const std::string& what) : std::runtime_error(what) {}
};

// Dense integer matrix, row-major.
struct IntMat {
    int rows = 0;
    int cols = 0;
    std::vector<BigInt> a;

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

    BigInt& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    const BigInt& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

    static IntMat identity(int n) {
        IntMat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }
};

inline IntMat mat_mul(const IntMat& x, const IntMat& y) {
    if (x.cols != y.rows) throw HomologyError("matrix dimension mismatch");
    IntMat out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            if (x.at(i, k) == 0) continue;
            for (int j = 0; j < y.cols; ++j) out.at(i, j) += x.at(i, k) * y.at(k, j);
        }
    return out;
}

// Fraction-free determinant (Bareiss).
inline BigInt mat_det(const IntMat& m) {
    if (m.rows != m.cols) throw HomologyError("determinant of non-square matrix");
    int n = m.rows;
    if (n == 0) return 1;
    IntMat w = m;
    BigInt prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (w.at(k, k) == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (w.at(i, k) != 0) {
                    p = i;
                    break;
                }
            if (p < 0) return 0;
            for (int j = 0; j < n; ++j) std::swap(w.at(k, j), w.at(p, j));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                w.at(i, j) = (w.at(i, j) * w.at(k, k) - w.at(i, k) * w.at(k, j)) / prev;
        prev = w.at(k, k);
    }
    return sign * w.at(n - 1, n - 1);
}

struct SmithResult {
    IntMat d;  // u * m * v
    IntMat u;
    IntMat v;
    std::vector<BigInt> invariant_factors;  // nonzero diagonal, divisibility chain
};

// Diagonalizes m by unimodular row and column operations. The returned
// diagonal is nonnegative with d1 | d2 | ... and u*m*v = d, det u = +-1,
// det v = +-1.
inline SmithResult smith_normal_form(const IntMat& m) {
    SmithResult res;
    res.d = m;
    res.u = IntMat::identity(m.rows);
    res.v = IntMat::identity(m.cols);
    IntMat& d = res.d;
    IntMat& u = res.u;
    IntMat& v = res.v;

    auto swap_rows = [&](int i, int j) {
        for (int c = 0; c < d.cols; ++c) std::swap(d.at(i, c), d.at(j, c));
        for (int c = 0; c < u.cols; ++c) std::swap(u.at(i, c), u.at(j, c));
    };
    auto swap_cols = [&](int i, int j) {
        for (int r = 0; r < d.rows; ++r) std::swap(d.at(r, i), d.at(r, j));
        for (int r = 0; r < v.rows; ++r) std::swap(v.at(r, i), v.at(r, j));
    };
    auto add_row = [&](int dst, int src, const BigInt& k) {  // row dst += k * row src
        for (int c = 0; c < d.cols; ++c) d.at(dst, c) += k * d.at(src, c);
        for (int c = 0; c < u.cols; ++c) u.at(dst, c) += k * u.at(src, c);
    };
    auto add_col = [&](int dst, int src, const BigInt& k) {
        for (int r = 0; r < d.rows; ++r) d.at(r, dst) += k * d.at(r, src);
        for (int r = 0; r < v.rows; ++r) v.at(r, dst) += k * v.at(r, src);
    };
    auto negate_row = [&](int i) {
        for (int c = 0; c < d.cols; ++c) d.at(i, c) = -d.at(i, c);
        for (int c = 0; c < u.cols; ++c) u.at(i, c) = -u.at(i, c);
    };

    // Nearest-integer quotient: |a - q b| <= |b| / 2.
    auto nearest_quotient = [](const BigInt& a, const BigInt& b) {
        BigInt q = a / b;
        BigInt r2 = (a - q * b) * 2;
        BigInt babs = b < 0 ? BigInt(-b) : b;
        if (r2 > babs)
            q += b > 0 ? 1 : -1;
        else if (-r2 > babs)
            q -= b > 0 ? 1 : -1;
        return q;
    };

    int t = 0;
    int limit = std::min(d.rows, d.cols);
    while (t < limit) {
        bool block_zero = false;
        for (;;) {
            // Re-select the smallest nonzero pivot before every sweep; with
            // nearest-integer quotients each round at least halves it, which
            // keeps the intermediate entries from exploding.
            int pi = -1, pj = -1;
            BigInt best = 0;
            for (int i = t; i < d.rows; ++i)
                for (int j = t; j < d.cols; ++j) {
                    if (d.at(i, j) == 0) continue;
                    BigInt mag = abs(d.at(i, j));
                    if (pi < 0 || mag < best) {
                        best = mag;
                        pi = i;
                        pj = j;
                    }
                }
            if (pi < 0) {
                block_zero = true;
                break;
            }
            if (pi != t) swap_rows(t, pi);
            if (pj != t) swap_cols(t, pj);

            bool dirty = false;
            for (int i = t + 1; i < d.rows; ++i) {
                if (d.at(i, t) == 0) continue;
                add_row(i, t, -nearest_quotient(d.at(i, t), d.at(t, t)));
                if (d.at(i, t) != 0) dirty = true;
            }
            for (int j = t + 1; j < d.cols; ++j) {
                if (d.at(t, j) == 0) continue;
                add_col(j, t, -nearest_quotient(d.at(t, j), d.at(t, t)));
                if (d.at(t, j) != 0) dirty = true;
            }
            if (dirty) continue;  // leftover remainders become the next pivot

            // Divisibility fix: pull a non-divisible entry into the pivot row;
            // its nonzero remainder forces another halving round.
            bool fixed = false;
            for (int i = t + 1; i < d.rows && !fixed; ++i)
                for (int j = t + 1; j < d.cols && !fixed; ++j)
                    if (d.at(i, j) % d.at(t, t) != 0) {
                        add_row(t, i, 1);
                        fixed = true;
                    }
            if (!fixed) break;
        }
        if (block_zero) break;
        if (d.at(t, t) < 0) negate_row(t);
        ++t;
    }
    for (int i = 0; i < limit; ++i)
        if (d.at(i, i) != 0) res.invariant_factors.push_back(d.at(i, i));
    return res;
}

struct AbelianGroup {
    int rank = 0;
    std::vector<BigInt> torsion;  // d1 | d2 | ..., each >= 2

    // Builds the normal form from an arbitrary multiset of cyclic orders.
    static AbelianGroup from_factors(int rank, std::vector<BigInt> factors) {
        AbelianGroup g;
        g.rank = rank;
        factors.erase(std::remove_if(factors.begin(), factors.end(),
                                     [](const BigInt& f) { return f == 1; }),
                      factors.end());
        for (const BigInt& f : factors)
            if (f < 1) throw HomologyError("cyclic factor must be positive");
        if (!factors.empty()) {
            IntMat diag(static_cast<int>(factors.size()), static_cast<int>(factors.size()));
            for (std::size_t i = 0; i < factors.size(); ++i)
                diag.at(static_cast<int>(i), static_cast<int>(i)) = factors[i];
            SmithResult snf = smith_normal_form(diag);
            for (const BigInt& f : snf.invariant_factors)
                if (f > 1) g.torsion.push_back(f);
        }
        return g;
    }

    static AbelianGroup free(int rank) { return AbelianGroup{rank, {}}; }
    static AbelianGroup trivial() { return AbelianGroup{0, {}}; }

    bool is_chain() const {
        for (std::size_t i = 0; i < torsion.size(); ++i) {
            if (torsion[i] < 2) return false;
            if (i > 0 && torsion[i] % torsion[i - 1] != 0) return false;
        }
        return true;
    }

    BigInt torsion_order() const {
        BigInt p = 1;
        for (const BigInt& d : torsion) p *= d;
        return p;
    }

    AbelianGroup direct_sum(const AbelianGroup& other) const {
        std::vector<BigInt> factors = torsion;
        factors.insert(factors.end(), other.torsion.begin(), other.torsion.end());
        return from_factors(rank + other.rank, std::move(factors));
    }

    bool operator==(const AbelianGroup& other) const = default;
};

inline const AbelianGroup kZ = AbelianGroup::free(1);

// H^0..H^4 of a closed connected oriented 4-manifold, plus the data of an
// oriented rank-3 bundle over it: whether its degree-3 Euler class vanishes
// and, when it does not, which invariant factor of the torsion of H^3 holds
// the order-2 class (the Euler class of such a bundle is always 2-torsion).
struct ManifoldHomology {
    std::array<AbelianGroup, 5> h{};
    bool euler_class_zero = true;
    std::optional<int> two_torsion_witness;  // index into h[3].torsion

    void validate() const {
        if (h[0] != kZ || h[4] != kZ)
            throw HomologyError("H^0 and H^4 of a closed connected oriented 4-manifold must be Z");
        for (const AbelianGroup& g : h)
            if (!g.is_chain() || g.rank < 0)
                throw HomologyError("group is not in invariant-factor normal form");
        if (!h[1].torsion.empty()) throw HomologyError("H^1 must be torsion-free");
        if (h[3].rank != h[1].rank)
            throw HomologyError("duality requires rank H^3 = rank H^1");
        if (h[3].torsion != h[2].torsion)
            throw HomologyError(
                "universal coefficients and duality require torsion H^3 = torsion H^2");
        if (!euler_class_zero) {
            if (!two_torsion_witness.has_value())
                throw HomologyError("nonzero Euler class needs a torsion witness index");
            int w = *two_torsion_witness;
            if (w < 0 || w >= static_cast<int>(h[3].torsion.size()))
                throw HomologyError("torsion witness index out of range");
            if (h[3].torsion[static_cast<std::size_t>(w)] % 2 != 0)
                throw HomologyError(
                    "a 2-torsion Euler class needs an even invariant factor in torsion H^3");
        }
    }
};

// H^0..H^6 of the total space of a 2-sphere bundle over a 4-manifold.
struct SphereBundleHomology {
    std::array<AbelianGroup, 7> hz{};
    bool fiber_pairing_generator_exists = false;

    void validate() const {
        if (hz[0] != kZ || hz[6] != kZ)
            throw HomologyError("H^0 and H^6 of a closed connected oriented 6-manifold must be Z");
        for (const AbelianGroup& g : hz)
            if (!g.is_chain() || g.rank < 0)
                throw HomologyError("group is not in invariant-factor normal form");
        if (!hz[1].torsion.empty()) throw HomologyError("H^1 must be torsion-free");
        for (int k = 0; k <= 3; ++k)
            if (hz[static_cast<std::size_t>(k)].rank != hz[static_cast<std::size_t>(6 - k)].rank)
                throw HomologyError("duality requires rank H^k = rank H^(6-k)");
        if (hz[5].torsion != hz[2].torsion || hz[4].torsion != hz[3].torsion)
            throw HomologyError("duality requires torsion H^k = torsion H^(7-k)");
    }
};

// Torsion of H^3 of the sphere-bundle total space: unchanged when the Euler
// class vanishes, otherwise the witnessed even invariant factor is halved
// (the quotient by the order-2 subgroup sitting inside that cyclic factor).
inline AbelianGroup bundle_torsion_h3(const ManifoldHomology& m) {
    m.validate();
    AbelianGroup t3 = AbelianGroup{0, m.h[3].torsion};
    if (m.euler_class_zero) return t3;
    bool has_even = false;
    for (const BigInt& d : t3.torsion) has_even = has_even || d % 2 == 0;
    if (!has_even)
        throw HomologyError(
            "order-2 Euler class cannot live in odd torsion: inconsistent input");
    std::vector<BigInt> factors = t3.torsion;
    auto w = static_cast<std::size_t>(*m.two_torsion_witness);
    factors[w] /= 2;
    return AbelianGroup::from_factors(0, std::move(factors));
}

// Zero Euler class: every degree splits as H^k(Z) = H^k(M) + H^(k-2)(M).
inline SphereBundleHomology gysin_split(const ManifoldHomology& m) {
    m.validate();
    if (!m.euler_class_zero)
        throw HomologyError("gysin_split requires a vanishing Euler class");
    SphereBundleHomology z;
    for (int k = 0; k <= 6; ++k) {
        AbelianGroup g = AbelianGroup::trivial();
        if (k <= 4) g = g.direct_sum(m.h[static_cast<std::size_t>(k)]);
        if (k >= 2 && k - 2 <= 4) g = g.direct_sum(m.h[static_cast<std::size_t>(k - 2)]);
        z.hz[static_cast<std::size_t>(k)] = g;
    }
    z.fiber_pairing_generator_exists = true;
    z.validate();
    return z;
}

// Both Euler-class branches. For a nonzero (hence order-2) Euler class the
// ranks agree with the split answer because the class is torsion, the fiber
// pairing has image 2Z instead of Z, and the torsion of H^3 and H^4 drops by
// the halving of bundle_torsion_h3; H^2 and H^5 keep the base torsion.
inline SphereBundleHomology bundle_homology(const ManifoldHomology& m) {
    if (m.euler_class_zero) return gysin_split(m);
    m.validate();
    AbelianGroup halved = bundle_torsion_h3(m);
    int b1 = m.h[1].rank;
    int b2 = m.h[2].rank;
    SphereBundleHomology z;
    z.hz[0] = kZ;
    z.hz[1] = AbelianGroup::free(b1);
    z.hz[2] = AbelianGroup{b2 + 1, m.h[2].torsion};
    z.hz[3] = AbelianGroup{m.h[3].rank + b1, halved.torsion};
    z.hz[4] = AbelianGroup{b2 + 1, halved.torsion};
    z.hz[5] = AbelianGroup{b1, m.h[2].torsion};
    z.hz[6] = kZ;
    z.fiber_pairing_generator_exists = false;
    z.validate();
    return z;
}

// The four equivalent characterizations of a vanishing Euler class, evaluated
// independently on the given pair. H_2 data is read off through universal
// coefficients: rank H_2 = rank H^2 and torsion H_2 = torsion H^3.
struct SplittingCriteria {
    bool euler_class_zero = false;    // (i)
    bool fiber_pairing = false;       // (ii) a class pairing to 1 with the fiber
    bool homology_splits = false;     // (iii) H_2(Z) = H_2(M) + Z in normal form
    bool torsion_order_equal = false; // (iv) |torsion H_2(Z)| = |torsion H_2(M)|

    bool all_equal() const {
        return euler_class_zero == fiber_pairing && fiber_pairing == homology_splits &&
               homology_splits == torsion_order_equal;
    }
};

inline SplittingCriteria splitting_criteria(const ManifoldHomology& m,
                                            const SphereBundleHomology& z) {
    m.validate();
    z.validate();
    SplittingCriteria crit;
    crit.euler_class_zero = m.euler_class_zero;
    crit.fiber_pairing = z.fiber_pairing_generator_exists;
    crit.homology_splits =
        z.hz[2].rank == m.h[2].rank + 1 && z.hz[3].torsion == m.h[3].torsion;
    BigInt tz = AbelianGroup{0, z.hz[3].torsion}.torsion_order();
    BigInt tm = AbelianGroup{0, m.h[3].torsion}.torsion_order();
    crit.torsion_order_equal = tz == tm;
    return crit;
}

// H^2(M,Z) acts freely and transitively on the structures in question; the
// torsor group is returned verbatim and existence always holds.
struct SpincTorsor {
    AbelianGroup group;
    bool exists = true;
};

inline SpincTorsor spinc_torsor(const ManifoldHomology& m) {
    m.validate();
    return SpincTorsor{m.h[2], true};
}

// Random consistent instance: ranks at most 4, a random divisibility chain
// shared by H^2 and H^3 torsion, and a random Euler-class flag that is made
// consistent by injecting an even factor when needed.
inline ManifoldHomology random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rank_dist(0, 4);
    std::uniform_int_distribution<int> len_dist(0, 3);
    std::uniform_int_distribution<int> seed_dist(2, 9);
    std::uniform_int_distribution<int> mult_dist(1, 4);
    std::uniform_int_distribution<int> coin(0, 1);

    int b1 = rank_dist(rng);
    int b2 = rank_dist(rng);
    std::vector<BigInt> chain;
    int len = len_dist(rng);
    BigInt cur = 1;
    for (int i = 0; i < len; ++i) {
        cur *= i == 0 ? BigInt(seed_dist(rng)) : BigInt(mult_dist(rng));
        if (cur > 1) chain.push_back(cur);
    }
    bool e_zero = coin(rng) == 0;
    std::optional<int> witness;
    if (!e_zero) {
        bool has_even = false;
        for (const BigInt& d : chain) has_even = has_even || d % 2 == 0;
        if (chain.empty() || !has_even) {
            BigInt last = chain.empty() ? BigInt(1) : chain.back();
            chain.push_back(last * 2);
        }
        std::vector<int> evens;
        for (std::size_t i = 0; i < chain.size(); ++i)
            if (chain[i] % 2 == 0) evens.push_back(static_cast<int>(i));
        witness = evens[static_cast<std::size_t>(
            std::uniform_int_distribution<int>(0, static_cast<int>(evens.size()) - 1)(rng))];
    }

    ManifoldHomology m;
    m.h[0] = kZ;
    m.h[1] = AbelianGroup::free(b1);
    m.h[2] = AbelianGroup{b2, chain};
    m.h[3] = AbelianGroup{b1, chain};
    m.h[4] = kZ;
    m.euler_class_zero = e_zero;
    m.two_torsion_witness = witness;
    m.validate();
    return m;
}

inline ManifoldHomology preset_homology(const std::string& name) {
    auto make = [](int b1, int b2, std::vector<BigInt> torsion, bool e_zero,
                   std::optional<int> witness) {
        ManifoldHomology m;
        m.h[0] = kZ;
        m.h[1] = AbelianGroup::free(b1);
        m.h[2] = AbelianGroup{b2, torsion};
        m.h[3] = AbelianGroup{b1, torsion};
        m.h[4] = kZ;
        m.euler_class_zero = e_zero;
        m.two_torsion_witness = witness;
        m.validate();
        return m;
    };
    if (name == "s4") return make(0, 0, {}, true, std::nullopt);
    if (name == "cp2") return make(0, 1, {}, true, std::nullopt);
    if (name == "s2xs2") return make(0, 2, {}, true, std::nullopt);
    if (name == "t4") return make(4, 6, {}, true, std::nullopt);
    if (name == "enriques") return make(0, 10, {2}, true, std::nullopt);
    // A rank-3 bundle with nonzero order-2 Euler class over an enriques-like
    // base; the twistor bundle itself never realizes this branch.
    if (name == "torsion_e2") return make(0, 10, {2}, false, 0);
    throw HomologyError("unknown homology preset: " + name);
}

}  // namespace twistorlab::homology
