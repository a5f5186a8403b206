#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "twistorlab/homology.hpp"

// Exact arithmetic on unimodular intersection pairings of closed oriented
// 4-manifolds: Euler characteristic, signature, Todd genus, the spin test,
// and bounded enumeration of characteristic vectors.
//
// wu_search decomposes the pairing into connected blocks of its sparsity
// graph, enumerates each block once, and joins block values to hit the target
// square. Its budget therefore scales with the sum of per-block box sizes
// (respecting the mod-2 constraint on each coordinate), not with the size of
// the full product box. The solution list is ordered by (max-norm shell,
// lexicographic) and truncated only by max_list; the reported total count is
// always exact.
namespace twistorlab::lattice {

using homology::BigInt;
using homology::IntMat;
using Rational = boost::rational<BigInt>;

class LatticeError : public std::runtime_error {
  public:
    explicit LatticeError(const std::string& what) : std::runtime_error(what) {}
};

// Mixed-mode comparisons of boost::rational<cpp_int> against int do not
// terminate; all sign tests go through the numerator instead.
inline bool rat_is_zero(const Rational& r) { return r.numerator() == 0; }
inline bool rat_is_positive(const Rational& r) { return r.numerator() > 0; }

class BudgetExceeded : public std::runtime_error {
  public:
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct IntersectionLattice {
    IntMat gram;  // n x n, symmetric, det +-1
    int b1 = 0;
    std::vector<int> w2;  // length n over {0,1}; reduction every class must hit

    int rank() const { return gram.rows; }

    void validate() const {
        if (gram.rows != gram.cols) throw LatticeError("pairing matrix must be square");
        for (int i = 0; i < gram.rows; ++i)
            for (int j = 0; j < i; ++j)
                if (gram.at(i, j) != gram.at(j, i))
                    throw LatticeError("pairing matrix must be symmetric");
        if (b1 < 0) throw LatticeError("b1 must be nonnegative");
        BigInt det = homology::mat_det(gram);
        if (det != 1 && det != -1) throw LatticeError("pairing must be unimodular");
        if (static_cast<int>(w2.size()) != gram.rows)
            throw LatticeError("w2 length must equal the rank");
        for (int i = 0; i < gram.rows; ++i) {
            if (w2[static_cast<std::size_t>(i)] != 0 && w2[static_cast<std::size_t>(i)] != 1)
                throw LatticeError("w2 entries must be 0 or 1");
            // x.x = w2.x (mod 2) on basis vectors pins w2 to the diagonal parity.
            BigInt diag = gram.at(i, i) % 2;
            if (diag < 0) diag += 2;
            if (diag != w2[static_cast<std::size_t>(i)])
                throw LatticeError("w2 must match the diagonal parity of the pairing");
        }
    }

    static IntersectionLattice from_gram(IntMat gram, int b1) {
        IntersectionLattice lat;
        lat.gram = std::move(gram);
        lat.b1 = b1;
        lat.w2.resize(static_cast<std::size_t>(lat.gram.rows));
        for (int i = 0; i < lat.gram.rows; ++i) {
            BigInt diag = lat.gram.at(i, i) % 2;
            if (diag < 0) diag += 2;
            lat.w2[static_cast<std::size_t>(i)] = static_cast<int>(diag);
        }
        lat.validate();
        return lat;
    }
};

// Exact signature by symmetric congruence diagonalization over the rationals:
// repeated E A E^T with elementary E keeps the form's inertia.
inline int signature_exact(const IntMat& gram) {
    int n = gram.rows;
    std::vector<std::vector<Rational>> a(static_cast<std::size_t>(n),
                                         std::vector<Rational>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                                        Rational(gram.at(i, j));
    auto at = [&](int i, int j) -> Rational& {
        return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };
    // Basis change e_dst += f * e_src, applied to rows then columns.
    auto add_sym = [&](int dst, int src, const Rational& f) {
        for (int c = 0; c < n; ++c) at(dst, c) += f * at(src, c);
        for (int r = 0; r < n; ++r) at(r, dst) += f * at(r, src);
    };
    int pos = 0, neg = 0;
    for (int k = 0; k < n; ++k) {
        if (rat_is_zero(at(k, k))) {
            int j = -1;
            for (int r = k + 1; r < n; ++r)
                if (!rat_is_zero(at(r, k))) {
                    j = r;
                    break;
                }
            if (j < 0) continue;  // row and column k vanish from k on
            add_sym(k, j, Rational(1));
            if (rat_is_zero(at(k, k)))
                add_sym(k, j, Rational(-2));  // second shear cannot cancel too
        }
        Rational pivot = at(k, k);
        if (rat_is_positive(pivot))
            ++pos;
        else
            ++neg;
        for (int r = k + 1; r < n; ++r) {
            if (rat_is_zero(at(r, k))) continue;
            add_sym(r, k, -at(r, k) / pivot);
        }
    }
    return pos - neg;
}

struct TopInvariants {
    long long chi = 0;
    long long tau = 0;
    Rational todd;
    bool todd_integral = false;
};

inline TopInvariants invariants(const IntersectionLattice& lat) {
    lat.validate();
    TopInvariants inv;
    inv.chi = 2 - 2 * static_cast<long long>(lat.b1) + lat.rank();
    inv.tau = signature_exact(lat.gram);
    inv.todd = Rational(BigInt(inv.chi + inv.tau), BigInt(4));
    inv.todd_integral = inv.todd.denominator() == 1;
    return inv;
}

inline bool is_spin(const IntersectionLattice& lat) {
    for (int b : lat.w2)
        if (b != 0) return false;
    return true;
}

inline BigInt form_value(const IntMat& gram, const std::vector<long long>& c) {
    BigInt q = 0;
    for (int i = 0; i < gram.rows; ++i) {
        if (c[static_cast<std::size_t>(i)] == 0) continue;
        for (int j = 0; j < gram.cols; ++j)
            q += BigInt(c[static_cast<std::size_t>(i)]) * gram.at(i, j) *
                 c[static_cast<std::size_t>(j)];
    }
    return q;
}

// Count of the half-spinor bundle's zero section against c, exact:
// (c.c - 2*chi - 3*tau) / 4. Divisibility failure signals a violated
// mod-2 precondition on c, never a rounding fallback.
inline long long index_c2(const std::vector<long long>& c, const IntersectionLattice& lat) {
    lat.validate();
    if (static_cast<int>(c.size()) != lat.rank())
        throw LatticeError("class length must equal the rank");
    for (std::size_t i = 0; i < c.size(); ++i) {
        long long parity = ((c[i] % 2) + 2) % 2;
        if (parity != lat.w2[i])
            throw LatticeError("class does not reduce to w2 mod 2");
    }
    TopInvariants inv = invariants(lat);
    BigInt num = form_value(lat.gram, c) - 2 * inv.chi - 3 * inv.tau;
    if (num % 4 != 0)
        throw LatticeError("index numerator not divisible by 4: class is not characteristic");
    return static_cast<long long>(num / 4);
}

namespace detail {

// Connected components of the off-diagonal sparsity graph, each listed in
// increasing coordinate order, components ordered by smallest coordinate.
inline std::vector<std::vector<int>> blocks_of(const IntMat& gram) {
    int n = gram.rows;
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> blocks;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        std::vector<int> stack{s};
        comp[static_cast<std::size_t>(s)] = static_cast<int>(blocks.size());
        std::vector<int> members;
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            members.push_back(i);
            for (int j = 0; j < n; ++j)
                if (j != i && gram.at(i, j) != 0 && comp[static_cast<std::size_t>(j)] < 0) {
                    comp[static_cast<std::size_t>(j)] = static_cast<int>(blocks.size());
                    stack.push_back(j);
                }
        }
        std::sort(members.begin(), members.end());
        blocks.push_back(std::move(members));
    }
    return blocks;
}

inline std::vector<long long> parity_values(int w2_bit, int bound) {
    std::vector<long long> vals;
    for (long long v = -bound; v <= bound; ++v)
        if (((v % 2) + 2) % 2 == w2_bit) vals.push_back(v);
    return vals;
}

struct BlockInfo {
    std::vector<int> coords;
    std::vector<std::vector<long long>> values;      // per local coordinate
    std::vector<std::vector<long long>> local_gram;  // dense block pairing
    // value -> per-shell cumulative vector counts, index r = count with linf <= r
    std::map<long long, std::vector<std::uint64_t>> census;
};

// Walks every parity-respecting block vector once; at each leaf reports the
// vector's pairing value and max-norm through `leaf`.
template <class Leaf>
inline void enumerate_block(const BlockInfo& blk, int shell_cap, Leaf&& leaf) {
    int m = static_cast<int>(blk.coords.size());
    std::vector<long long> c(static_cast<std::size_t>(m), 0);
    std::vector<long long> row_acc(static_cast<std::size_t>(m), 0);  // sum_j Q_ij c_j so far
    long long q = 0;
    long long linf = 0;

    // Depth-first with incremental quadratic form: adding value v at slot k
    // changes q by Q_kk v^2 + 2 v * row_acc[k].
    auto rec = [&](auto&& self, int k) -> void {
        if (k == m) {
            leaf(c, q, linf);
            return;
        }
        for (long long v : blk.values[static_cast<std::size_t>(k)]) {
            long long mag = v < 0 ? -v : v;
            if (mag > shell_cap) continue;
            c[static_cast<std::size_t>(k)] = v;
            long long dq =
                blk.local_gram[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] * v * v +
                2 * v * row_acc[static_cast<std::size_t>(k)];
            q += dq;
            long long old_linf = linf;
            linf = std::max(linf, mag);
            for (int j = k + 1; j < m; ++j)
                row_acc[static_cast<std::size_t>(j)] +=
                    blk.local_gram[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * v;
            self(self, k + 1);
            for (int j = k + 1; j < m; ++j)
                row_acc[static_cast<std::size_t>(j)] -=
                    blk.local_gram[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * v;
            q -= dq;
            linf = old_linf;
            c[static_cast<std::size_t>(k)] = 0;
        }
    };
    rec(rec, 0);
}

}  // namespace detail

struct WuSearchResult {
    long long target = 0;
    std::vector<std::vector<long long>> solutions;  // (shell, lex) order
    BigInt total_count = 0;
    bool complete = true;     // solutions lists every vector in the box
    bool conclusive = false;  // rank 0: the box is the whole lattice
};

inline constexpr std::uint64_t kDefaultBudget = 100000000ull;
inline constexpr std::size_t kDefaultMaxList = 10000;

// All c in the box max|c_i| <= bound with c = w2 (mod 2) and c.c = target.
// See the header comment for ordering, truncation, and budget semantics.
inline WuSearchResult wu_search_target(const IntersectionLattice& lat, int bound,
                                       long long target,
                                       std::uint64_t budget = kDefaultBudget,
                                       std::size_t max_list = kDefaultMaxList) {
    lat.validate();
    if (bound < 1) throw LatticeError("bound must be at least 1");
    WuSearchResult res;
    res.target = target;
    int n = lat.rank();
    if (n == 0) {
        res.conclusive = true;
        if (target == 0) {
            res.solutions.push_back({});
            res.total_count = 1;
        }
        return res;
    }

    std::vector<std::vector<int>> blocks = detail::blocks_of(lat.gram);
    std::vector<detail::BlockInfo> infos;
    std::uint64_t work = 0;
    for (const auto& coords : blocks) {
        detail::BlockInfo blk;
        blk.coords = coords;
        std::uint64_t box = 1;
        bool overflow = false;
        for (int i : coords) {
            blk.values.push_back(
                detail::parity_values(lat.w2[static_cast<std::size_t>(i)], bound));
            std::uint64_t cnt = blk.values.back().size();
            if (cnt == 0) return res;  // impossible parity (bound 0 handled above)
            if (box > budget / cnt + 1) overflow = true;
            box *= cnt;
        }
        std::uint64_t cost = overflow ? budget + 1 : box * coords.size();
        if (overflow || cost > budget - std::min(budget, work))
            throw BudgetExceeded("enumeration budget exceeded: shrink the bound");
        work += cost;
        int m = static_cast<int>(coords.size());
        blk.local_gram.assign(static_cast<std::size_t>(m),
                              std::vector<long long>(static_cast<std::size_t>(m), 0));
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                blk.local_gram[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                    static_cast<long long>(lat.gram.at(coords[static_cast<std::size_t>(a)],
                                                       coords[static_cast<std::size_t>(b)]));
        infos.push_back(std::move(blk));
    }

    // Census pass: value histograms per block, cumulative in the shell index.
    for (auto& blk : infos) {
        detail::enumerate_block(blk, bound,
                                [&](const std::vector<long long>&, long long q, long long linf) {
                                    auto& row = blk.census[q];
                                    if (row.empty())
                                        row.assign(static_cast<std::size_t>(bound) + 1, 0);
                                    ++row[static_cast<std::size_t>(linf)];
                                });
        for (auto& [q, row] : blk.census)
            for (std::size_t r = 1; r < row.size(); ++r) row[r] += row[r - 1];
    }

    auto count_at_shell = [&](int r) {
        // Convolution of block histograms restricted to linf <= r.
        std::map<long long, BigInt> acc{{0, BigInt(1)}};
        for (const auto& blk : infos) {
            std::map<long long, BigInt> next;
            for (const auto& [psum, pcnt] : acc)
                for (const auto& [q, row] : blk.census) {
                    std::uint64_t cnt = row[static_cast<std::size_t>(r)];
                    if (cnt == 0) continue;
                    next[psum + q] += pcnt * cnt;
                }
            acc = std::move(next);
        }
        auto it = acc.find(target);
        return it == acc.end() ? BigInt(0) : it->second;
    };
    res.total_count = count_at_shell(bound);
    if (res.total_count == 0) return res;

    // Suffix-achievable value sets per shell feed the join's feasibility cut.
    int nblocks = static_cast<int>(infos.size());
    auto values_at = [&](int b, int r) {
        std::set<long long> vals;
        for (const auto& [q, row] : infos[static_cast<std::size_t>(b)].census)
            if (row[static_cast<std::size_t>(r)] > 0) vals.insert(q);
        return vals;
    };

    const std::size_t hard_cap = max_list * 4 + 50000;
    BigInt emitted_before = 0;
    for (int r = 0; r <= bound && res.solutions.size() < max_list; ++r) {
        BigInt upto = count_at_shell(r);
        BigInt shell_count = upto - emitted_before;
        emitted_before = upto;
        if (shell_count == 0) continue;

        std::vector<std::set<long long>> suffix(static_cast<std::size_t>(nblocks) + 1);
        suffix[static_cast<std::size_t>(nblocks)] = {0};
        for (int b = nblocks - 1; b >= 0; --b) {
            std::set<long long> cur = values_at(b, r);
            std::set<long long>& nxt = suffix[static_cast<std::size_t>(b) + 1];
            std::set<long long>& out = suffix[static_cast<std::size_t>(b)];
            for (long long q : cur)
                for (long long s : nxt) out.insert(q + s);
        }
        if (suffix[0].find(target) == suffix[0].end()) continue;

        // Bucket each block's shell-r vectors by value, keeping only values
        // that can still reach the target together with the other blocks.
        std::vector<std::map<long long, std::vector<std::vector<long long>>>> buckets(
            static_cast<std::size_t>(nblocks));
        std::vector<std::set<long long>> prefix(static_cast<std::size_t>(nblocks) + 1);
        prefix[0] = {0};
        for (int b = 0; b < nblocks; ++b) {
            std::set<long long> cur = values_at(b, r);
            for (long long q : cur)
                for (long long p : prefix[static_cast<std::size_t>(b)])
                    prefix[static_cast<std::size_t>(b) + 1].insert(p + q);
        }
        bool overflowed = false;
        for (int b = 0; b < nblocks && !overflowed; ++b) {
            std::map<long long, bool> feasible_cache;
            auto feasible = [&](long long q) {
                auto it = feasible_cache.find(q);
                if (it != feasible_cache.end()) return it->second;
                bool ok = false;
                for (long long p : prefix[static_cast<std::size_t>(b)]) {
                    long long rem = target - p - q;
                    if (suffix[static_cast<std::size_t>(b) + 1].count(rem)) {
                        ok = true;
                        break;
                    }
                }
                feasible_cache[q] = ok;
                return ok;
            };
            std::size_t stored = 0;
            detail::enumerate_block(
                infos[static_cast<std::size_t>(b)], r,
                [&](const std::vector<long long>& c, long long q, long long) {
                    if (overflowed || !feasible(q)) return;
                    buckets[static_cast<std::size_t>(b)][q].push_back(c);
                    if (++stored > hard_cap * 8) overflowed = true;
                });
        }
        if (overflowed) {
            res.complete = false;
            break;
        }

        std::vector<std::vector<long long>> shell_solutions;
        std::vector<long long> full(static_cast<std::size_t>(n), 0);
        bool capped = false;
        auto join = [&](auto&& self, int b, long long partial) -> void {
            if (capped) return;
            if (b == nblocks) {
                long long linf = 0;
                for (long long v : full) linf = std::max(linf, v < 0 ? -v : v);
                if (linf == r) {
                    shell_solutions.push_back(full);
                    if (shell_solutions.size() > hard_cap) capped = true;
                }
                return;
            }
            for (const auto& [q, vecs] : buckets[static_cast<std::size_t>(b)]) {
                long long rem = target - partial - q;
                if (!suffix[static_cast<std::size_t>(b) + 1].count(rem)) continue;
                for (const auto& vec : vecs) {
                    const auto& coords = infos[static_cast<std::size_t>(b)].coords;
                    for (std::size_t i = 0; i < coords.size(); ++i)
                        full[static_cast<std::size_t>(coords[i])] = vec[i];
                    self(self, b + 1, partial + q);
                    if (capped) return;
                }
                for (int i : infos[static_cast<std::size_t>(b)].coords)
                    full[static_cast<std::size_t>(i)] = 0;
            }
        };
        join(join, 0, 0);
        std::sort(shell_solutions.begin(), shell_solutions.end());
        for (auto& sol : shell_solutions) {
            if (res.solutions.size() >= max_list) {
                res.complete = false;
                break;
            }
            res.solutions.push_back(std::move(sol));
        }
        if (capped) res.complete = false;
        if (!res.complete) break;
    }
    if (BigInt(static_cast<long long>(res.solutions.size())) < res.total_count &&
        res.complete)
        res.complete = false;
    res.conclusive = false;
    return res;
}

inline WuSearchResult wu_search(const IntersectionLattice& lat, int bound,
                                std::uint64_t budget = kDefaultBudget,
                                std::size_t max_list = kDefaultMaxList) {
    TopInvariants inv = invariants(lat);
    WuSearchResult res =
        wu_search_target(lat, std::max(bound, 1), 2 * inv.chi + 3 * inv.tau, budget, max_list);
    res.conclusive = lat.rank() == 0;
    return res;
}

// Complete parity-respecting enumeration of the box, no target filter.
inline std::vector<std::vector<long long>> characteristic_vectors(
    const IntersectionLattice& lat, int bound, std::uint64_t budget = kDefaultBudget) {
    lat.validate();
    if (bound < 1) throw LatticeError("bound must be at least 1");
    int n = lat.rank();
    if (n == 0) return {{}};
    std::uint64_t box = 1;
    std::vector<std::vector<long long>> values;
    for (int i = 0; i < n; ++i) {
        values.push_back(detail::parity_values(lat.w2[static_cast<std::size_t>(i)], bound));
        std::uint64_t cnt = values.back().size();
        if (cnt == 0) return {};
        if (box > budget / cnt + 1 || box * cnt * static_cast<std::uint64_t>(n) > budget)
            throw BudgetExceeded("enumeration budget exceeded: shrink the bound");
        box *= cnt;
    }
    std::vector<std::vector<long long>> out;
    out.reserve(box);
    std::vector<long long> c(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int k) -> void {
        if (k == n) {
            out.push_back(c);
            return;
        }
        for (long long v : values[static_cast<std::size_t>(k)]) {
            c[static_cast<std::size_t>(k)] = v;
            self(self, k + 1);
        }
    };
    rec(rec, 0);
    return out;
}

namespace presets {

inline IntMat diag_lattice(std::initializer_list<long long> diag) {
    IntMat m(static_cast<int>(diag.size()), static_cast<int>(diag.size()));
    int i = 0;
    for (long long d : diag) {
        m.at(i, i) = d;
        ++i;
    }
    return m;
}

inline IntMat hyperbolic_plane() {
    IntMat m(2, 2);
    m.at(0, 1) = 1;
    m.at(1, 0) = 1;
    return m;
}

// Negated E8 Cartan pairing: even, negative definite, determinant 1.
inline IntMat e8_minus() {
    IntMat m(8, 8);
    for (int i = 0; i < 8; ++i) m.at(i, i) = -2;
    const std::array<std::array<int, 2>, 7> edges{
        {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {4, 7}}};
    for (const auto& e : edges) {
        m.at(e[0], e[1]) = 1;
        m.at(e[1], e[0]) = 1;
    }
    return m;
}

inline IntMat direct_sum(const std::vector<IntMat>& parts) {
    int n = 0;
    for (const auto& p : parts) n += p.rows;
    IntMat m(n, n);
    int off = 0;
    for (const auto& p : parts) {
        for (int i = 0; i < p.rows; ++i)
            for (int j = 0; j < p.cols; ++j) m.at(off + i, off + j) = p.at(i, j);
        off += p.rows;
    }
    return m;
}

}  // namespace presets

inline IntersectionLattice preset_lattice(const std::string& name) {
    using namespace presets;
    if (name == "s4") return IntersectionLattice::from_gram(IntMat(0, 0), 0);
    if (name == "cp2") return IntersectionLattice::from_gram(diag_lattice({1}), 0);
    if (name == "s2xs2") return IntersectionLattice::from_gram(hyperbolic_plane(), 0);
    if (name == "k3")
        return IntersectionLattice::from_gram(
            direct_sum({e8_minus(), e8_minus(), hyperbolic_plane(), hyperbolic_plane(),
                        hyperbolic_plane()}),
            0);
    if (name == "cp2_cp2bar") return IntersectionLattice::from_gram(diag_lattice({1, -1}), 0);
    throw LatticeError("unknown lattice preset: " + name);
}

}  // namespace twistorlab::lattice
