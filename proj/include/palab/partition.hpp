#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "palab/rational.hpp"

namespace palab {

// Points of the 2k-point set {1..k, 1'..k'}. Column c encodes unprimed as
// 2(c-1), primed as 2(c-1)+1, so integer order realizes the total order
// 1 < 1' < 2 < 2' < ...
using Point = int;

inline Point make_point(int col, bool primed) { return 2 * (col - 1) + (primed ? 1 : 0); }
inline int point_col(Point x) { return x / 2 + 1; }
inline bool point_primed(Point x) { return (x & 1) != 0; }

enum class FamilyTag { P, B, S, H, Bs };

const char* family_name(FamilyTag tag);
FamilyTag parse_family(const std::string& name);

struct MalformedPartition : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SizeMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A set partition of {1..k, 1'..k'} in canonical form: each block sorted
// ascending, blocks ordered by least point. Immutable after construction.
class Partition {
  public:
    Partition() : k_(0) {}

    // Canonicalizes and validates a raw block list (disjoint cover of the
    // 2k points), throwing MalformedPartition otherwise.
    static Partition of(int k, std::vector<std::vector<Point>> raw_blocks);

    // From a block-label vector: labels[x] identifies the block of point x.
    static Partition from_labels(int k, const std::vector<int>& labels);

    static Partition identity(int k);
    static Partition zero(int k);        // 0_k: the single full block
    static Partition singletons(int k);  // 1_k: all points alone
    static Partition transposition(int k, int i, int j);  // (i,j)
    static Partition weyl(int k, int i, int j);           // [i,j]
    // sigma maps column i to sigma[i-1] (1-based values); blocks {i, sigma(i)'}.
    static Partition from_permutation(const std::vector<int>& sigma);
    static Partition full_cycle(int k);  // (1,2,...,k)

    int k() const { return k_; }
    int nc() const { return static_cast<int>(blocks_.size()); }
    const std::vector<std::vector<Point>>& blocks() const { return blocks_; }

    // Block index per point, following canonical block order.
    std::vector<int> labels() const;

    bool operator==(const Partition& o) const { return k_ == o.k_ && blocks_ == o.blocks_; }
    bool operator!=(const Partition& o) const { return !(*this == o); }
    bool operator<(const Partition& o) const;

  private:
    int k_;
    std::vector<std::vector<Point>> blocks_;
};

std::string to_string(const Partition& p);
Partition parse_partition(const std::string& s);

struct PartitionHash {
    size_t operator()(const Partition& p) const;
};

// --- basic observables -----------------------------------------------------

inline int nc(const Partition& p) { return p.nc(); }
int cycles(const Partition& p);  // nc(p v id_k)

struct PartitionStats {
    int nc = 0;
    int cycles = 0;
    bool irreducible = false;
    bool weakly_irreducible = false;
    bool exclusive_irreducible = false;
};
PartitionStats stats(const Partition& p);

// Cycles of p as sorted point sets (blocks of p v id_k), in canonical order.
std::vector<std::vector<Point>> cycle_sets(const Partition& p);

// --- structural operations ---------------------------------------------------

Partition transpose(const Partition& p);
Partition join(const Partition& p, const Partition& q);  // p v q

struct ComposeResult {
    Partition p;
    int kappa = 0;
};
// p o q with q stacked above p: rho(p o q) * N^kappa = rho(p) * rho(q).
ComposeResult compose(const Partition& p, const Partition& q);

Partition tensor(const Partition& p, const Partition& q);

// Extraction to a symmetric point set (i in I <=> i' in I), relabelled
// order-preservingly.
Partition extract(const Partition& p, const std::vector<Point>& points);
Partition left_part(const Partition& p, int k1);
Partition right_part(const Partition& p, int k1);

// Ins^l_{positions}(p): p placed at the given increasing 1-based columns of
// {1..l}, identity columns elsewhere.
Partition insert(const Partition& p, int l, const std::vector<int>& positions);

// S_{k1}: swaps i <-> i' for every column i > k1.
Partition flip(const Partition& p, int k1);

// Ker of an index tuple ordered (n_1, n_1', n_2, n_2', ..., n_k, n_k').
Partition kernel(const std::vector<long>& values);

// sigma o p o sigma^{-1}: relabels column i to sigma[i-1] (1-based).
Partition conjugate(const Partition& p, const std::vector<int>& sigma);

// --- orders and distance -----------------------------------------------------

struct OrderReport {
    Rational distance;            // d(p, q)
    Rational defect;              // df(p, q) = d(id,q) - d(id,p) - d(p,q)
    bool leq = false;             // p <= q (geodesic order)
    bool finer = false;           // every block of p inside a block of q
    bool coarser_compatible = false;  // p -| q: p coarser, equal cycle counts
    bool finer_compatible = false;    // p =) q: p finer, equal nc - cycles
};
OrderReport compare(const Partition& p, const Partition& q);

bool is_finer(const Partition& p, const Partition& q);
Rational distance(const Partition& p, const Partition& q);
Rational defect(const Partition& p, const Partition& q);
bool leq(const Partition& p, const Partition& q);

// --- factorizations ----------------------------------------------------------

struct Splitting {
    Partition left;
    Partition right;
    std::vector<Point> points;  // the symmetric set I with extract(p, I) = left
};
// F_2(p): all symmetric block-closed splits (equivalently, unions of cycles).
std::vector<Splitting> splittings(const Partition& p);

// Summation set of the product cumulant formula: pairs with p1 o p2 = p and
// p1 (x) p2 <= (p (x) id_k) tau.
std::vector<std::pair<Partition, Partition>> product_index_set(const Partition& p);

// (p (x) id_k) tau, the right-hand side of the geodesic criterion.
Partition product_geodesic_target(const Partition& p);

// --- conjugacy orbits ----------------------------------------------------------

Partition orbit_rep(const Partition& p);
// Canonical representative of (p, word) under simultaneous conjugation.
std::pair<Partition, std::vector<std::string>> orbit_rep_with_word(
    const Partition& p, const std::vector<std::string>& word);

// --- families ------------------------------------------------------------------

bool family_member(const Partition& p, FamilyTag tag);

// All members of A_k, canonical, in a fixed deterministic order. Cached.
const std::vector<Partition>& enumerate_family(int k, FamilyTag tag);

// Index of p within enumerate_family(k, tag); -1 when absent.
int family_index(int k, FamilyTag tag, const Partition& p);

int enumeration_cap(FamilyTag tag);
void set_enumeration_cap(FamilyTag tag, int cap);
int orbit_cap();
void set_orbit_cap(int cap);

// nc(p_i v p_j) for every pair of a family, packed row-major as uint8.
std::vector<uint8_t> join_nc_table(const std::vector<Partition>& items);

}  // namespace palab
