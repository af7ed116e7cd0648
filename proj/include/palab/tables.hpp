#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "palab/partition.hpp"

namespace palab {

struct MissingEntry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Word = std::vector<std::string>;

Word constant_word(int k, const std::string& label);

struct TableKey {
    Partition p;
    Word word;
    bool operator<(const TableKey& o) const {
        if (p != o.p) return p < o.p;
        return word < o.word;
    }
    bool operator==(const TableKey& o) const { return p == o.p && word == o.word; }
};

// Labeled multilinear functional (k, partition, word) -> rational. Permutation
// covariance entry(p, w) = entry(s o p o s^-1, w o s^-1) is enforced by storing
// only orbit-canonical keys; lookups canonicalize. m_empty = 1 by convention.
class TableData {
  public:
    FamilyTag tag = FamilyTag::P;

    void set(const Partition& p, const Word& w, const Rational& v);
    const Rational* find(const Partition& p, const Word& w) const;
    Rational at(const Partition& p, const Word& w) const;

    const std::map<TableKey, Rational>& entries() const { return entries_; }
    std::vector<int> grades() const;
    // Distinct canonical words of a given grade.
    std::vector<Word> words_of_grade(int k) const;
    bool empty() const { return entries_.empty(); }

  private:
    std::map<TableKey, Rational> entries_;
};

struct MomentTable : TableData {};
struct CumulantTable : TableData {};

// Graded class function (k, conjugacy class of p) -> value; houses
// R-transforms, generators R(G) and Levy exponents.
template <typename V>
struct SpectralFormT {
    bool is_character = false;
    bool is_infinitesimal_character = false;
    std::map<Partition, V> values;  // keys are orbit representatives

    V at_class(const Partition& p) const {
        auto it = values.find(orbit_rep(p));
        return it == values.end() ? V(0) : it->second;
    }
    void set_class(const Partition& p, const V& v) {
        if (v == V(0))
            values.erase(orbit_rep(p));
        else
            values[orbit_rep(p)] = v;
    }
};
using SpectralForm = SpectralFormT<Rational>;
using SpectralFormD = SpectralFormT<double>;

SpectralFormD to_numeric(const SpectralForm& f);

// true iff the form vanishes outside its declared support: irreducible
// classes for boxplus-infinitesimal characters, weakly irreducible for the
// multiplicative side.
bool infinitesimal_support_ok(const SpectralForm& f, bool multiplicative);

// --- precomputed order structure of a family ---------------------------------

struct FamilyOrder {
    const std::vector<Partition>* items = nullptr;
    std::vector<int> d2_id;                      // 2 * d(id, p)
    std::vector<std::vector<int>> leq_down;      // indices q with items[q] <= items[i], excluding i
    std::vector<std::vector<int>> coarser_comp;  // q -| i strict (coarser, equal cycles)
    std::vector<std::vector<int>> finer_comp;    // q =) i strict (finer, equal nc - cycles)
};
const FamilyOrder& family_order(int k, FamilyTag tag);

// --- the triangular transforms ------------------------------------------------

// m_p = sum_{p' in A_k, p' <= p} k_{p'}; unique triangular inversion.
CumulantTable moments_to_cumulants(const MomentTable& m, FamilyTag tag);
MomentTable cumulants_to_moments(const CumulantTable& k);

enum class ExclusiveDirection { to_exclusive, from_exclusive };

// m_p = sum_{p' -| p} m_{p'^c} over P_k. For tag != P the moments are first
// extended to P via the natural-extension rule.
MomentTable exclusive_transform(const MomentTable& m, FamilyTag tag, ExclusiveDirection dir);

// m_{p^c} = sum_{p' in A, p' =) p} k_{p'}.
Rational cumulants_to_exclusive(const CumulantTable& k, const Partition& p, const Word& w);

// Natural restriction / extension between nested families.
MomentTable restrict_table(const MomentTable& m, FamilyTag from, FamilyTag to);
MomentTable extend_table(const MomentTable& m, FamilyTag from, FamilyTag to);

bool family_nested(FamilyTag sub, FamilyTag super);

// --- product expansion (P-tracial axiom 2) -------------------------------------

// m_p(prod w_1, ..., prod w_k) rewritten via insertion and the cyclic
// permutation, then looked up in m.
Rational expand_products(const MomentTable& m, const Partition& p,
                         const std::vector<Word>& product_words);

// The partition Ins^n_i(p) o sigma indexing the expanded moment.
std::pair<Partition, Word> expanded_key(const Partition& p, const std::vector<Word>& product_words);

// --- factorization predicates ----------------------------------------------------

// m_{p1 (x) p2} = m_{p1} m_{p2} for all stored grade splits up to k_cap.
bool moments_factorize(const MomentTable& m, const std::string& label, int k_cap);
bool cumulants_factorize(const CumulantTable& k, const std::string& label, int k_cap);

// --- serialization (documented JSON schema) ---------------------------------------

std::string table_to_json(const TableData& t, const std::string& kind);
void table_from_json(const std::string& json_text, TableData& out, std::string* kind = nullptr);

}  // namespace palab
