#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "palab/npoly.hpp"
#include "palab/partition.hpp"

namespace palab {

struct GramSingular : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Element of C[P_k(N)]: finite sum of partitions with NPoly coefficients.
struct PartitionVector {
    int k = 0;
    std::map<Partition, NPoly> terms;

    static PartitionVector basis(const Partition& p, const NPoly& coeff = NPoly(1)) {
        PartitionVector v;
        v.k = p.k();
        if (!coeff.is_zero()) v.terms[p] = coeff;
        return v;
    }
    NPoly coeff(const Partition& p) const {
        auto it = terms.find(p);
        return it == terms.end() ? NPoly() : it->second;
    }
    void add_term(const Partition& p, const NPoly& c) {
        NPoly nc = coeff(p) + c;
        if (nc.is_zero())
            terms.erase(p);
        else
            terms[p] = nc;
    }
    bool operator==(const PartitionVector& o) const { return k == o.k && terms == o.terms; }
};

PartitionVector add(const PartitionVector& x, const PartitionVector& y);
PartitionVector scale(const PartitionVector& x, const NPoly& s);

// Bilinear extension of p * q = N^kappa (p o q).
PartitionVector mul(const PartitionVector& x, const PartitionVector& y);

// Tr(rho_N(p) rho_N(tq)) as a polynomial in N: N^{nc(p v q)}.
NPoly gram_entry(const Partition& p, const Partition& q);

// --- the tensor representation rho_N (test oracle, size-capped) -------------

long rho_cap();
void set_rho_cap(long cap);

// Nonzero positions of rho_N(p) on (C^N)^(x k): (row, col) with
// row = primed tuple index, col = unprimed tuple index, first factor most
// significant. All entries are 1.
std::vector<std::pair<long, long>> rho_entries(const Partition& p, long N);

Eigen::MatrixXd rho_dense(const Partition& p, long N);

// Dense realization of a PartitionVector at a concrete N.
Eigen::MatrixXd realize_dense(const PartitionVector& v, long N);

// --- exact Gram solve --------------------------------------------------------

// Solves sum_p c_p N^{nc(p v p')} = traces(p') for all p' in A_k, exactly.
// tag == P uses the set-partition-lattice factorization of the Gram matrix;
// other families use fraction-free elimination. Throws GramSingular when the
// Gram matrix is singular (for P this happens exactly when N < 2k).
std::map<Partition, Rational> gram_solve(int k, FamilyTag tag,
                                         const std::map<Partition, Rational>& traces, long N);

// Double-precision variant for Monte Carlo pipelines.
std::map<Partition, double> gram_solve_numeric(int k, FamilyTag tag,
                                               const std::map<Partition, double>& traces, long N);

// Lattice-factorized Gram solve restricted to a coarsening-closed item list
// (e.g. the diagonal family of partitions coarser than id_k, injective for
// N >= max block count).
std::map<Partition, Rational> gram_solve_on(const std::vector<Partition>& items,
                                            const std::map<Partition, Rational>& traces, long N);

// All coarsenings of p (partitions whose blocks are unions of p's blocks),
// including p itself.
std::vector<Partition> coarsenings(const Partition& p);

}  // namespace palab
