#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "palab/partition_algebra.hpp"
#include "palab/rng.hpp"
#include "palab/tables.hpp"

namespace palab {

using CMatrix = Eigen::MatrixXcd;

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

long moment_budget();
void set_moment_budget(long b);

// Square matrix with exact rational entries, for the exact lane.
class QMatrix {
  public:
    QMatrix() = default;
    explicit QMatrix(long n) : n_(n), a_(size_t(n) * n, Rational(0)) {}
    long n() const { return n_; }
    Rational& operator()(long i, long j) { return a_[size_t(i) * n_ + j]; }
    const Rational& operator()(long i, long j) const { return a_[size_t(i) * n_ + j]; }

    static QMatrix identity(long n);
    static QMatrix jn(long n);  // all entries 1/N
    static QMatrix diag(const std::vector<Rational>& d);

  private:
    long n_ = 0;
    std::vector<Rational> a_;
};

// Descriptor of an ensemble; identical spec => identical sample stream.
struct SampleSpec {
    std::string kind;  // gue | goe | antisym-gaussian | haar:U|O|S|H|B | diag-iid |
                       // jn | const | bm-additive | bm-unitary | levy-additive | levy-mult
    long N = 0;
    uint64_t seed = 0;
    // diag-iid law: atoms (value, weight); weights normalized internally
    std::vector<std::pair<double, double>> atoms;
    CMatrix constant;
    // process parameters
    double t = 1.0;
    int steps = 1;
    int epsilon = 1;  // bm-additive: +1 hermitian-type, -1 skew
    int beta = 2;     // field: 1 real, 2 complex
    // levy triplet: drift (eta / arg omega), diffusion (a / b), jump atoms
    double drift = 0;
    double diffusion = 0;
    std::vector<std::pair<double, double>> jump_atoms;

    void validate() const;
};

// One sample of the ensemble; deterministic in (spec.seed, index).
CMatrix sample_matrix(const SampleSpec& spec, long index);

// --- Haar samplers for the Table-1 groups -------------------------------------

CMatrix haar_unitary(long N, CounterRng& rng);
CMatrix haar_orthogonal(long N, CounterRng& rng);
CMatrix haar_permutation(long N, CounterRng& rng);
CMatrix haar_hyperoctahedral(long N, CounterRng& rng);  // signed permutations
CMatrix haar_bistochastic(long N, CounterRng& rng);     // O(N-1) block in 1^perp
CMatrix haar_sample(const std::string& group, long N, CounterRng& rng);

// Endpoint of an additive Brownian motion on g^epsilon(N, K) at time t,
// normalized so that E m_{(1,2)} = t (epsilon: +1 hermitian/symmetric type,
// -1 skew; beta: 1 real, 2 complex).
CMatrix additive_bm_sample(long N, double t, int epsilon, int beta, CounterRng& rng);

// --- p-moments by graph-moment summation ---------------------------------------

// m_p = N^{-cycles(p)} sum over assignments of {1..N} to the blocks of tp of
// prod_j (M_j)_{i_j, i_{j'}}; factorized over the cycles of tp. The matrices
// are listed in column order (word already resolved).
Rational p_moment_exact(const std::vector<const QMatrix*>& ms, const Partition& p);
std::complex<double> p_moment_numeric(const std::vector<const CMatrix*>& ms, const Partition& p);

// Exclusive moment: injective assignments (distinct value per block of tp).
Rational exclusive_moment_exact(const std::vector<const QMatrix*>& ms, const Partition& p);

// --- finite-dimensional cumulants ------------------------------------------------

// From exact p-moments of a concrete family: t_{p'} = N^{cycles(p')} m_{p'},
// Gram-solved over A_k, then rescaled kappa_p = c_p N^{nc(p)-cycles(p)}.
std::map<Partition, Rational> finite_cumulants_exact(const std::vector<const QMatrix*>& ms,
                                                     int k, FamilyTag tag, long N);
// Same from externally estimated mean p-moments (Monte Carlo lane).
std::map<Partition, double> finite_cumulants_from_moments(
    const std::map<Partition, double>& mean_moments, int k, FamilyTag tag, long N);
std::map<Partition, Rational> finite_cumulants_from_moments_exact(
    const std::map<Partition, Rational>& mean_moments, int k, FamilyTag tag, long N);

// Finite-N inverse of finite_cumulants: resynthesize the endomorphism
// coefficients and push them through the Gram pairing. (The triangular
// m_p = sum_{p' <= p} kappa_{p'} only holds in the N -> infinity limit.)
std::map<Partition, Rational> finite_moments_from_cumulants(
    const std::map<Partition, Rational>& kappa, int k, FamilyTag tag, long N);

// E[(M)_{n_1'}^{n_1} ...] = sum_{p1 in A_k, p1 finer than Ker}
// N^{-(nc - cycles)} kappa_{p1}; tuple ordered (n_1, n_1', ..., n_k, n_k').
Rational entry_moment_prediction(const std::map<Partition, Rational>& kappa, FamilyTag tag,
                                 const std::vector<long>& tuple, long N);
double entry_moment_prediction_numeric(const std::map<Partition, double>& kappa, FamilyTag tag,
                                       const std::vector<long>& tuple, long N);

// --- diagnostics and bridges -------------------------------------------------------

// Monte Carlo estimate of the strong-invariance defect per kernel class:
// N^{nc-cycles} sup_{Ker(I)=Ker(I')=p} |E[L_I - L_{I'}]|.
std::map<Partition, double> strong_invariance_diagnostic(const SampleSpec& spec, int k,
                                                         long samples, int threads,
                                                         long tuple_cap = 3000);

// Classical cumulant via the recursive moment relation (reference).
Rational classical_cumulant(const std::vector<Rational>& moments, int k);

// cum_k(X) = E kappa_{0_k} of the iid diagonal family Diag(X^(n)), built from
// the exact expected tensor; law given by its first k moments.
Rational classical_bridge(const std::vector<Rational>& moments, int k, long l);

// Exact mean p-moments of the iid diagonal family with the given law moments.
Rational diag_family_mean_moment(const std::vector<Rational>& moments, const Partition& p, long N);

// --- matrix file formats --------------------------------------------------------

// CSV, row-major, complex entries rendered "re+imi".
std::string matrix_to_csv(const CMatrix& m);
CMatrix matrix_from_csv(const std::string& text);

// Compact binary: magic "PALB", u32 version, u64 N, then row-major f64
// (re, im) pairs, little-endian.
std::vector<uint8_t> matrix_to_palb(const CMatrix& m);
CMatrix matrix_from_palb(const std::vector<uint8_t>& bytes);

}  // namespace palab
