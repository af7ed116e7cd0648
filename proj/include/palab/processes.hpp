#pragma once

#include "palab/free_ops.hpp"
#include "palab/matrix_lab.hpp"

namespace palab {

// Characteristic triplet of a free infinitely divisible law: (eta, a, rho)
// additive (atoms on R \ {0}) or (arg omega, b, nu) multiplicative (atoms are
// angles on [-pi, pi] \ {0}).
struct LevyTriplet {
    bool multiplicative = false;
    double drift = 0;
    double diffusion = 0;
    std::vector<std::pair<double, double>> atoms;  // (location, weight)

    void validate() const;
    static LevyTriplet from_spec(const SampleSpec& spec);
    double total_jump_mass() const;
};

// Perfect matching of {1..n} with pairs tagged transposition (T) or Weyl
// contraction (W); indexes the matricial Wick formula.
struct PairingTwoSpecies {
    std::vector<std::pair<int, int>> pairs;  // 1-based, i < j
    std::vector<bool> weyl;                  // true = W, false = T
    int t_count() const;
    Partition brauer(int n) const;  // b_pi
};

// All one-specie (beta = 2) or two-species (beta = 1) pairings of {1..k}.
std::vector<PairingTwoSpecies> pairings(int k, int beta);

// E[M_1 (x) ... (x) M_k] = sum_pi eps^{#T_pi} prod C(M_i, M_j) rho_N(b_pi),
// returned in the partition basis (independent of N).
PartitionVector wick_tensor(int k, int epsilon, int beta,
                            const std::vector<std::vector<Rational>>& covariance);

// Path-endpoint samplers for bm-unitary, levy-additive, levy-mult specs.
CMatrix sample_process(const SampleSpec& spec, long index);

// --- limiting generator transforms R(G) ----------------------------------------

// additive BM: eps (1,2)* + (2 - beta) [1,2]*.
SpectralForm generator_additive_bm(int epsilon, int beta);
// unitary BM: -k/2 id_k* - ((1,2) (x) id)* + (2 - beta)([1,2] (x) id)* per grade.
SpectralFormD generator_unitary_bm(int beta, int k_max);
// additive Levy: eta on 1-cycles, a + int x^2 rho on 2-cycles, int x^k rho above.
SpectralForm generator_additive_levy(const Rational& eta, const Rational& a,
                                     const std::vector<std::pair<Rational, Rational>>& atoms,
                                     int k_max);
// multiplicative Levy: grade k carries k L_1 on id_k and L_m on m-cycle (x) id.
SpectralFormD generator_multiplicative_levy(const LevyTriplet& triplet, int k_max);

SpectralForm generator_spectral_form(const SampleSpec& spec, int k_max);  // exact kinds
SpectralFormD generator_spectral_form_numeric(const SampleSpec& spec, int k_max);

// One sample of the explicit matrix model whose generator converges to the
// dual form of the given degree-2 class.
CMatrix gaussian_approximant(const Partition& p2_class, long N, double t, CounterRng& rng);

// --- closed-form reference moments ------------------------------------------------

long catalan(int n);
Rational semicircle_moment(int k);                            // #PNC_k
double unitary_bm_moment(int k, double t);                    // int z^k nu_t
Rational free_poisson_moment(const Rational& lambda, int k);  // sum over NC(k)

// Noncrossing set partitions of {1..k} (oracle helper).
std::vector<std::vector<std::vector<int>>> noncrossing_partitions(int k);

}  // namespace palab
