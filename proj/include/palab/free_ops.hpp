#pragma once

#include "palab/tables.hpp"

namespace palab {

// R-transform view of a single-element cumulant table (constant words).
SpectralForm r_transform(const CumulantTable& kt, const std::string& label);
CumulantTable to_cumulant_table(const SpectralForm& f, FamilyTag tag, const std::string& label,
                                int k_max);

// kappa_p(a+b) = sum over F_2(p) of kappa_{p1}(a) kappa_{p2}(b).
CumulantTable free_sum(const CumulantTable& ka, const CumulantTable& kb,
                       const std::string& out_label);

// n-fold free sum of identically distributed free copies.
CumulantTable free_sum_power(const CumulantTable& ka, long n, const std::string& out_label);

// Multiplies every grade-k entry by factor^k (the 1/sqrt(n) rescaling of the
// CLT uses factor = 1/sqrt(n) for square n).
CumulantTable scale_by_grade(const CumulantTable& t, const Rational& factor);

// kappa_p(ab) = sum over product_index_set(p) of kappa_{p1}(a) kappa_{p2}(b).
CumulantTable free_product_cumulants(const CumulantTable& ka, const CumulantTable& kb,
                                     const std::string& out_label);
// m_p(ab) = sum_{p1 in A_k, p1 <= p} kappa_{p1}(a) m_{tp1 o p}(b).
MomentTable free_product_moments(const CumulantTable& ka, const MomentTable& mb,
                                 const std::string& label_b, const std::string& out_label);

// (e^{boxplus t phi})(p): sum over set partitions of p's cycles, each group G
// contributing t * phi([extraction of p to G]). Missing classes count as 0.
Rational exp_boxplus(const SpectralForm& phi, const Rational& t, const Partition& p);
double exp_boxplus_numeric(const SpectralFormD& phi, double t, const Partition& p);

// Moment flow of the multiplicative semigroup: d/dt m_p = sum_{p1 <= p}
// phi(p1) m_{tp1 o p}, with m_q(0) = 1. Solved on the reachable closure of
// the requested targets by sub-stepped truncated Taylor series whose
// remainder is certified from the generator's max row sum.
struct BoxtimesResult {
    // t -> (partition -> moment); contains the full reachable closure.
    std::map<double, std::map<Partition, double>> at;
};
BoxtimesResult boxtimes_evolution(const SpectralFormD& phi, int k,
                                  const std::vector<double>& t_grid,
                                  const std::vector<Partition>& targets, double tol = 1e-12,
                                  int iter_cap = 400);

struct CheckReport {
    bool ok = true;
    std::string witness;
};

// Labels of w constant on every cycle of p (blocks may not link columns
// carrying elements from the two different families).
bool word_compatible(const Partition& p, const Word& w, const std::vector<std::string>& labels1,
                     const std::vector<std::string>& labels2);

// Joint moment table of a formally P-free pair: mixed cumulants vanish on
// incompatible partitions and factor across the family split otherwise.
MomentTable free_joint_moments(const CumulantTable& ka, const std::string& la,
                               const CumulantTable& kb, const std::string& lb, int k_cap);

// G(A2)-invariance of a P-cumulant table: kappa_p = delta_{p in A2} kappa^{A2}_p.
CheckReport invariance_check(const CumulantTable& kp, FamilyTag tag2);

// A-freeness of two label sets inside a joint moment table. Verifies the
// vanishing-mixed-cumulants + tensor-factorization route and the exclusive
// moment route, and requires the two routes to agree.
CheckReport freeness_check(const MomentTable& m, FamilyTag tag,
                           const std::vector<std::string>& labels1,
                           const std::vector<std::string>& labels2, int k_cap);

}  // namespace palab
