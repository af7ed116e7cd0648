#include "palab/free_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace palab {

namespace {

bool is_constant_word(const Word& w, const std::string& label) {
    return std::all_of(w.begin(), w.end(), [&](const std::string& s) { return s == label; });
}

std::string single_label(const TableData& t) {
    for (const auto& [key, _] : t.entries())
        if (!key.word.empty()) return key.word.front();
    return "";
}

void enumerate_words(const std::vector<std::string>& alphabet, int k, Word& cur,
                     std::vector<Word>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (const auto& l : alphabet) {
        cur.push_back(l);
        enumerate_words(alphabet, k, cur, out);
        cur.pop_back();
    }
}

Rational class_value_or_unit(const SpectralForm& f, const Partition& p) {
    return p.k() == 0 ? Rational(1) : f.at_class(p);
}

// Set partitions of {0..m-1} by recursive placement.
void group_partitions(int m, std::vector<std::vector<std::vector<int>>>& out) {
    std::vector<std::vector<int>> groups;
    auto rec = [&](auto&& self, int next) -> void {
        if (next == m) {
            out.push_back(groups);
            return;
        }
        const size_t g = groups.size();
        for (size_t i = 0; i < g; ++i) {
            groups[i].push_back(next);
            self(self, next + 1);
            groups[i].pop_back();
        }
        groups.push_back({next});
        self(self, next + 1);
        groups.pop_back();
    };
    rec(rec, 0);
}

}  // namespace

SpectralForm r_transform(const CumulantTable& kt, const std::string& label) {
    SpectralForm f;
    for (const auto& [key, v] : kt.entries()) {
        if (!is_constant_word(key.word, label)) continue;
        f.set_class(key.p, v);
    }
    return f;
}

CumulantTable to_cumulant_table(const SpectralForm& f, FamilyTag tag, const std::string& label,
                                int k_max) {
    CumulantTable out;
    out.tag = tag;
    for (int k = 1; k <= k_max; ++k)
        for (const auto& p : enumerate_family(k, tag))
            out.set(p, constant_word(k, label), f.at_class(p));
    return out;
}

CumulantTable free_sum(const CumulantTable& ka, const CumulantTable& kb,
                       const std::string& out_label) {
    if (ka.tag != kb.tag) throw std::invalid_argument("free_sum: family tag mismatch");
    std::string la = single_label(ka);
    std::string lb = single_label(kb);
    SpectralForm fa = r_transform(ka, la);
    SpectralForm fb = r_transform(kb, lb);

    CumulantTable out;
    out.tag = ka.tag;
    std::set<int> ks;
    for (int k : ka.grades()) ks.insert(k);
    for (int k : kb.grades()) ks.insert(k);
    for (int k : ks) {
        if (k == 0) continue;
        for (const auto& p : enumerate_family(k, ka.tag)) {
            Rational s(0);
            for (const auto& sp : splittings(p))
                s += class_value_or_unit(fa, sp.left) * class_value_or_unit(fb, sp.right);
            out.set(p, constant_word(k, out_label), s);
        }
    }
    return out;
}

CumulantTable free_sum_power(const CumulantTable& ka, long n, const std::string& out_label) {
    if (n < 1) throw std::invalid_argument("free_sum_power: n must be >= 1");
    CumulantTable acc = ka;
    for (long i = 1; i < n; ++i) acc = free_sum(acc, ka, out_label);
    if (n == 1) {
        // relabel
        CumulantTable out;
        out.tag = ka.tag;
        for (const auto& [key, v] : ka.entries())
            out.set(key.p, constant_word(key.p.k(), out_label), v);
        return out;
    }
    return acc;
}

CumulantTable scale_by_grade(const CumulantTable& t, const Rational& factor) {
    CumulantTable out;
    out.tag = t.tag;
    for (const auto& [key, v] : t.entries())
        out.set(key.p, key.word, v * rat_pow(factor, key.p.k()));
    return out;
}

CumulantTable free_product_cumulants(const CumulantTable& ka, const CumulantTable& kb,
                                     const std::string& out_label) {
    if (ka.tag != kb.tag) throw std::invalid_argument("free_product: family tag mismatch");
    std::string la = single_label(ka);
    std::string lb = single_label(kb);
    SpectralForm fa = r_transform(ka, la);
    SpectralForm fb = r_transform(kb, lb);

    CumulantTable out;
    out.tag = ka.tag;
    for (int k : ka.grades()) {
        if (k == 0) continue;
        const auto& items = enumerate_family(k, ka.tag);
        // One pass over pairs, accumulated into q = p1 o p2; the geodesic
        // criterion is tested against (q (x) id_k) tau.
        std::map<Partition, Partition> target;
        std::map<Partition, Rational> acc;
        for (const auto& q : items) {
            target.emplace(q, product_geodesic_target(q));
            acc.emplace(q, Rational(0));
        }
        for (const auto& p1 : items) {
            Rational a = fa.at_class(p1);
            if (a == 0) continue;
            for (const auto& p2 : items) {
                Rational b = fb.at_class(p2);
                if (b == 0) continue;
                Partition q = compose(p1, p2).p;
                auto it = target.find(q);
                if (it == target.end()) continue;
                if (leq(tensor(p1, p2), it->second)) acc[q] += a * b;
            }
        }
        for (const auto& q : items) out.set(q, constant_word(k, out_label), acc[q]);
    }
    return out;
}

MomentTable free_product_moments(const CumulantTable& ka, const MomentTable& mb,
                                 const std::string& label_b, const std::string& out_label) {
    std::string la = single_label(ka);
    SpectralForm fa = r_transform(ka, la);
    MomentTable out;
    out.tag = mb.tag;
    for (int k : ka.grades()) {
        if (k == 0) continue;
        const Word wb = constant_word(k, label_b);
        for (const auto& p : enumerate_family(k, mb.tag)) {
            Rational s(0);
            for (const auto& p1 : enumerate_family(k, ka.tag)) {
                if (!leq(p1, p)) continue;
                Rational c = fa.at_class(p1);
                if (c == 0) continue;
                s += c * mb.at(compose(transpose(p1), p).p, wb);
            }
            out.set(p, constant_word(k, out_label), s);
        }
    }
    return out;
}

Rational exp_boxplus(const SpectralForm& phi, const Rational& t, const Partition& p) {
    if (p.k() == 0) return Rational(1);
    auto cyc = cycle_sets(p);
    const int m = static_cast<int>(cyc.size());
    std::vector<std::vector<std::vector<int>>> grp;
    group_partitions(m, grp);
    Rational total(0);
    for (const auto& pi : grp) {
        Rational prod(1);
        for (const auto& g : pi) {
            std::vector<Point> pts;
            for (int ci : g) pts.insert(pts.end(), cyc[ci].begin(), cyc[ci].end());
            std::sort(pts.begin(), pts.end());
            prod *= t * phi.at_class(extract(p, pts));
            if (prod == 0) break;
        }
        total += prod;
    }
    return total;
}

double exp_boxplus_numeric(const SpectralFormD& phi, double t, const Partition& p) {
    if (p.k() == 0) return 1.0;
    auto cyc = cycle_sets(p);
    const int m = static_cast<int>(cyc.size());
    std::vector<std::vector<std::vector<int>>> grp;
    group_partitions(m, grp);
    double total = 0;
    for (const auto& pi : grp) {
        double prod = 1;
        for (const auto& g : pi) {
            std::vector<Point> pts;
            for (int ci : g) pts.insert(pts.end(), cyc[ci].begin(), cyc[ci].end());
            std::sort(pts.begin(), pts.end());
            prod *= t * phi.at_class(extract(p, pts));
            if (prod == 0) break;
        }
        total += prod;
    }
    return total;
}

BoxtimesResult boxtimes_evolution(const SpectralFormD& phi, int k,
                                  const std::vector<double>& t_grid,
                                  const std::vector<Partition>& targets, double tol,
                                  int iter_cap) {
    for (const auto& p : targets)
        if (p.k() != k) throw SizeMismatch("boxtimes_evolution: target grade mismatch");
    // Members of the supported classes at grade k.
    std::vector<std::pair<Partition, double>> support;
    {
        std::set<Partition> seen;
        std::vector<int> sigma(k);
        for (const auto& [rep, v] : phi.values) {
            if (rep.k() != k || v == 0.0) continue;
            std::iota(sigma.begin(), sigma.end(), 1);
            do {
                Partition c = conjugate(rep, sigma);
                if (seen.insert(c).second) support.emplace_back(c, v);
            } while (std::next_permutation(sigma.begin(), sigma.end()));
        }
    }

    // Reachable closure of the targets under q -> tp1 o q.
    std::vector<Partition> nodes;
    std::map<Partition, int> index;
    auto add_node = [&](const Partition& p) {
        if (index.emplace(p, static_cast<int>(nodes.size())).second) nodes.push_back(p);
    };
    for (const auto& p : targets.empty() ? enumerate_family(k, FamilyTag::P) : targets) add_node(p);
    for (size_t i = 0; i < nodes.size(); ++i) {
        const Partition cur = nodes[i];
        for (const auto& [p1, v] : support) {
            if (!leq(p1, cur)) continue;
            add_node(compose(transpose(p1), cur).p);
        }
    }
    const size_t n = nodes.size();

    // Sparse generator rows: d/dt m_i = sum_j G[i][j] m_j.
    std::vector<std::vector<std::pair<int, double>>> G(n);
    double norm = 0;
    for (size_t i = 0; i < n; ++i) {
        std::map<int, double> row;
        for (const auto& [p1, v] : support) {
            if (!leq(p1, nodes[i])) continue;
            row[index.at(compose(transpose(p1), nodes[i]).p)] += v;
        }
        double rowsum = 0;
        for (const auto& [j, v] : row) {
            G[i].emplace_back(j, v);
            rowsum += std::fabs(v);
        }
        norm = std::max(norm, rowsum);
    }

    auto apply = [&](const std::vector<double>& v) {
        std::vector<double> out(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double s = 0;
            for (const auto& [j, w] : G[i]) s += w * v[j];
            out[i] = s;
        }
        return out;
    };

    BoxtimesResult result;
    for (double t : t_grid) {
        std::vector<double> m(n, 1.0);
        if (t > 0 && norm > 0) {
            const int steps = std::max(1, static_cast<int>(std::ceil(t * norm / 0.5)));
            const double dt = t / steps;
            const double step_tol = tol / steps;
            for (int s = 0; s < steps; ++s) {
                std::vector<double> term = m, acc = m;
                bool converged = false;
                for (int j = 1; j <= iter_cap; ++j) {
                    term = apply(term);
                    const double c = dt / j;
                    double tnorm = 0;
                    for (size_t i = 0; i < n; ++i) {
                        term[i] *= c;
                        acc[i] += term[i];
                        tnorm = std::max(tnorm, std::fabs(term[i]));
                    }
                    const double q = dt * norm / (j + 1);
                    if (q < 1 && tnorm * q / (1 - q) < step_tol) {
                        converged = true;
                        break;
                    }
                }
                if (!converged)
                    throw std::runtime_error("boxtimes_evolution: tolerance not reached within iteration cap");
                m = acc;
            }
        }
        auto& slot = result.at[t];
        for (size_t i = 0; i < n; ++i) slot[nodes[i]] = m[i];
    }
    return result;
}

bool word_compatible(const Partition& p, const Word& w, const std::vector<std::string>& labels1,
                     const std::vector<std::string>& labels2) {
    auto side = [&](const std::string& lbl) -> int {
        if (std::find(labels1.begin(), labels1.end(), lbl) != labels1.end()) return 1;
        if (std::find(labels2.begin(), labels2.end(), lbl) != labels2.end()) return 2;
        throw std::invalid_argument("word_compatible: unknown label " + lbl);
    };
    for (const auto& cyc : cycle_sets(p)) {
        int seen = 0;
        for (Point x : cyc) {
            if (point_primed(x)) continue;
            int s = side(w[point_col(x) - 1]);
            if (seen == 0) seen = s;
            else if (seen != s) return false;
        }
    }
    return true;
}

MomentTable free_joint_moments(const CumulantTable& ka, const std::string& la,
                               const CumulantTable& kb, const std::string& lb, int k_cap) {
    SpectralForm fa = r_transform(ka, single_label(ka));
    SpectralForm fb = r_transform(kb, single_label(kb));
    CumulantTable joint;
    joint.tag = FamilyTag::P;
    for (int k = 1; k <= k_cap; ++k) {
        std::vector<Word> words;
        Word cur;
        enumerate_words({la, lb}, k, cur, words);
        for (const Word& w : words) {
            for (const auto& p : enumerate_family(k, FamilyTag::P)) {
                Rational v(0);
                if (word_compatible(p, w, {la}, {lb})) {
                    std::vector<Point> pa, pb;
                    for (int c = 1; c <= k; ++c) {
                        auto& dst = w[c - 1] == la ? pa : pb;
                        dst.push_back(make_point(c, false));
                        dst.push_back(make_point(c, true));
                    }
                    Partition qa = extract(p, pa), qb = extract(p, pb);
                    v = class_value_or_unit(fa, qa) * class_value_or_unit(fb, qb);
                }
                joint.set(p, w, v);
            }
        }
    }
    return cumulants_to_moments(joint);
}

CheckReport invariance_check(const CumulantTable& kp, FamilyTag tag2) {
    if (kp.tag != FamilyTag::P)
        throw std::invalid_argument("invariance_check: expects a P-cumulant table");
    for (const auto& [key, v] : kp.entries()) {
        if (!family_member(key.p, tag2) && v != 0)
            return {false, "nonzero cumulant outside family at " + to_string(key.p)};
    }
    MomentTable m = cumulants_to_moments(kp);
    MomentTable m2 = restrict_table(m, FamilyTag::P, tag2);
    CumulantTable k2 = moments_to_cumulants(m2, tag2);
    for (const auto& [key, v] : kp.entries()) {
        if (!family_member(key.p, tag2)) continue;
        const Rational* w = k2.find(key.p, key.word);
        if (!w || *w != v)
            return {false, "family cumulant mismatch at " + to_string(key.p)};
    }
    return {};
}

namespace {

bool word_mixed(const Word& w, const std::vector<std::string>& labels1) {
    bool has1 = false, has2 = false;
    for (const auto& l : w)
        (std::find(labels1.begin(), labels1.end(), l) != labels1.end() ? has1 : has2) = true;
    return has1 && has2;
}

}  // namespace

CheckReport freeness_check(const MomentTable& m, FamilyTag tag,
                           const std::vector<std::string>& labels1,
                           const std::vector<std::string>& labels2, int k_cap) {
    CumulantTable kt = moments_to_cumulants(m, tag);
    std::vector<std::string> alphabet = labels1;
    alphabet.insert(alphabet.end(), labels2.begin(), labels2.end());

    CheckReport route1;
    // (i) mixed cumulants vanish on incompatible partitions, (ii) compatible
    // ones factor across the cycle split carrying each family.
    for (int k = 2; k <= k_cap && route1.ok; ++k) {
        std::vector<Word> words;
        Word cur;
        enumerate_words(alphabet, k, cur, words);
        for (const Word& w : words) {
            if (!word_mixed(w, labels1)) continue;
            for (const auto& p : enumerate_family(k, tag)) {
                Rational v;
                try {
                    v = kt.at(p, w);
                } catch (const MissingEntry&) {
                    return {false, "incomplete table at " + to_string(p)};
                }
                if (!word_compatible(p, w, labels1, labels2)) {
                    if (v != 0) {
                        route1 = {false, "nonzero mixed cumulant at " + to_string(p)};
                        break;
                    }
                    continue;
                }
                // split columns by family side
                std::vector<Point> pts1, pts2;
                for (int c = 1; c <= k; ++c) {
                    bool in1 = std::find(labels1.begin(), labels1.end(), w[c - 1]) != labels1.end();
                    auto& dst = in1 ? pts1 : pts2;
                    dst.push_back(make_point(c, false));
                    dst.push_back(make_point(c, true));
                }
                Word w1, w2;
                for (const auto& l : w)
                    (std::find(labels1.begin(), labels1.end(), l) != labels1.end() ? w1 : w2)
                        .push_back(l);
                Rational lhs = v;
                Rational r1 = w1.empty() ? Rational(1) : kt.at(extract(p, pts1), w1);
                Rational r2 = w2.empty() ? Rational(1) : kt.at(extract(p, pts2), w2);
                if (lhs != r1 * r2) {
                    route1 = {false, "cumulant factorization fails at " + to_string(p)};
                    break;
                }
            }
            if (!route1.ok) break;
        }
    }

    // (iii) exclusive-moment identity with the finer-compatibility delta.
    CheckReport route2;
    MomentTable m1, m2;
    m1.tag = m2.tag = tag;
    for (const auto& [key, v] : m.entries()) {
        bool all1 = true, all2 = true;
        for (const auto& l : key.word) {
            bool in1 = std::find(labels1.begin(), labels1.end(), l) != labels1.end();
            all1 = all1 && in1;
            all2 = all2 && !in1;
        }
        if (all1) m1.set(key.p, key.word, v);
        if (all2) m2.set(key.p, key.word, v);
    }
    MomentTable ex = exclusive_transform(m, tag, ExclusiveDirection::to_exclusive);
    MomentTable ex1 = exclusive_transform(m1, tag, ExclusiveDirection::to_exclusive);
    MomentTable ex2 = exclusive_transform(m2, tag, ExclusiveDirection::to_exclusive);
    for (int k = 2; k <= k_cap && route2.ok; ++k) {
        for (int k1 = 1; k1 < k; ++k1) {
            std::vector<Word> was, wbs;
            Word cur;
            enumerate_words(labels1, k1, cur, was);
            enumerate_words(labels2, k - k1, cur, wbs);
            for (const Word& wa : was)
                for (const Word& wb : wbs) {
                    Word w = wa;
                    w.insert(w.end(), wb.begin(), wb.end());
                    for (const auto& p : enumerate_family(k, FamilyTag::P)) {
                        Partition pl = left_part(p, k1), pr = right_part(p, k1);
                        Partition tens = tensor(pl, pr);
                        bool delta = is_finer(tens, p) &&
                                     (tens.nc() - cycles(tens)) == (p.nc() - cycles(p));
                        Rational lhs, rhs(0);
                        try {
                            lhs = ex.at(p, w);
                            if (delta) rhs = ex1.at(pl, wa) * ex2.at(pr, wb);
                        } catch (const MissingEntry&) {
                            return {false, "incomplete table (exclusive route) at " + to_string(p)};
                        }
                        if (lhs != rhs) {
                            route2 = {false, "exclusive identity fails at " + to_string(p) +
                                                 " word " + [&] {
                                                     std::string s;
                                                     for (auto& l : w) s += l;
                                                     return s;
                                                 }()};
                            break;
                        }
                    }
                    if (!route2.ok) break;
                }
            if (!route2.ok) break;
        }
    }

    if (route1.ok != route2.ok)
        return {false, "internal: freeness routes disagree (" + route1.witness + " / " +
                           route2.witness + ")"};
    return route1.ok ? CheckReport{} : CheckReport{false, route1.witness + "; " + route2.witness};
}

}  // namespace palab
