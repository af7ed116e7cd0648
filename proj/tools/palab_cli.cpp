#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "palab/experiment.hpp"

using namespace palab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_partition(const std::string& op, const std::string& ps, const std::string& qs, int k1) {
    Partition p = parse_partition(ps);
    if (op == "canonical") {
        std::cout << to_string(p) << "\n";
    } else if (op == "stats") {
        auto st = stats(p);
        std::cout << "k=" << p.k() << " nc=" << st.nc << " cycles=" << st.cycles
                  << " irreducible=" << st.irreducible
                  << " weakly_irreducible=" << st.weakly_irreducible
                  << " exclusive_irreducible=" << st.exclusive_irreducible << "\n";
    } else if (op == "transpose") {
        std::cout << to_string(transpose(p)) << "\n";
    } else if (op == "orbit") {
        std::cout << to_string(orbit_rep(p)) << "\n";
    } else if (op == "flip") {
        std::cout << to_string(flip(p, k1)) << "\n";
    } else if (op == "join" || op == "compose" || op == "tensor" || op == "compare") {
        Partition q = parse_partition(qs);
        if (op == "join") std::cout << to_string(join(p, q)) << "\n";
        if (op == "tensor") std::cout << to_string(tensor(p, q)) << "\n";
        if (op == "compose") {
            auto r = compose(p, q);
            std::cout << to_string(r.p) << " kappa=" << r.kappa << "\n";
        }
        if (op == "compare") {
            auto r = compare(p, q);
            std::cout << "d=" << rat_str(r.distance) << " df=" << rat_str(r.defect)
                      << " leq=" << r.leq << " finer=" << r.finer
                      << " coarser_compatible=" << r.coarser_compatible
                      << " finer_compatible=" << r.finer_compatible << "\n";
        }
    } else if (op == "splittings") {
        for (const auto& s : splittings(p))
            std::cout << to_string(s.left) << " | " << to_string(s.right) << "\n";
    } else {
        std::cerr << "unknown partition op: " << op << "\n";
        return 1;
    }
    return 0;
}

int cmd_transform(const std::string& op, const std::string& in_path,
                  const std::string& out_path, const std::string& family,
                  const std::string& to_family) {
    MomentTable table;
    std::string kind;
    table_from_json(read_file(in_path), table, &kind);
    FamilyTag tag = family.empty() ? table.tag : parse_family(family);

    std::string out_kind = kind;
    TableData result;
    if (op == "m2c") {
        result = moments_to_cumulants(table, tag);
        out_kind = "cumulants";
    } else if (op == "c2m") {
        CumulantTable kt;
        kt.tag = tag;
        for (const auto& [key, v] : table.entries()) kt.set(key.p, key.word, v);
        result = cumulants_to_moments(kt);
        out_kind = "moments";
    } else if (op == "to-exclusive") {
        result = exclusive_transform(table, tag, ExclusiveDirection::to_exclusive);
        out_kind = "exclusive-moments";
    } else if (op == "from-exclusive") {
        result = exclusive_transform(table, tag, ExclusiveDirection::from_exclusive);
        out_kind = "moments";
    } else if (op == "extend") {
        result = extend_table(table, tag, parse_family(to_family));
        out_kind = "moments";
    } else if (op == "restrict") {
        result = restrict_table(table, tag, parse_family(to_family));
        out_kind = "moments";
    } else {
        std::cerr << "unknown transform op: " << op << "\n";
        return 1;
    }
    std::string js = table_to_json(result, out_kind);
    if (out_path.empty()) {
        std::cout << js << "\n";
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << js;
    }
    return 0;
}

int cmd_predict(const std::string& which, int k, double t, double lambda) {
    if (which == "semicircle") {
        std::cout << rat_str(semicircle_moment(k)) << "\n";
    } else if (which == "unitary-bm") {
        std::cout << unitary_bm_moment(k, t) << "\n";
    } else if (which == "free-poisson") {
        Rational lam(long(std::lround(lambda * 1048576)), 1048576L);
        lam.canonicalize();
        std::cout << rat_str(free_poisson_moment(lam, k)) << "\n";
    } else {
        std::cerr << "unknown prediction: " << which << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partition-algebra laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 2;
    long budget = moment_budget();
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--budget", budget, "moment summation budget");

    auto* part = app.add_subcommand("partition", "operations on encoded partitions");
    std::string pop, pstr, qstr;
    int k1 = 0;
    part->add_option("--op", pop,
                     "canonical|stats|transpose|orbit|flip|join|compose|tensor|compare|splittings")
        ->required();
    part->add_option("--p", pstr, "partition, e.g. \"{1 2'}{2 1'}\"")->required();
    part->add_option("--q", qstr, "second partition");
    part->add_option("--k1", k1, "column split for flip");

    auto* trans = app.add_subcommand("transform", "table transforms (json in/out)");
    std::string top, tin, tout, tfam, tto;
    trans->add_option("--op", top, "m2c|c2m|to-exclusive|from-exclusive|extend|restrict")
        ->required();
    trans->add_option("--in", tin, "input table json")->required();
    trans->add_option("--out", tout, "output path (stdout when omitted)");
    trans->add_option("--family", tfam, "family tag override");
    trans->add_option("--to-family", tto, "target family for extend/restrict");

    auto* sim = app.add_subcommand("simulate", "run a configured scenario");
    std::string cfg_path, out_dir;
    uint64_t seed_override = 0;
    sim->add_option("--config", cfg_path, "experiment config json")->required();
    sim->add_option("--out-dir", out_dir, "output directory");
    auto* seed_opt = sim->add_option("--seed", seed_override, "seed override");

    auto* pred = app.add_subcommand("predict", "closed-form reference values");
    std::string which;
    int pk = 1;
    double pt = 1.0, plambda = 1.0;
    pred->add_option("--which", which, "semicircle|unitary-bm|free-poisson")->required();
    pred->add_option("--k", pk, "moment order")->required();
    pred->add_option("--t", pt, "time");
    pred->add_option("--lambda", plambda, "free poisson rate");

    auto* ver = app.add_subcommand("verify", "run the acceptance battery");
    std::string level = "all";
    ver->add_option("--level", level, "exact|mc|all");

    CLI11_PARSE(app, argc, argv);
    set_moment_budget(budget);

    try {
        if (part->parsed()) return cmd_partition(pop, pstr, qstr, k1);
        if (trans->parsed()) return cmd_transform(top, tin, tout, tfam, tto);
        if (sim->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::from_json_text(read_file(cfg_path));
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (seed_opt->count() > 0) {
                cfg.seed = seed_override;
                cfg.has_seed = true;
            }
            if (cfg.threads <= 0) cfg.threads = threads;
            auto rs = run_experiment(cfg);
            std::cout << results_to_csv(rs);
            bool all = true;
            for (const auto& r : rs) all = all && r.pass;
            return all ? 0 : 2;
        }
        if (pred->parsed()) return cmd_predict(which, pk, pt, plambda);
        if (ver->parsed()) {
            auto rs = verify_suite(level, threads, &std::cout);
            bool all = true;
            for (const auto& r : rs) all = all && r.pass;
            std::cout << (all ? "ALL PASS" : "FAILURES PRESENT") << " (" << rs.size()
                      << " criteria at level " << level << ")\n";
            return all ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
