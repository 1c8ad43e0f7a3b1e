// Batch front end: family/measure presets, counts, evaluations, checks,
// simulations, machine-readable output.  Exit 0 success, 1 failed check,
// 2 usage or configuration error.

#include <CLI11.hpp>

#include <oim/analysis.hpp>
#include <oim/families.hpp>
#include <oim/hook.hpp>
#include <oim/io.hpp>
#include <oim/measures.hpp>
#include <oim/tree.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace oim;

mpq_class parse_rational(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw UsageError("bad rational '" + s + "'");
    q.canonicalize();
    if (q < 0 || q > 1) throw UsageError("probability parameter out of [0,1]");
    return q;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoul(tok));
    return out;
}

struct FamilyOpts {
    std::string name = "ladder";
    std::size_t k = 2;                       // chains
    std::string growth = "4,16,64,256,1024"; // oscillating
    std::string exhaustion = "prefix";
    std::size_t step = 1;
};

void add_family_opts(CLI::App* cmd, FamilyOpts& f) {
    cmd->add_option("--family", f.name, "ladder | chains | grid | crossed | oscillating | single-chain | chain-plus-isolated | binary | comb")
        ->capture_default_str();
    cmd->add_option("--k", f.k, "number of chains for the chains family")->capture_default_str();
    cmd->add_option("--growth", f.growth, "oscillating stage sizes, comma-separated")->capture_default_str();
    cmd->add_option("--exhaustion", f.exhaustion, "prefix | stage | square")->capture_default_str();
    cmd->add_option("--step", f.step, "elements per prefix-exhaustion stage")->capture_default_str();
}

OraclePtr make_family(const FamilyOpts& f) {
    if (f.name == "ladder") return ladder_causet();
    if (f.name == "chains") return disjoint_chains_causet(f.k);
    if (f.name == "grid") return grid_causet();
    if (f.name == "crossed") return crossed_chains_causet();
    if (f.name == "oscillating") return oscillating_causet(parse_sizes(f.growth));
    if (f.name == "single-chain") return single_chain_forest();
    if (f.name == "chain-plus-isolated") return chain_plus_isolated_forest();
    if (f.name == "binary") return binary_tree_forest();
    if (f.name == "comb") return comb_forest();
    throw UsageError("unknown family '" + f.name + "'");
}

Exhaustion make_exhaustion(const FamilyOpts& f, const OraclePtr& o) {
    if (f.exhaustion == "prefix") return prefix_exhaustion(o, f.step);
    if (f.exhaustion == "stage") {
        auto osc = std::dynamic_pointer_cast<const OscillatingCauset>(o);
        if (!osc) throw UsageError("stage exhaustion requires the oscillating family");
        return osc->stage_exhaustion();
    }
    if (f.exhaustion == "square") {
        if (!std::dynamic_pointer_cast<const GridCauset>(o))
            throw UsageError("square exhaustion requires the grid family");
        return GridCauset::square_exhaustion();
    }
    throw UsageError("unknown exhaustion '" + f.exhaustion + "'");
}

struct MeasureOpts {
    std::string name = "ladder";
    std::string q = "1/2";             // two-chains
    std::string weights = "1/2,1/2";   // mixture
    std::string qs = "1/5,4/5";        // mixture component parameters
    std::string tree_preset = "pendants-at-powers";
    std::string levels = "1,2";        // pendants-at
    double tree_tol = 1e-4;
};

void add_measure_opts(CLI::App* cmd, MeasureOpts& m) {
    cmd->add_option("--measure", m.name, "ladder | two-chains | urn | mixture | chain-flow | binary-flow | comb-flow | tree | point-mass | momentum")
        ->capture_default_str();
    cmd->add_option("--q", m.q, "two-chains parameter, a rational in [0,1]")->capture_default_str();
    cmd->add_option("--weights", m.weights, "mixture weights, comma-separated rationals")->capture_default_str();
    cmd->add_option("--qs", m.qs, "mixture component q values, comma-separated")->capture_default_str();
    cmd->add_option("--tree-preset", m.tree_preset, "bare-chain | pendants-at | pendant-every-level | pendants-at-powers")
        ->capture_default_str();
    cmd->add_option("--levels", m.levels, "pendant levels for pendants-at")->capture_default_str();
    cmd->add_option("--tree-tol", m.tree_tol, "tail tolerance for analytic tree specs")->capture_default_str();
}

TreeSpec make_tree_spec(const MeasureOpts& m) {
    if (m.tree_preset == "bare-chain") return bare_chain_spec();
    if (m.tree_preset == "pendant-every-level") return pendant_every_level_spec();
    if (m.tree_preset == "pendants-at-powers") return pendants_at_powers_spec();
    if (m.tree_preset == "pendants-at") {
        auto v = parse_sizes(m.levels);
        return pendants_at_spec(std::set<std::size_t>(v.begin(), v.end()));
    }
    throw UsageError("unknown tree preset '" + m.tree_preset + "'");
}

std::vector<mpq_class> parse_rationals(const std::string& csv) {
    std::vector<mpq_class> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(parse_rational(tok));
    return out;
}

MeasurePtr make_measure(const MeasureOpts& m) {
    if (m.name == "ladder") return ladder_measure();
    if (m.name == "two-chains") return two_chain_measure(parse_rational(m.q));
    if (m.name == "urn") return urn_measure();
    if (m.name == "momentum") return momentum_measure();
    if (m.name == "chain-flow") return chain_flow_measure();
    if (m.name == "binary-flow") return binary_flow_measure();
    if (m.name == "comb-flow") return comb_flow_measure();
    if (m.name == "point-mass") return point_mass_measure(single_chain_forest());
    if (m.name == "mixture") {
        std::vector<mpq_class> ws = parse_rationals(m.weights), qs = parse_rationals(m.qs);
        if (ws.size() != qs.size() || ws.empty()) throw UsageError("mixture needs matching --weights and --qs");
        std::vector<std::pair<MeasurePtr, mpq_class>> parts;
        for (std::size_t i = 0; i < ws.size(); ++i) parts.emplace_back(two_chain_measure(qs[i]), ws[i]);
        return mixture_measure(std::move(parts));
    }
    if (m.name == "tree") {
        TreeMeasureResult r = tree_measure(make_tree_spec(m), m.tree_tol);
        if (!r.exists) throw UsageError("tree spec '" + m.tree_preset + "' admits no measure (divergent tail)");
        return r.measure;
    }
    throw UsageError("unknown measure '" + m.name + "'");
}

struct Sink {
    std::string out_path;
    OutputFormat fmt = OutputFormat::structured;

    void write(const json& j) const {
        std::string bytes = emit(j, fmt);
        if (out_path.empty()) {
            std::cout << bytes;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) throw UsageError("cannot open --out path '" + out_path + "'");
            f << bytes;
        }
    }
};

void add_sink_opts(CLI::App* cmd, Sink& s) {
    cmd->add_option("--out", s.out_path, "write output to this file instead of stdout");
    cmd->add_option("--format", [&s](const std::vector<std::string>& v) {
        if (v[0] == "structured") s.fmt = OutputFormat::structured;
        else if (v[0] == "csv") s.fmt = OutputFormat::csv;
        else return false;
        return true;
    }, "structured | csv")->expected(1);
}

} // namespace

int main(int argc, char** argv) {
    using namespace oim;
    CLI::App app{"order-invariant measures on fixed causal sets"};
    app.require_subcommand(1);
    app.set_config("--config");
    app.failure_message(CLI::FailureMessage::help);

    unsigned long seed = 1;
    if (const char* env = std::getenv("OIM_SEED")) seed = std::strtoul(env, nullptr, 10);
    app.add_option("--seed", seed, "RNG seed (default from OIM_SEED)")->capture_default_str();

    FamilyOpts fam;
    MeasureOpts meas;
    Sink sink;
    std::string stem_csv;
    std::size_t n = 10, n_max = 40, depth = 4, steps = 20, replicas = 1;
    double tol = 1e-6;
    std::string property = "kolmogorov", mode = "adjacent";
    std::string hook_csv, skew_csv;

    CLI::App* c_count = app.add_subcommand("count", "linear extensions of a finite stage");
    add_family_opts(c_count, fam);
    add_sink_opts(c_count, sink);
    c_count->add_option("--n", n, "stage index")->capture_default_str();

    CLI::App* c_eval = app.add_subcommand("eval", "probability of a stem under a measure");
    add_measure_opts(c_eval, meas);
    add_sink_opts(c_eval, sink);
    c_eval->add_option("--stem", stem_csv, "stem as comma-separated element labels")->required();

    CLI::App* c_limit = app.add_subcommand("limit", "nu^{Z_n}(E(stem)) along an exhaustion");
    add_family_opts(c_limit, fam);
    add_sink_opts(c_limit, sink);
    c_limit->add_option("--stem", stem_csv, "stem as comma-separated element labels")->required();
    c_limit->add_option("--n-max", n_max, "last stage to evaluate")->capture_default_str();
    c_limit->add_option("--tol", tol, "convergence tolerance")->capture_default_str();

    CLI::App* c_check = app.add_subcommand("check", "verify a measure property to a depth");
    add_measure_opts(c_check, meas);
    add_sink_opts(c_check, sink);
    c_check->add_option("--property", property, "kolmogorov | order-invariance | order-markov | essentiality")
        ->capture_default_str();
    c_check->add_option("--depth", depth, "stem length bound")->capture_default_str();
    c_check->add_option("--mode", mode, "adjacent | full (order-invariance only)")->capture_default_str();
    c_check->add_option("--stem", stem_csv, "target stem (essentiality only)");
    c_check->add_option("--replicas", replicas, "replica count (essentiality only)")->capture_default_str();

    CLI::App* c_sim = app.add_subcommand("simulate", "sample trajectories from a measure");
    add_measure_opts(c_sim, meas);
    add_sink_opts(c_sim, sink);
    c_sim->add_option("--steps", steps, "trajectory length")->capture_default_str();
    c_sim->add_option("--replicas", replicas, "number of trajectories")->capture_default_str();

    CLI::App* c_tree = app.add_subcommand("tree", "evaluate a down-tree specification");
    add_measure_opts(c_tree, meas);
    add_sink_opts(c_tree, sink);
    c_tree->add_option("--stem", stem_csv, "also report the probability of this stem");

    CLI::App* c_grid = app.add_subcommand("grid", "hook-length counts and grid stem values");
    add_sink_opts(c_grid, sink);
    c_grid->add_option("--hook", hook_csv, "partition rows, e.g. 3,2,1");
    c_grid->add_option("--skew", skew_csv, "skew shape lambda;mu, e.g. 3,2;1");
    c_grid->add_option("--stem", stem_csv, "grid stem labels, e.g. (0,0),(1,0)");
    c_grid->add_option("--n", n, "square side for --stem evaluation")->capture_default_str();

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

    try {
        app.parse(argc, argv);

        if (*c_count) {
            OraclePtr o = make_family(fam);
            Restriction r = finite_restriction(*o, make_exhaustion(fam, o), n);
            json j;
            j["family"] = fam.name;
            j["n"] = n;
            j["elements"] = r.elements.size();
            j["count"] = count_linear_extensions(r.poset).get_str();
            sink.write(j);
        } else if (*c_eval) {
            MeasurePtr mu = make_measure(meas);
            OrderedStem s = mu->support()->parse_stem(stem_csv);
            json j;
            j["measure"] = mu->name();
            j["stem"] = stem_csv;
            j["prob"] = prob_to_json(mu->prob(s));
            sink.write(j);
        } else if (*c_limit) {
            OraclePtr o = make_family(fam);
            OrderedStem s = o->parse_stem(stem_csv);
            ConvergenceReport rep = limit_measure_eval(*o, make_exhaustion(fam, o), s, n_max, tol);
            json j = convergence_report_to_json(rep);
            j["family"] = fam.name;
            j["stem"] = stem_csv;
            sink.write(j);
        } else if (*c_check) {
            MeasurePtr mu = make_measure(meas);
            CheckReport rep;
            if (property == "kolmogorov") {
                rep = check_kolmogorov(*mu, depth);
            } else if (property == "order-invariance") {
                if (mode != "adjacent" && mode != "full") throw UsageError("unknown mode '" + mode + "'");
                rep = check_order_invariance(*mu, depth,
                                             mode == "full" ? InvarianceMode::full : InvarianceMode::adjacent);
            } else if (property == "order-markov") {
                rep = check_order_markov(*mu, depth);
            } else if (property == "essentiality") {
                if (stem_csv.empty()) throw UsageError("essentiality needs --stem");
                OrderedStem s = mu->support()->parse_stem(stem_csv);
                std::vector<std::size_t> grid{10, 25, 50, 100, 200};
                EssentialityReport er = essentiality_test(*mu, s, replicas, grid, seed);
                sink.write(essentiality_report_to_json(er));
                return er.report.pass ? 0 : 1;
            } else {
                throw UsageError("unknown property '" + property + "'");
            }
            sink.write(check_report_to_json(rep));
            return rep.pass ? 0 : 1;
        } else if (*c_sim) {
            MeasurePtr mu = make_measure(meas);
            json rows = json::array();
            for (std::size_t r = 0; r < replicas; ++r) {
                Trajectory t = simulate(*mu, steps, seed + r);
                json labels = json::array();
                for (ElementId e : t.seq) labels.push_back(mu->support()->label(e));
                rows.push_back({{"seed", t.seed}, {"trajectory", labels}});
            }
            json j;
            j["measure"] = mu->name();
            j["steps"] = steps;
            j["rows"] = std::move(rows);
            sink.write(j);
        } else if (*c_tree) {
            TreeSpec spec = make_tree_spec(meas);
            TreeMeasureResult r = tree_measure(spec, meas.tree_tol);
            json j;
            j["preset"] = meas.tree_preset;
            j["exists"] = r.exists;
            j["tail_sum_bound"] = r.tail_sum_bound;
            if (r.exists && !stem_csv.empty()) {
                OrderedStem s = r.measure->support()->parse_stem(stem_csv);
                j["stem"] = stem_csv;
                j["prob"] = prob_to_json(r.measure->prob(s));
            }
            sink.write(j);
        } else if (*c_grid) {
            json j;
            if (!hook_csv.empty()) {
                Partition lam = parse_sizes(hook_csv);
                j["hook"] = hook_csv;
                j["count"] = hook_count(lam).get_str();
            } else if (!skew_csv.empty()) {
                auto semi = skew_csv.find(';');
                if (semi == std::string::npos) throw UsageError("--skew wants lambda;mu");
                Partition lam = parse_sizes(skew_csv.substr(0, semi));
                Partition mu = parse_sizes(skew_csv.substr(semi + 1));
                j["skew"] = skew_csv;
                j["count"] = skew_count(lam, mu).get_str();
            } else if (!stem_csv.empty()) {
                OraclePtr o = grid_causet();
                OrderedStem s = o->parse_stem(stem_csv);
                mpq_class v = grid_square_nu(n, s);
                j["stem"] = stem_csv;
                j["n"] = n;
                j["prob"] = prob_to_json(Prob::rational(v));
            } else {
                throw UsageError("grid wants one of --hook, --skew, --stem");
            }
            sink.write(j);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
