#include "unfold/datasets.hpp"
#include "unfold/graph.hpp"
#include "unfold/io.hpp"
#include "unfold/kernels.hpp"
#include "unfold/linalg.hpp"
#include "unfold/mvu.hpp"
#include "unfold/oos.hpp"
#include "unfold/spectral.hpp"
#include "unfold/variants.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace unfold;
using io::Json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kSolver = 4 };

/// UNFOLD_LOG = quiet | info | debug (default info).
int log_level() {
    static const int level = [] {
        const char* v = std::getenv("UNFOLD_LOG");
        if (!v) return 1;
        const std::string s = v;
        if (s == "quiet" || s == "0") return 0;
        if (s == "debug" || s == "2") return 2;
        return 1;
    }();
    return level;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << '\n';
}

/// Every option of a subcommand with its resolved value, in declaration order.
Json resolved_config(const CLI::App& cmd) {
    Json cfg = Json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        std::string value;
        if (opt->count() > 0) {
            value = opt->as<std::string>();
        } else {
            value = opt->get_default_str();
        }
        if (opt->get_expected_min() == 0) {
            cfg[name] = opt->count() > 0 ? opt->as<bool>() : false;
        } else {
            cfg[name] = value;
        }
    }
    return cfg;
}

Json base_report(const std::string& command, const CLI::App& cmd) {
    Json r;
    r["tool"] = "unfold";
    r["version"] = UNFOLD_VERSION;
    r["command"] = command;
    r["config"] = resolved_config(cmd);
    return r;
}

std::string describe_components(const DisconnectedGraph& e) {
    std::ostringstream os;
    os << "neighbor graph is disconnected (" << e.components().size() << " components):";
    for (const auto& comp : e.components()) {
        os << " {";
        for (std::size_t i = 0; i < comp.size() && i < 12; ++i) os << (i ? "," : "") << comp[i];
        if (comp.size() > 12) os << ",... " << comp.size() << " points";
        os << "}";
    }
    return os.str();
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    return p.replace_extension(suffix);
}

Json eigen_json(const Vector& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string manifold;
    Index n = 100;
    double noise = 0.0;
    std::uint64_t seed = 0;
    int classes = 0;
    std::string out;
    std::string params;
};

int run_generate(const GenerateArgs& a) {
    const auto g = datasets::generate({a.manifold, a.n, a.noise, a.seed});
    std::vector<std::string> labels;
    if (a.classes > 0) {
        // Equal-width bins of the first generating parameter.
        const Vector t = g.parameters.row(0).transpose();
        const double lo = t.minCoeff();
        const double span = std::max(t.maxCoeff() - lo, 1e-300);
        for (Index j = 0; j < t.size(); ++j) {
            const int c = std::min(a.classes - 1, static_cast<int>((t(j) - lo) / span * a.classes));
            labels.push_back("c" + std::to_string(c));
        }
    }
    io::write_points_csv(a.out, g.data.points, a.classes > 0 ? &labels : nullptr);
    const fs::path params = a.params.empty() ? sibling(a.out, ".params.csv") : fs::path(a.params);
    io::write_matrix_csv(params, g.parameters.transpose(), g.parameter_names);
    info("wrote " + std::to_string(a.n) + " points to " + a.out);
    return kOk;
}

// ---------------------------------------------------------------- unfold

struct UnfoldArgs {
    std::string in;
    std::string out;
    std::string report;
    std::string kernel_out;
    std::string model_out;
    std::string oos_scheme = "kernel-map";
    double gamma = 0.3;
    double eta = 0.0;
    std::string variant = "mvu";
    int k = 6;
    int dim = 0;
    double gap_ratio = 10.0;
    double alpha = 2.0;
    std::string actions;
    std::string label_kernel;
    int landmarks = 0;
    std::uint64_t seed = 0;
    bool prune = false;
    std::string prune_mode = "scree";
    double prune_value = 10.0;
    bool conformal_bound = false;
    bool allow_large = false;
    double tolerance = 1e-7;
    int max_outer = 50;
    int max_inner = 100;
    double band = 1e-7;
};

variants::PruneThreshold prune_threshold(const UnfoldArgs& a) {
    if (a.prune_mode == "scree") return variants::PruneThreshold::scree(a.prune_value);
    if (a.prune_mode == "absolute") return variants::PruneThreshold::absolute(a.prune_value);
    if (a.prune_mode == "quantile") return variants::PruneThreshold::quantile(a.prune_value);
    throw InvalidArgument("prune mode must be scree, absolute or quantile");
}

struct Solved {
    mvu::MvuResult result;
    Json pruned = Json::array();
};

Solved solve_variant(const UnfoldArgs& a, Dataset& data, const mvu::MvuOptions& opts) {
    Solved out;
    const std::string& v = a.variant;
    const bool graph_based = v != "full";
    std::optional<graph::NeighborGraph> graph;
    auto need_labels = [&] {
        if (!data.labels) throw InvalidArgument("variant '" + v + "' needs a label column in the input CSV");
    };
    if (v == "are") {
        if (a.actions.empty()) throw InvalidArgument("variant 'are' needs --actions");
        data.actions = io::read_actions(a.actions);
        data.validate();
    }
    if (graph_based) {
        if (v == "smvu1") {
            need_labels();
            graph = variants::within_class_graph(data, a.k);
        } else {
            graph = graph::build_knn_graph(data, a.k);
        }
        if (a.prune || v == "relaxed") {
            if (v == "smvu1") throw InvalidArgument("pruning is not available for the class-wise variant");
            auto pr = variants::prune_short_circuits(*graph, data, prune_threshold(a));
            for (const auto& e : pr.removed) out.pruned.push_back({e.from, e.to});
            info("pruned " + std::to_string(pr.removed.size()) + " edges (threshold " + std::to_string(pr.threshold) + ")");
            graph = std::move(pr.graph);
        }
        if (v != "smvu1") {
            auto comps = graph->components();
            if (comps.size() > 1) throw DisconnectedGraph(std::move(comps));
        }
    }
    const graph::NeighborGraph* g = graph ? &*graph : nullptr;

    if (v == "mvu" || v == "relaxed" || v == "full") {
        mvu::MvuOptions o = opts;
        o.allow_large_full_pair = a.allow_large;
        out.result = mvu::solve_mvu(data, g, o);
    } else if (v == "smvu1") {
        need_labels();
        out.result = mvu::solve_program(variants::smvu1_program(data, *g, {a.alpha}), g->max_length(), opts,
                                        std::nullopt, &data);
    } else if (v == "smvu2") {
        need_labels();
        out.result = mvu::solve_program(variants::smvu2_program(data, *g), g->max_length(), opts, std::nullopt, &data);
    } else if (v == "colored") {
        need_labels();
        Matrix kl;
        if (a.label_kernel.empty()) {
            kl = kernels::delta_kernel(*data.labels).values;
        } else {
            kl = io::read_matrix_csv(a.label_kernel);
        }
        out.result = mvu::solve_program(variants::colored_program(data, *g, kl), g->max_length(), opts, std::nullopt,
                                        &data);
    } else if (v == "are") {
        const auto prog = variants::are_program(data, g, opts);
        out.result = mvu::solve_program(prog, g->max_length(), opts, std::nullopt, &data);
    } else if (v == "conformal") {
        const auto prog = variants::conformal_program(data, *g, a.conformal_bound);
        const double tau = mvu::max_pair_length(a.conformal_bound ? prog.inequalities : prog.equalities);
        out.result = mvu::solve_program(prog, tau, opts, std::nullopt, &data);
    } else if (v == "landmark") {
        if (a.landmarks < 1) throw InvalidArgument("variant 'landmark' needs --landmarks m >= 1");
        const auto lm = variants::select_landmarks(data.size(), a.landmarks, a.seed);
        out.result = variants::solve_landmark(data, *g, lm, opts).result;
    } else {
        throw InvalidArgument("unknown variant '" + v + "'");
    }
    return out;
}

Json result_json(const mvu::MvuResult& r) {
    Json j;
    j["converged"] = r.converged;
    j["relaxed"] = r.relaxed;
    j["objective_trace"] = r.objective_trace;
    j["objective_value"] = r.objective_value;
    j["dimension"] = r.embedding.p;
    j["eigenvalues"] = eigen_json(r.embedding.eigenvalues);
    Json res;
    res["max_isometry"] = r.report.max_isometry_residual;
    res["max_isometry_relative"] = r.report.max_target > 0.0 ? r.report.max_isometry_residual / r.report.max_target : 0.0;
    res["max_inequality_violation"] = r.report.max_inequality_violation;
    res["centering"] = r.report.centering;
    res["min_eigenvalue_relative"] = r.report.min_eigenvalue;
    res["dropped_constraints"] = r.report.dropped_constraints;
    j["residuals"] = res;
    j["iterations"] = {{"newton", r.newton_iterations}, {"outer", r.outer_iterations}};
    j["variance_bound"] = r.variance_bound;
    j["tau"] = r.tau;
    j["gram_trace"] = r.gram_trace;
    j["objective_history"] = r.objective_history;
    return j;
}

int run_unfold(const UnfoldArgs& a, const CLI::App& cmd) {
    Json report = base_report("unfold", cmd);
    const fs::path report_path = a.report.empty() ? sibling(a.out, ".report.json") : fs::path(a.report);
    Dataset data = io::read_points_csv(a.in);

    mvu::MvuOptions opts;
    opts.solver.tolerance = a.tolerance;
    opts.solver.max_outer = a.max_outer;
    opts.solver.max_inner = a.max_inner;
    opts.band = a.band;
    opts.gap_ratio = a.gap_ratio;
    if (a.dim > 0) opts.dimension = a.dim;
    if (log_level() >= 2) opts.solver.trace = &std::cerr;

    Solved solved;
    try {
        solved = solve_variant(a, data, opts);
    } catch (const SolverError& e) {
        report["status"] = "solver_error";
        report["message"] = e.what();
        report["pruned_edges"] = Json::array();
        io::write_json(report_path, report);
        throw;
    }
    const auto& r = solved.result;
    io::write_matrix_csv(a.out, r.embedding.coordinates.transpose(), "y");
    if (!a.kernel_out.empty()) io::write_matrix_csv(a.kernel_out, r.kernel.values, "k");
    if (!a.model_out.empty()) {
        if (a.oos_scheme == "kernel-map") {
            io::write_json(a.model_out, io::to_json(oos::fit_kernel_map(data.points, r.embedding.coordinates, a.gamma)));
        } else if (a.oos_scheme == "eigen") {
            oos::EigenOptions eo;
            if (a.eta > 0.0) eo.eta = a.eta;
            io::write_json(a.model_out, io::to_json(oos::fit_oos_eigen(data.points, r.kernel.values, r.embedding.p, eo)));
        } else {
            throw InvalidArgument("oos scheme must be kernel-map or eigen");
        }
    }
    report["status"] = r.converged ? "ok" : "not_converged";
    report["n"] = data.size();
    report["variant"] = a.variant;
    const Json details = result_json(r);
    for (const auto& [key, value] : details.items()) report[key] = value;
    report["pruned_edges"] = solved.pruned;
    io::write_json(report_path, report);
    info("tr(K) = " + std::to_string(r.objective_trace) + ", dimension " + std::to_string(r.embedding.p) +
         (r.converged ? "" : " (not converged)"));
    return r.converged ? kOk : kSolver;
}

// ---------------------------------------------------------------- kernel / embed / oos

struct KernelArgs {
    std::string method;
    std::string in;
    std::string out;
    int k = 8;
    double sigma = 0.0;
    double lle_reg = 1e-3;
    double diffusion_alpha = 0.5;
    int diffusion_t = 1;
};

int run_kernel(const KernelArgs& a) {
    const Dataset data = io::read_points_csv(a.in);
    kernels::CatalogOptions o;
    o.k = a.k;
    if (a.sigma > 0.0) o.sigma = a.sigma;
    o.lle_reg = a.lle_reg;
    o.diffusion_alpha = a.diffusion_alpha;
    o.diffusion_t = a.diffusion_t;
    const auto k = kernels::build_catalog_kernel(kernels::parse_method(a.method), data, o);
    io::write_matrix_csv(a.out, k.values, "k");
    info("wrote " + std::string(kernels::method_name(kernels::parse_method(a.method))) + " kernel to " + a.out);
    return kOk;
}

struct EmbedArgs {
    std::string kernel;
    std::string out;
    int dim = 0;
    double gap_ratio = 10.0;
};

int run_embed(const EmbedArgs& a) {
    const Matrix k = io::read_matrix_csv(a.kernel);
    if (k.rows() != k.cols()) throw InvalidArgument("kernel CSV must be square");
    const int p = a.dim > 0 ? a.dim : spectral::intrinsic_dimension(eigen_descending(k).values, a.gap_ratio);
    const auto e = spectral::embed_from_kernel(k, p);
    io::write_matrix_csv(a.out, e.coordinates.transpose(), "y");
    if (e.clamped) info(std::to_string(e.clamped) + " requested dimensions had negative eigenvalues");
    return kOk;
}

struct OosArgs {
    std::string model;
    std::string in;
    std::string out;
};

int run_oos(const OosArgs& a) {
    const auto saved = io::model_from_json(io::read_json(a.model));
    const Dataset test = io::read_points_csv(a.in);
    Matrix coords;
    if (saved.scheme == "kernel-map") {
        if (test.dim() != saved.kernel_map.training.rows()) throw InvalidArgument("test points have the wrong dimension");
        const auto mapped = oos::embed_oos_kernel_map(saved.kernel_map, test.points);
        if (!mapped.zero_rows.empty()) {
            info(std::to_string(mapped.zero_rows.size()) + " test points are outside every training kernel's support");
        }
        coords = mapped.coordinates;
    } else {
        if (test.dim() != saved.eigen.training.rows()) throw InvalidArgument("test points have the wrong dimension");
        coords = oos::embed_oos_eigen_batch(saved.eigen, test.points);
    }
    io::write_matrix_csv(a.out, coords.transpose(), "y");
    return kOk;
}

/// Splices `key = value` lines from --config in front of the subcommand's own
/// flags. Every option keeps its last value, so command-line flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        std::size_t consumed = 0;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            consumed = 2;
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            consumed = 1;
        }
        if (consumed == 0) continue;
        const auto cfg = io::read_config(path);
        args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
        std::vector<std::string> injected;
        for (const auto& [key, value] : cfg) injected.push_back("--" + key + "=" + value);
        // Right after the subcommand name, which is the first non-flag argument.
        std::size_t at = 1;
        while (at < args.size() && args[at].rfind("-", 0) == 0) ++at;
        if (at < args.size()) ++at;
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
        break;
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral embedding and maximum variance unfolding toolkit"};
    app.set_version_flag("--version", UNFOLD_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_unused;
    auto add_config = [&](CLI::App* c) { c->add_option("--config", config_unused, "key = value file; flags override it"); };

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic manifold sample");
    g->add_option("--manifold", gen.manifold, "swiss-roll-3d | spiral-2d | trefoil-3d | s-curve-3d | hinge-chain")
        ->required()
        ->check(CLI::IsMember(datasets::manifold_names()));
    g->add_option("--n", gen.n, "point count")->capture_default_str()->check(CLI::Range(Index{2}, Index{10000000}));
    g->add_option("--noise", gen.noise, "Gaussian noise standard deviation")->capture_default_str()->check(CLI::NonNegativeNumber);
    g->add_option("--seed", gen.seed, "random seed")->capture_default_str();
    g->add_option("--classes", gen.classes, "label points by equal-width bins of the first parameter")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    g->add_option("--out", gen.out, "point CSV")->required();
    g->add_option("--params", gen.params, "parameter CSV (default: <out>.params.csv)");
    add_config(g);

    UnfoldArgs un;
    auto* u = app.add_subcommand("unfold", "Learn an unfolding kernel and embed the points");
    u->add_option("--in", un.in, "point CSV")->required();
    u->add_option("--out", un.out, "embedding CSV")->required();
    u->add_option("--report", un.report, "JSON report (default: <out>.report.json)");
    u->add_option("--variant", un.variant, "mvu | full | relaxed | smvu1 | smvu2 | colored | are | conformal | landmark")
        ->capture_default_str()
        ->check(CLI::IsMember({"mvu", "knn", "full", "relaxed", "smvu1", "smvu2", "colored", "are", "conformal", "landmark"}))
        ->transform([](const std::string& s) { return s == "knn" ? std::string("mvu") : s; });
    u->add_option("--k", un.k, "neighbors per point")->capture_default_str()->check(CLI::PositiveNumber);
    u->add_option("--dim", un.dim, "embedding dimension (0: read from the spectrum gap)")->capture_default_str()->check(CLI::NonNegativeNumber);
    u->add_option("--gap-ratio", un.gap_ratio, "eigenvalue ratio marking the intrinsic dimension")->capture_default_str();
    u->add_option("--alpha", un.alpha, "class separation factor (smvu1)")->capture_default_str();
    u->add_option("--actions", un.actions, "one action per line (are)");
    u->add_option("--label-kernel", un.label_kernel, "label kernel CSV (colored; default: delta kernel of the labels)");
    u->add_option("--landmarks", un.landmarks, "landmark count (landmark)")->capture_default_str()->check(CLI::NonNegativeNumber);
    u->add_option("--seed", un.seed, "landmark selection seed")->capture_default_str();
    u->add_flag("--prune", un.prune, "drop short-circuit edges before solving");
    u->add_option("--prune-mode", un.prune_mode, "scree | absolute | quantile")
        ->capture_default_str()
        ->check(CLI::IsMember({"scree", "absolute", "quantile"}));
    u->add_option("--prune-value", un.prune_value, "scree factor, absolute deviation or quantile")->capture_default_str();
    u->add_flag("--conformal-bound", un.conformal_bound, "treat conformal targets as upper bounds");
    u->add_flag("--allow-large", un.allow_large, "lift the full-pair size cap");
    u->add_option("--tolerance", un.tolerance, "barrier stop tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    u->add_option("--max-outer", un.max_outer, "outer iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    u->add_option("--max-inner", un.max_inner, "Newton steps per outer iteration")->capture_default_str()->check(CLI::PositiveNumber);
    u->add_option("--band", un.band, "relative band for unreachable equalities")->capture_default_str()->check(CLI::NonNegativeNumber);
    u->add_option("--kernel-out", un.kernel_out, "learned kernel CSV");
    u->add_option("--model-out", un.model_out, "out-of-sample model JSON");
    u->add_option("--oos-scheme", un.oos_scheme, "kernel-map | eigen")
        ->capture_default_str()
        ->check(CLI::IsMember({"kernel-map", "eigen"}));
    u->add_option("--gamma", un.gamma, "kernel-map bandwidth factor")->capture_default_str()->check(CLI::PositiveNumber);
    u->add_option("--eta", un.eta, "eigen-scheme regularizer (0: automatic)")->capture_default_str()->check(CLI::NonNegativeNumber);
    add_config(u);

    KernelArgs ke;
    auto* k = app.add_subcommand("kernel", "Write a spectral method's kernel matrix");
    std::vector<std::string> methods;
    for (auto m : kernels::all_methods()) methods.emplace_back(kernels::method_name(m));
    k->add_option("--method", ke.method, "kernel method")->required()->check(CLI::IsMember(methods));
    k->add_option("--in", ke.in, "point CSV")->required();
    k->add_option("--out", ke.out, "kernel CSV")->required();
    k->add_option("--k", ke.k, "neighbors per point")->capture_default_str()->check(CLI::PositiveNumber);
    k->add_option("--sigma", ke.sigma, "rbf bandwidth (0: median edge length)")->capture_default_str()->check(CLI::NonNegativeNumber);
    k->add_option("--lle-reg", ke.lle_reg, "LLE regularizer")->capture_default_str();
    k->add_option("--diffusion-alpha", ke.diffusion_alpha, "diffusion normalization")->capture_default_str();
    k->add_option("--diffusion-t", ke.diffusion_t, "diffusion time")->capture_default_str()->check(CLI::PositiveNumber);
    add_config(k);

    EmbedArgs em;
    auto* e = app.add_subcommand("embed", "Embed the points of a kernel CSV");
    e->add_option("--kernel", em.kernel, "kernel CSV")->required();
    e->add_option("--out", em.out, "embedding CSV")->required();
    e->add_option("--dim", em.dim, "embedding dimension (0: read from the spectrum gap)")->capture_default_str()->check(CLI::NonNegativeNumber);
    e->add_option("--gap-ratio", em.gap_ratio, "eigenvalue ratio marking the intrinsic dimension")->capture_default_str();
    add_config(e);

    OosArgs os;
    auto* o = app.add_subcommand("oos", "Embed new points with a saved model");
    o->add_option("--model", os.model, "model JSON from unfold --model-out")->required();
    o->add_option("--in", os.in, "point CSV")->required();
    o->add_option("--out", os.out, "embedding CSV")->required();
    add_config(o);

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = expand_config(std::move(args));
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    }
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (g->parsed()) return run_generate(gen);
        if (u->parsed()) return run_unfold(un, *u);
        if (k->parsed()) return run_kernel(ke);
        if (e->parsed()) return run_embed(em);
        if (o->parsed()) return run_oos(os);
    } catch (const InvalidArgument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const DisconnectedGraph& ex) {
        std::cerr << "error: " << describe_components(ex) << '\n';
        return kData;
    } catch (const DataError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kData;
    } catch (const SolverError& ex) {
        std::cerr << "error: solver failed: " << ex.what() << '\n';
        return kSolver;
    }
    return kUsage;
}
