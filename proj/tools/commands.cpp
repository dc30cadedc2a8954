#include "commands.hpp"

#include "bsvie/analysis.hpp"
#include "bsvie/errors.hpp"
#include "bsvie/presets.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace bsvie::lab {

namespace {

using nlohmann::json;

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

std::size_t as_size(const ExperimentConfig& cfg, const std::string& key, std::int64_t lo = 0) {
    const std::int64_t v = cfg.get_int(key);
    if (v < lo) {
        throw ValidationError("config key " + key + " must be at least " + std::to_string(lo));
    }
    return static_cast<std::size_t>(v);
}

WorldChoice world_choice(const ExperimentConfig& cfg) {
    const std::string k = cfg.get_string("world.kind");
    if (k == "preset") return WorldChoice::preset_default;
    if (k == "deterministic") return WorldChoice::deterministic;
    if (k == "tree") return WorldChoice::tree;
    if (k == "ensemble") return WorldChoice::ensemble;
    throw ValidationError("config key world.kind: expected preset, deterministic, tree or ensemble, got '" + k + "'");
}

Problem load_problem(const ExperimentConfig& cfg) {
    const std::string name = cfg.get_string("data.preset");
    try {
        preset_info(name);
    } catch (const ValidationError&) {
        throw ValidationError("config key data.preset: unknown preset '" + name + "'");
    }
    PresetParams p;
    p.steps = as_size(cfg, "world.steps");
    p.horizon = cfg.get_real("world.horizon");
    if (!(p.horizon > 0.0)) {
        throw ValidationError("config key world.horizon must be positive");
    }
    p.world = world_choice(cfg);
    p.n_paths = as_size(cfg, "world.paths", 1);
    p.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed"));
    p.with_jumps = cfg.get_bool("world.jumps");
    p.max_tree_steps = as_size(cfg, "world.max_tree_steps", 1);
    try {
        return build_preset(name, p);
    } catch (const DomainError& e) {
        throw ValidationError("config keys world.*: " + std::string(e.what()));
    }
}

/// Mean and standard deviation of each Y(t_i) as table rows.
void add_profile(Table& table, const std::string& stat, const World& w, const std::vector<Values>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i].empty()) {
            continue;
        }
        const double m = w.expect(y[i], i);
        double v = 0.0;
        const Values& pr = w.prob(i);
        for (std::size_t a = 0; a < y[i].size(); ++a) {
            v += pr[a] * (y[i][a] - m) * (y[i][a] - m);
        }
        const double t = w.clock().times[i];
        table.add(stat + "_mean", t, std::nullopt, m);
        table.add(stat + "_sd", t, std::nullopt, std::sqrt(std::max(v, 0.0)));
    }
}

void describe_problem(json& r, const Problem& pr) {
    r["preset"] = pr.preset;
    r["world"] = pr.world->describe();
    r["steps"] = pr.world->steps();
    r["horizon"] = pr.world->clock().horizon();
    r["driver"] = pr.f.name;
}

double y0_of(const World& w, const std::vector<Values>& y) {
    return w.expect(y[0], 0);
}

void add_expected(json& r, const Problem& pr, double y0) {
    r["Y0"] = y0;
    if (pr.expected_y0) {
        r["expected_Y0"] = *pr.expected_y0;
        r["abs_error"] = std::abs(y0 - *pr.expected_y0);
    }
}

/// Type-I solve: Picard when the driver reads y, one parametrized BSDE per t otherwise.
struct Type1Run {
    BSVIESolution solution;
    std::vector<double> gaps;
    bool converged = true;
    int iterations = 0;
};

Type1Run solve_type1(const Problem& pr, const ExperimentConfig& cfg, const Projector& proj) {
    Type1Run run;
    if (pr.f.uses_y) {
        PicardOptions opts;
        opts.tol = cfg.get_real("solver.tol");
        opts.max_iter = static_cast<int>(as_size(cfg, "solver.max_iter", 1));
        PicardResult res = picard_type1(pr.phi, pr.f, *pr.world, proj, opts);
        run.solution = std::move(res.solution);
        run.gaps = std::move(res.gaps);
        run.converged = res.converged;
        run.iterations = res.iterations;
    } else {
        run.solution = solve_type1_noY(pr.phi, pr.f, *pr.world, proj);
    }
    return run;
}

RunOutput cmd_constants(const ExperimentConfig& cfg) {
    RunOutput out;
    const double beta = cfg.get_real("constants.beta");
    if (!(beta > 0.0)) {
        throw ValidationError("config key constants.beta must be positive");
    }
    const JumpBound f(cfg.get_real("constants.frakf"));
    const WellPosednessConstants c1 = check_type1(beta, f);
    const WellPosednessConstants c2 = check_type2(beta, f);
    json& r = out.results;
    r["beta"] = beta;
    r["frakf"] = f.value();
    r["delta_star"] = c1.delta_star;
    r["kappa"] = c1.kappa;
    r["M"] = c1.big_m;
    r["sigma"] = number(c1.sigma);
    r["sigma_tilde"] = number(c1.sigma_tilde);
    r["type2_value"] = number(c2.type2_value);
    r["type1_ok"] = c1.type1_ok;
    r["type1_noY_ok"] = c1.type1_noY_ok;
    r["type2_ok"] = c2.type2_ok;
    Table& table = out.tables["constants"];
    for (int k = -10; k <= 10; ++k) {
        const double b = beta * std::pow(10.0, k / 10.0);
        try {
            const WellPosednessConstants c = check_type2(b, f);
            table.add("delta_star", b, std::nullopt, c.delta_star);
            table.add("kappa", b, std::nullopt, c.kappa);
            table.add("M", b, std::nullopt, c.big_m);
            if (std::isfinite(c.sigma)) {
                table.add("sigma", b, std::nullopt, c.sigma);
                table.add("type2_value", b, std::nullopt, c.type2_value);
            }
        } catch (const DomainError&) {
        }
    }
    return out;
}

RunOutput cmd_min_beta(const ExperimentConfig& cfg) {
    RunOutput out;
    Condition cond;
    try {
        cond = condition_from_string(cfg.get_string("constants.condition"));
    } catch (const std::exception&) {
        throw ValidationError("config key constants.condition: expected type1, type1_noY or type2, got '" +
                              cfg.get_string("constants.condition") + "'");
    }
    const JumpBound f(cfg.get_real("constants.frakf"));
    json& r = out.results;
    r["condition"] = std::string(to_string(cond));
    r["frakf"] = f.value();
    r["asymptotically_admissible"] = asymptotically_admissible(cond, f);
    if (!asymptotically_admissible(cond, f)) {
        r["beta"] = nullptr;
        return out;
    }
    const MinBetaResult m = min_beta(cond, f);
    r["beta"] = m.beta;
    r["monotone"] = m.monotone;
    if (!m.monotone) {
        r["first_failure"] = m.first_failure;
    }
    return out;
}

RunOutput cmd_simulate(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    json& r = out.results;
    r["world"] = w.describe();
    r["steps"] = w.steps();
    r["atoms"] = w.atoms(w.steps());
    r["marks"] = w.marks();
    Table& table = out.tables["paths"];
    for (std::size_t i = 0; i <= w.steps(); ++i) {
        const double t = w.clock().times[i];
        auto moments = [&](const Values& v, const std::string& name) {
            const double m = w.expect(v, i);
            double sq = 0.0;
            for (std::size_t a = 0; a < v.size(); ++a) {
                sq += w.prob(i)[a] * (v[a] - m) * (v[a] - m);
            }
            table.add(name + "_mean", t, std::nullopt, m);
            table.add(name + "_var", t, std::nullopt, sq);
        };
        if (w.has_brownian()) {
            moments(w.W(i), "W");
        }
        for (std::size_t k = 0; k < w.marks(); ++k) {
            moments(w.N(i, k), "N" + std::to_string(k));
        }
        if (w.extra_noise()) {
            moments(w.E(i), "E");
        }
    }
    const std::string path = cfg.get_string("simulate.export");
    if (!path.empty()) {
        if (w.is_tree()) {
            export_ensemble(World::from_tree(w), path);
        } else {
            export_ensemble(w, path);
        }
        r["exported"] = path;
    }
    return out;
}

RunOutput cmd_solve_bsde(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Values& xi = pr.phi.phi[0];
    const BSDESolution sol = solve_bsde(xi, pr.f, w, *proj);
    json& r = out.results;
    describe_problem(r, pr);
    add_expected(r, pr, w.expect(sol.Y[0], 0));
    r["residual"] = bsde_residual(sol, 0, pr.f, w, true);
    r["warnings"] = sol.warnings;
    add_profile(out.tables["bsde"], "Y", w, sol.Y);
    std::vector<Values> z(sol.Z.begin(), sol.Z.end());
    z.push_back({});
    add_profile(out.tables["bsde"], "Z", w, z);
    return out;
}

RunOutput cmd_solve_type1(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type1Run run = solve_type1(pr, cfg, *proj);
    json& r = out.results;
    describe_problem(r, pr);
    add_expected(r, pr, y0_of(w, run.solution.Y));
    r["method"] = pr.f.uses_y ? "picard" : "parametrized";
    r["converged"] = run.converged;
    r["iterations"] = run.iterations;
    r["equation_residual"] = equation_residual(run.solution, pr.phi, pr.f, w);
    r["gaps"] = run.gaps;
    add_profile(out.tables["solution"], "Y", w, run.solution.Y);
    for (std::size_t k = 0; k < run.gaps.size(); ++k) {
        out.tables["picard"].add("gap", static_cast<double>(k + 1), std::nullopt, run.gaps[k]);
    }
    out.converged = run.converged;
    return out;
}

RunOutput cmd_solve_type2(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    Type2Options opts;
    opts.tol = cfg.get_real("solver.tol");
    opts.max_outer = static_cast<int>(as_size(cfg, "solver.max_iter", 1));
    opts.plan_constant = cfg.get_real("solver.plan_constant");
    if (!(opts.plan_constant > 0.0)) {
        throw ValidationError("config key solver.plan_constant must be positive");
    }
    const Type2Result res = solve_type2(pr.phi, pr.f, w, *proj, opts);
    const BSVIESolution& sol = res.solution;
    double max_m = 0.0;
    for (std::size_t i = 0; i < sol.cells.size(); ++i) {
        for (std::size_t j = 0; j < sol.cells[i].size(); ++j) {
            for (double v : sol.cells[i][j].m) {
                max_m = std::max(max_m, std::abs(v));
            }
        }
    }
    json& r = out.results;
    describe_problem(r, pr);
    add_expected(r, pr, y0_of(w, sol.Y));
    r["converged"] = res.converged;
    r["plan"] = res.plan;
    r["bisections"] = res.bisections;
    r["outer_iterations"] = res.outer_iterations;
    r["equation_residual"] = equation_residual(sol, pr.phi, pr.f, w);
    r["msolution_residual"] = msolution_residual(sol, w, *proj);
    r["max_abs_M"] = max_m;
    add_profile(out.tables["solution"], "Y", w, sol.Y);
    for (std::size_t b = 0; b < res.gaps.size(); ++b) {
        for (std::size_t k = 0; k < res.gaps[b].size(); ++k) {
            out.tables["outer"].add("gap_block_" + std::to_string(b), static_cast<double>(k + 1), std::nullopt,
                                    res.gaps[b][k]);
        }
    }
    out.converged = res.converged;
    return out;
}

RunOutput cmd_sfie(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    if (pr.f.uses_y) {
        throw ValidationError("config key data.preset: sfie needs a driver free of y, '" + pr.preset +
                              "' reads y");
    }
    const auto proj = make_projector(w);
    const std::size_t n = w.steps();
    const std::size_t rr = as_size(cfg, "sfie.r");
    const std::int64_t s_raw = cfg.get_int("sfie.s");
    const std::size_t ss = s_raw < 0 ? n / 2 : static_cast<std::size_t>(s_raw);
    if (ss > n || rr > ss) {
        throw ValidationError("config keys sfie.r and sfie.s must satisfy 0 <= r <= s <= steps");
    }
    const SFIEResult res = solve_sfie(pr.phi, pr.f, rr, ss, w, *proj);
    json& r = out.results;
    describe_problem(r, pr);
    r["R"] = res.R;
    r["S"] = res.S;
    json means = json::array();
    for (std::size_t k = 0; k < res.psi.size(); ++k) {
        const double m = w.expect(res.psi[k], ss);
        means.push_back(m);
        out.tables["sfie"].add("psi_mean", w.clock().times[rr + k], w.clock().times[ss], m);
    }
    r["psi_mean"] = means;
    return out;
}

RunOutput cmd_compare(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    if (!pr.sandwich) {
        throw ValidationError("config key data.preset: '" + pr.preset + "' has no sandwich data");
    }
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const SandwichData& d = *pr.sandwich;
    const int iters = static_cast<int>(as_size(cfg, "compare.iterations", 1));
    const double tol = cfg.get_real("solver.tol");
    const MonotoneReport rep = monotone_picard(d.phi1, d.phi2, d.phi_bar, d.f1, d.f2, d.f_bar, w, *proj, iters, tol);
    const ComparisonStats lower = compare_solutions(w, rep.y1.Y, rep.y_bar.Y, tol);
    const ComparisonStats upper = compare_solutions(w, rep.y_bar.Y, rep.y2.Y, tol);
    json& r = out.results;
    describe_problem(r, pr);
    r["checked"] = lower.checked;
    r["violations_lower"] = lower.violations;
    r["violations_upper"] = upper.violations;
    r["max_violation"] = std::max(lower.max_violation, upper.max_violation);
    r["monotonicity_breaks"] = rep.increasing_steps + rep.decreasing_steps;
    r["limit_gap"] = rep.limit_gap;
    r["sandwich_checked"] = rep.sandwich_checked;
    for (std::size_t k = 0; k < rep.from_above.size(); ++k) {
        out.tables["monotone"].add("gap_from_above", static_cast<double>(k), std::nullopt,
                                   solution_gap(w, rep.from_above[k], rep.y_bar.Y));
    }
    for (std::size_t k = 0; k < rep.from_below.size(); ++k) {
        out.tables["monotone"].add("gap_from_below", static_cast<double>(k), std::nullopt,
                                   solution_gap(w, rep.from_below[k], rep.y_bar.Y));
    }
    add_profile(out.tables["solution"], "Y1", w, rep.y1.Y);
    add_profile(out.tables["solution"], "Ybar", w, rep.y_bar.Y);
    add_profile(out.tables["solution"], "Y2", w, rep.y2.Y);
    return out;
}

RunOutput cmd_partition(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    if (!pr.linear) {
        throw ValidationError("config key data.preset: '" + pr.preset + "' has no linear comparison data");
    }
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    std::vector<std::size_t> blocks;
    for (std::int64_t k : cfg.get_ints("compare.blocks")) {
        if (k < 1 || static_cast<std::size_t>(k) > w.steps()) {
            throw ValidationError("config key compare.blocks: block counts must lie in [1, steps]");
        }
        blocks.push_back(static_cast<std::size_t>(k));
    }
    const PartitionComparisonReport rep = partition_comparison(*pr.linear, w, *proj, blocks);
    json& r = out.results;
    describe_problem(r, pr);
    r["blocks"] = rep.blocks;
    r["errors"] = rep.errors;
    r["min_value"] = rep.min_value;
    r["negative"] = rep.negative;
    r["direct_checked"] = rep.direct.checked;
    r["direct_violations"] = rep.direct.violations;
    for (std::size_t k = 0; k < rep.blocks.size(); ++k) {
        const double K = static_cast<double>(rep.blocks[k]);
        out.tables["partition"].add("error", K, std::nullopt, rep.errors[k]);
        out.tables["partition"].add("min_value", K, std::nullopt, rep.min_value[k]);
    }
    return out;
}

RunOutput cmd_duality(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    if (!pr.coeff || pr.psi.empty()) {
        throw ValidationError("config key data.preset: '" + pr.preset + "' has no forward equation data");
    }
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    Type2Options opts;
    opts.plan_constant = cfg.get_real("solver.plan_constant");
    const DualityReport rep = duality_gap(pr.psi, pr.phi, *pr.coeff, w, *proj, opts);
    json& r = out.results;
    describe_problem(r, pr);
    r["backward_pairing"] = rep.backward_pairing;
    r["forward_pairing"] = rep.forward_pairing;
    r["gap"] = rep.gap;
    r["standard_error"] = rep.standard_error;
    r["adjoint_converged"] = rep.adjoint.converged;
    add_profile(out.tables["adjoint"], "Y", w, rep.adjoint.solution.Y);
    out.converged = rep.adjoint.converged;
    return out;
}

RunOutput cmd_regularity(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type1Run run = solve_type1(pr, cfg, *proj);
    const double p = cfg.get_real("analysis.p");
    if (!(p >= 1.0)) {
        throw ValidationError("config key analysis.p must be at least 1");
    }
    HolderFit fit;
    try {
        fit = regularity_estimate(run.solution.Y, w, p);
    } catch (const DomainError& e) {
        throw ValidationError("config key world.steps: " + std::string(e.what()));
    }
    json& r = out.results;
    describe_problem(r, pr);
    r["p"] = p;
    r["exponent"] = fit.exponent;
    r["standard_error"] = fit.standard_error;
    r["flat"] = fit.flat;
    if (pr.phi.holder_alpha) {
        r["alpha"] = *pr.phi.holder_alpha;
        r["target_exponent"] = 0.8 * *pr.phi.holder_alpha * p;
    }
    for (std::size_t k = 0; k < fit.lags.size(); ++k) {
        out.tables["regularity"].add("moment", fit.lags[k], std::nullopt, fit.moments[k]);
    }
    if (w.is_tree()) {
        const CadlagReport c = cadlag_report(run.solution, pr.phi, w);
        r["cadlag"] = {{"checked", c.checked}, {"jumps", c.jumps}, {"unexplained", c.unexplained}};
    }
    out.converged = run.converged;
    return out;
}

RunOutput cmd_norms(const ExperimentConfig& cfg) {
    RunOutput out;
    const Problem pr = load_problem(cfg);
    const World& w = *pr.world;
    const auto proj = make_projector(w);
    const Type1Run run = solve_type1(pr, cfg, *proj);
    const double p = cfg.get_real("analysis.p");
    if (!(p >= 1.0)) {
        throw ValidationError("config key analysis.p must be at least 1");
    }
    const double beta = cfg.get_real("analysis.beta");
    if (beta < 0.0) {
        throw ValidationError("config key analysis.beta must be nonnegative");
    }
    const std::optional<double> b = beta > 0.0 ? std::optional<double>(beta) : std::nullopt;
    const NormReport n = norm_Sp(run.solution, w, p, b);
    std::optional<WellPosednessConstants> consts;
    if (b && p == 2.0) {
        consts = check_type1(beta, w.clock().frak_f);
    }
    const AprioriCheck a = apriori_check(run.solution, pr.phi, pr.f, w, consts, p);
    json& r = out.results;
    describe_problem(r, pr);
    r["p"] = p;
    r["beta"] = b ? json(beta) : json(nullptr);
    r["norm"] = {{"y", n.y_part},        {"z", n.z_part},   {"u_pi", n.u_part_pi}, {"u_mu", n.u_part_mu},
                 {"m", n.m_part},        {"total", n.total()}};
    r["apriori"] = {{"lhs", a.lhs},          {"rhs_phi", a.rhs_phi},      {"rhs_f", a.rhs_f},
                    {"ratio", number(a.ratio)}, {"degenerate", a.degenerate}, {"violated", a.violated}};
    if (a.constant) {
        r["apriori"]["constant"] = *a.constant;
    }
    Table& table = out.tables["norms"];
    table.add("y", std::nullopt, std::nullopt, n.y_part);
    table.add("z", std::nullopt, std::nullopt, n.z_part);
    table.add("u_mu", std::nullopt, std::nullopt, n.u_part_mu);
    table.add("m", std::nullopt, std::nullopt, n.m_part);
    out.converged = run.converged;
    return out;
}

RunOutput cmd_list_presets(const ExperimentConfig&) {
    RunOutput out;
    json list = json::array();
    std::ostringstream text;
    for (const PresetInfo& p : preset_catalog()) {
        const char* world = p.default_world == WorldChoice::deterministic ? "deterministic"
                            : p.default_world == WorldChoice::ensemble    ? "ensemble"
                                                                          : "tree";
        list.push_back({{"name", p.name},
                        {"solver", std::string(to_string(p.solver))},
                        {"world", world},
                        {"steps", p.default_steps},
                        {"anchor", p.anchor},
                        {"oracle", p.oracle}});
        text << p.name << "\n  solver: " << to_string(p.solver) << ", " << world << " world, " << p.default_steps
             << " steps\n  exercises: " << p.anchor << "\n  oracle: " << p.oracle << "\n";
    }
    out.results["presets"] = list;
    out.text = text.str();
    return out;
}

}  // namespace

RunOutput run_command(const ExperimentConfig& cfg) {
    static const std::map<std::string, std::function<RunOutput(const ExperimentConfig&)>> table = {
        {"constants", cmd_constants},       {"min-beta", cmd_min_beta},       {"simulate", cmd_simulate},
        {"solve-bsde", cmd_solve_bsde},     {"solve-type1", cmd_solve_type1}, {"solve-type2", cmd_solve_type2},
        {"sfie", cmd_sfie},                 {"compare", cmd_compare},         {"partition-compare", cmd_partition},
        {"duality", cmd_duality},           {"regularity", cmd_regularity},   {"norms", cmd_norms},
        {"list-presets", cmd_list_presets},
    };
    RunOutput out = table.at(cfg.command())(cfg);
    out.results["command"] = cfg.command();
    out.results["run_id"] = cfg.get_string("run.id");
    return out;
}

}  // namespace bsvie::lab
