// command-line front end: consumption values, strategies, surfaces, the
// mean-reverting-rate HJB solver, and the Monte Carlo cross-check suite

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <odc/odc.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- manifest

class ManifestWriter {
  public:
    ManifestWriter(fs::path dir, std::string command, json inputs,
                   std::uint64_t seed)
        : dir_(std::move(dir)), start_(std::chrono::steady_clock::now()) {
        m_["command"] = std::move(command);
        m_["version"] = odc::version_string;
        m_["seed"] = seed;
        m_["inputs"] = std::move(inputs);
        m_["outputs"] = json::array();
        m_["status"] = "ok";
        m_["error"] = nullptr;
    }

    void add_output(const std::string& name) { m_["outputs"].push_back(name); }

    void fail(const std::string& what) {
        m_["status"] = "error";
        m_["error"] = what;
    }

    void write() {
        const auto now = std::chrono::steady_clock::now();
        const double ms =
            std::chrono::duration<double, std::milli>(now - start_).count();
        m_["timings_ms"] = {{"total", ms}};
        odc::write_text_file(dir_ / "manifest.json", m_.dump(2) + "\n");
    }

  private:
    fs::path dir_;
    std::chrono::steady_clock::time_point start_;
    json m_;
};

// runs a command body; the manifest is written even when the body throws
int run_guarded(const std::optional<fs::path>& out_dir,
                const std::string& command, const json& inputs,
                std::uint64_t seed,
                const std::function<void(ManifestWriter*)>& body) {
    std::optional<ManifestWriter> mw;
    if (out_dir) mw.emplace(*out_dir, command, inputs, seed);
    try {
        body(mw ? &*mw : nullptr);
    } catch (const std::exception& e) {
        if (mw) {
            mw->fail(e.what());
            mw->write();
        }
        throw;
    }
    if (mw) mw->write();
    return 0;
}

// ---------------------------------------------------------------- options

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::optional<std::int64_t> seed;

    void attach(CLI::App* cmd, bool with_out_dir = true) {
        cmd->add_option("--config", config_path, "JSON configuration file");
        if (with_out_dir)
            cmd->add_option("--out-dir", out_dir, "directory for output files");
        cmd->add_option("--seed", seed, "random seed (overrides config and env)")
            ->check(CLI::NonNegativeNumber);
    }

    odc::Config load() const {
        return config_path ? odc::Config::from_file(*config_path)
                           : odc::Config();
    }

    std::uint64_t resolve(const odc::Config& cfg) const {
        std::optional<std::uint64_t> s;
        if (seed) s = static_cast<std::uint64_t>(*seed);
        return odc::resolve_seed(s, cfg);
    }
};

struct RateFlags {
    std::optional<double> a, sigma, b, r0, sigma_tilde, b_tilde;

    void attach(CLI::App* cmd) {
        cmd->add_option("--a", a, "mean-reversion speed a");
        cmd->add_option("--sigma", sigma, "rate volatility, reduced form");
        cmd->add_option("--b", b, "long-run level, reduced form");
        cmd->add_option("--r0", r0, "current short rate");
        cmd->add_option("--sigma-tilde", sigma_tilde,
                        "rate volatility, process form");
        cmd->add_option("--b-tilde", b_tilde, "long-run mean, process form");
    }
};

std::optional<double> pick(const std::optional<double>& flag,
                           const odc::Config& cfg, const std::string& key) {
    if (flag) return flag;
    if (cfg.has(key)) return cfg.number(key);
    return std::nullopt;
}

odc::DerivedParams load_rate(const odc::Config& cfg, const RateFlags& fl) {
    const auto a = pick(fl.a, cfg, "rate.a");
    const auto sigma = pick(fl.sigma, cfg, "rate.sigma");
    const auto b = pick(fl.b, cfg, "rate.b");
    const auto r0 = pick(fl.r0, cfg, "rate.r0");
    const auto st = pick(fl.sigma_tilde, cfg, "rate.sigma_tilde");
    const auto bt = pick(fl.b_tilde, cfg, "rate.b_tilde");
    if (!a) throw odc::parameter_error("config: missing required key 'rate.a'");
    if (!r0) throw odc::parameter_error("config: missing required key 'rate.r0'");
    if ((st || bt) && (sigma || b))
        throw odc::parameter_error(
            "config: give either rate.sigma/rate.b or "
            "rate.sigma_tilde/rate.b_tilde, not both");
    if (st || bt) {
        if (!st)
            throw odc::parameter_error(
                "config: missing required key 'rate.sigma_tilde'");
        if (!bt)
            throw odc::parameter_error(
                "config: missing required key 'rate.b_tilde'");
        return odc::reparameterize(odc::VasicekParams{*a, *st, *bt, *r0});
    }
    if (!sigma)
        throw odc::parameter_error("config: missing required key 'rate.sigma'");
    if (!b) throw odc::parameter_error("config: missing required key 'rate.b'");
    odc::DerivedParams d{*a, *sigma, *b, *r0};
    odc::validate(d);
    return d;
}

struct ZbFlags {
    RateFlags rate;
    std::optional<double> mu, xi, T;
    bool unrestricted = false;

    void attach(CLI::App* cmd) {
        rate.attach(cmd);
        cmd->add_option("--mu", mu, "income rate");
        cmd->add_option("--xi", xi, "consumption cap");
        cmd->add_option("--T", T, "horizon");
        cmd->add_flag("--unrestricted", unrestricted,
                      "no cap: lump payouts allowed");
    }

    odc::ProblemZB load(const odc::Config& cfg) const {
        const odc::DerivedParams d = load_rate(cfg, rate);
        const auto vmu = pick(mu, cfg, "zb.mu");
        const auto vT = pick(T, cfg, "zb.horizon");
        auto vxi = pick(xi, cfg, "zb.xi");
        const bool unres =
            unrestricted || cfg.boolean_or("zb.unrestricted", false);
        if (!vmu) throw odc::parameter_error("config: missing required key 'zb.mu'");
        if (!vT)
            throw odc::parameter_error("config: missing required key 'zb.horizon'");
        if (unres && vxi)
            throw odc::parameter_error(
                "config: 'zb.xi' conflicts with the unrestricted switch");
        if (!unres && !vxi)
            throw odc::parameter_error("config: missing required key 'zb.xi'");
        return odc::make_problem_zb(d, *vmu, unres ? kInf : *vxi, *vT);
    }
};

struct Colors {
    std::string wait, pay, income;
};

Colors load_colors(const odc::Config& cfg) {
    return {cfg.text_or("output.color_wait", "#1a1a1a"),
            cfg.text_or("output.color_pay", "#b8b8b8"),
            cfg.text_or("output.color_income", "#7a9cc6")};
}

json rate_json(const odc::DerivedParams& d) {
    json j;
    odc::to_json(j, d);
    return j;
}

// -------------------------------------------------------- surface helpers

// first action of the plan built at (t, x): 0 wait, 1 pay at the cap or as
// a lump, 2 pay the income rate
int initial_action(const odc::ProblemZB& p, const odc::PiecewiseStrategy& st,
                   double t) {
    for (const auto& l : st.lumps)
        if (l.time <= t + 1e-12 && l.amount > 0.0 && t < p.T - 1e-12) return 1;
    const double rate = st.rate_at(t);
    if (rate <= 0.0) return 0;
    if (p.unrestricted()) return 2;  // only the income rate remains
    if (p.xi <= p.mu) return 1;      // the only positive rate is the cap
    return rate >= 0.5 * (p.mu + p.xi) ? 1 : 2;
}

struct ZbSurface {
    std::string csv, svg;
};

ZbSurface build_zb_surface(const odc::ProblemZB& p, int nt, int nx,
                           double x_max, const Colors& colors) {
    if (nt < 2 || nx < 2)
        throw odc::parameter_error("surface: need at least 2 points per axis");
    if (!(x_max > 0.0))
        throw odc::parameter_error("surface: x_max must be positive");
    std::vector<double> ts(nt), xs(nx);
    for (int i = 0; i < nt; ++i)
        ts[i] = p.T * static_cast<double>(i) / (nt - 1);
    for (int j = 0; j < nx; ++j)
        xs[j] = x_max * static_cast<double>(j) / (nx - 1);

    std::vector<int> cat(static_cast<std::size_t>(nt) * nx, 0);
    odc::CsvBuilder csv({"t", "x", "value", "initial_rate"});
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nx; ++j) {
            const double v = odc::value_zb(p, ts[i], xs[j]);
            const odc::PiecewiseStrategy st = odc::strategy_zb(p, ts[i], xs[j]);
            const int action = initial_action(p, st, ts[i]);
            cat[static_cast<std::size_t>(i) * nx + j] = action;
            double rate = st.rate_at(ts[i]);
            if (action == 1 && p.unrestricted()) rate = kInf;
            csv.row().cell(ts[i]).cell(xs[j]).cell(v).cell(
                std::isfinite(rate) ? odc::format_full(rate) : "lump");
        }
    }

    odc::SvgHeatmapSpec spec;
    spec.hx = ts;
    spec.vy = xs;
    spec.category = [&cat, nx](std::size_t ih, std::size_t iv) {
        return static_cast<std::size_t>(cat[ih * nx + iv]);
    };
    spec.colors = {colors.wait, colors.pay, colors.income};
    spec.legend = {{colors.wait, "wait"},
                   {colors.pay, "pay at the cap"},
                   {colors.income, "pay the income rate"}};
    spec.title = "consumption regions";
    spec.h_label = "time t";
    spec.v_label = "surplus x";
    return {csv.str(), odc::render_heatmap(spec)};
}

// ------------------------------------------------------------- commands

int cmd_classify(const CommonFlags& common, const RateFlags& rate,
                 const std::optional<double>& T_flag) {
    const odc::Config cfg = common.load();
    const odc::DerivedParams d = load_rate(cfg, rate);
    const auto T = pick(T_flag, cfg, "zb.horizon");
    if (!T)
        throw odc::parameter_error("config: missing required key 'zb.horizon'");
    const odc::ScenarioReport rep = odc::classify(d, d.r0, *T);
    json j;
    odc::to_json(j, rep);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_example(const CommonFlags& common) {
    const odc::Config cfg = common.load();
    const fs::path dir = common.out_dir.value_or("example_out");
    const Colors colors = load_colors(cfg);

    const odc::DerivedParams d{1.0, 1.0, -0.1, -0.2};
    const odc::ProblemZB p = odc::make_problem_zb(d, 2.0, 4.0, 4.0);
    const odc::ScenarioReport& rep = p.report;

    json inputs = {{"rate", rate_json(d)},
                   {"zb", {{"mu", p.mu}, {"xi", p.xi}, {"horizon", p.T}}}};
    return run_guarded(dir, "example", inputs, 0, [&](ManifestWriter* mw) {
        json jrep;
        odc::to_json(jrep, rep);
        odc::write_text_file(dir / "scenario.json", jrep.dump(2) + "\n");
        mw->add_output("scenario.json");

        // reference values for the showcase parameter set
        const double exp_w1 = 0.2611, exp_w2 = 2.0414;
        const double exp_t1 = 0.1134, exp_t2 = 0.4388;
        const auto entry = [](double computed, double expected) {
            const double err = std::abs(computed - expected);
            return json{{"computed", computed},
                        {"expected", expected},
                        {"abs_error", err},
                        {"pass", err < 5e-4}};
        };
        json check = {
            {"w1", entry(rep.w1.value(), exp_w1)},
            {"w2", entry(rep.w2.value(), exp_w2)},
            {"t1", entry(rep.t1.value(), exp_t1)},
            {"t2", entry(rep.t2.value(), exp_t2)},
            {"peak_above_end_above_start",
             rep.f_w1.value() > rep.fT && rep.fT > rep.f0}};
        odc::write_text_file(dir / "check.json", check.dump(2) + "\n");
        mw->add_output("check.json");

        const ZbSurface surf = build_zb_surface(p, 201, 151, 3.0, colors);
        odc::write_text_file(dir / "surface.csv", surf.csv);
        mw->add_output("surface.csv");
        odc::write_text_file(dir / "regions.svg", surf.svg);
        mw->add_output("regions.svg");

        std::cout << "scenario " << odc::to_string(rep.scenario) << "\n";
        for (const auto& [name, val] :
             std::vector<std::pair<std::string, double>>{
                 {"w1", rep.w1.value()},
                 {"w2", rep.w2.value()},
                 {"t1", rep.t1.value()},
                 {"t2", rep.t2.value()}}) {
            std::cout << name << " = " << odc::format_compact(val, 9) << "\n";
        }
        std::cout << "outputs in " << dir.string() << "\n";
    });
}

int cmd_zb_value(const CommonFlags& common, const ZbFlags& zb, double t,
                 double x, bool strategy_mode) {
    const odc::Config cfg = common.load();
    const odc::ProblemZB p = zb.load(cfg);
    const double value = odc::value_zb(p, t, x);
    json out = {{"t", t},
                {"x", x},
                {"value", value},
                {"case", p.unrestricted()
                             ? "unrestricted"
                             : (p.xi <= p.mu ? "cap<=income" : "cap>income")},
                {"scenario", odc::to_string(p.report.scenario)}};
    if (strategy_mode) {
        const odc::PiecewiseStrategy st = odc::strategy_zb(p, t, x);
        json jst;
        odc::to_json(jst, st);
        out["strategy"] = jst;
        out["strategy_return"] = odc::strategy_return(p, st, x);
    }
    json inputs = {{"rate", rate_json(p.d)},
                   {"zb",
                    {{"mu", p.mu},
                     {"xi", p.unrestricted() ? json("unrestricted") : json(p.xi)},
                     {"horizon", p.T}}},
                   {"t", t},
                   {"x", x}};
    std::optional<fs::path> dir;
    if (common.out_dir) dir = fs::path(*common.out_dir);
    const std::string cmd_name = strategy_mode ? "zb-strategy" : "zb-value";
    return run_guarded(dir, cmd_name, inputs, 0, [&](ManifestWriter* mw) {
        if (mw) {
            const std::string fname =
                strategy_mode ? "strategy.json" : "value.json";
            odc::write_text_file(*dir / fname, out.dump(2) + "\n");
            mw->add_output(fname);
        }
        std::cout << out.dump(2) << "\n";
    });
}

int cmd_zb_surface(const CommonFlags& common, const ZbFlags& zb, int nt,
                   int nx, double x_max) {
    const odc::Config cfg = common.load();
    const odc::ProblemZB p = zb.load(cfg);
    const Colors colors = load_colors(cfg);
    const fs::path dir = common.out_dir.value_or("zb_out");
    json inputs = {{"rate", rate_json(p.d)},
                   {"zb",
                    {{"mu", p.mu},
                     {"xi", p.unrestricted() ? json("unrestricted") : json(p.xi)},
                     {"horizon", p.T}}},
                   {"grid", {{"n_t", nt}, {"n_x", nx}, {"x_max", x_max}}}};
    return run_guarded(dir, "zb-surface", inputs, 0, [&](ManifestWriter* mw) {
        const ZbSurface surf = build_zb_surface(p, nt, nx, x_max, colors);
        odc::write_text_file(dir / "surface.csv", surf.csv);
        mw->add_output("surface.csv");
        odc::write_text_file(dir / "regions.svg", surf.svg);
        mw->add_output("regions.svg");
        std::cout << "scenario " << odc::to_string(p.report.scenario)
                  << ", surface " << nt << "x" << nx << " written to "
                  << dir.string() << "\n";
    });
}

struct GbmFlags {
    std::optional<double> m, sigma, r0, mu, xi, x;
    bool unrestricted = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--m", m, "drift of the rate");
        cmd->add_option("--sigma", sigma, "volatility of the rate");
        cmd->add_option("--r0", r0, "current log discount level");
        cmd->add_option("--mu", mu, "income rate");
        cmd->add_option("--xi", xi, "consumption cap");
        cmd->add_option("--x", x, "current surplus");
        cmd->add_flag("--unrestricted", unrestricted,
                      "no cap: lump payouts allowed");
    }
};

int cmd_gbm_value(const CommonFlags& common, const GbmFlags& fl) {
    const odc::Config cfg = common.load();
    const auto m = pick(fl.m, cfg, "gbm.m");
    const auto sigma = pick(fl.sigma, cfg, "gbm.sigma");
    const auto r0 = pick(fl.r0, cfg, "gbm.r0");
    const auto mu = pick(fl.mu, cfg, "gbm.mu");
    const bool unres = fl.unrestricted || cfg.boolean_or("gbm.unrestricted", false);
    auto xi = pick(fl.xi, cfg, "gbm.xi");
    const double x = pick(fl.x, cfg, "gbm.x").value_or(0.0);
    for (const auto& [opt, key] :
         std::vector<std::pair<const std::optional<double>*, const char*>>{
             {&m, "gbm.m"}, {&sigma, "gbm.sigma"}, {&r0, "gbm.r0"},
             {&mu, "gbm.mu"}}) {
        if (!*opt)
            throw odc::parameter_error(std::string("config: missing required key '") +
                                       key + "'");
    }
    if (unres && xi)
        throw odc::parameter_error(
            "config: 'gbm.xi' conflicts with the unrestricted switch");
    if (!unres && !xi)
        throw odc::parameter_error("config: missing required key 'gbm.xi'");

    odc::GbmParams p{*m, *sigma, *r0, *mu, unres ? kInf : *xi};
    odc::validate(p);
    double value;
    std::string which;
    if (p.unrestricted()) {
        value = odc::value_gbm_unrestricted(p, x);
        which = "unrestricted";
    } else if (p.xi <= p.mu) {
        value = odc::value_gbm_small_xi(p);
        which = "cap<=income";
    } else {
        value = odc::value_gbm_large_xi(p, x);
        which = "cap>income";
    }
    json pj;
    odc::to_json(pj, p);
    json out = {{"case", which},
                {"x", x},
                {"value", value},
                {"kappa", p.kappa()},
                {"expected_discount_1y", odc::expected_discount_gbm(p, 1.0)}};
    std::optional<fs::path> dir;
    if (common.out_dir) dir = fs::path(*common.out_dir);
    return run_guarded(dir, "gbm-value", {{"gbm", pj}, {"x", x}}, 0,
                       [&](ManifestWriter* mw) {
                           if (mw) {
                               odc::write_text_file(*dir / "value.json",
                                                    out.dump(2) + "\n");
                               mw->add_output("value.json");
                           }
                           std::cout << out.dump(2) << "\n";
                       });
}

struct OuFlags {
    RateFlags rate;
    std::optional<double> mu, xi, r_min, r_max, x_max;
    std::optional<int> n_r, n_x, max_iterations;

    void attach(CLI::App* cmd) {
        rate.attach(cmd);
        cmd->add_option("--mu", mu, "income rate");
        cmd->add_option("--xi", xi, "consumption cap");
        cmd->add_option("--r-min", r_min, "grid lower rate bound");
        cmd->add_option("--r-max", r_max, "grid upper rate bound");
        cmd->add_option("--x-max", x_max, "grid surplus bound");
        cmd->add_option("--nr", n_r, "rate nodes")->check(CLI::PositiveNumber);
        cmd->add_option("--nx", n_x, "surplus nodes")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iterations", max_iterations,
                        "policy iteration limit")
            ->check(CLI::PositiveNumber);
    }
};

int cmd_ou_solve(const CommonFlags& common, const OuFlags& fl) {
    const odc::Config cfg = common.load();
    const odc::DerivedParams d = load_rate(cfg, fl.rate);
    const auto mu = pick(fl.mu, cfg, "ou.mu");
    const auto xi = pick(fl.xi, cfg, "ou.xi");
    if (!mu) throw odc::parameter_error("config: missing required key 'ou.mu'");
    if (!xi) throw odc::parameter_error("config: missing required key 'ou.xi'");
    const odc::ProblemOU p = odc::make_problem_ou(d, *mu, *xi);

    odc::SolverGrid g = odc::default_grid(p);
    if (const auto v = pick(fl.r_min, cfg, "grid.r_min")) g.r_min = *v;
    if (const auto v = pick(fl.r_max, cfg, "grid.r_max")) g.r_max = *v;
    if (const auto v = pick(fl.x_max, cfg, "grid.x_max")) g.x_max = *v;
    g.n_r = fl.n_r ? *fl.n_r
                   : static_cast<int>(cfg.integer_or("grid.n_r", g.n_r));
    g.n_x = fl.n_x ? *fl.n_x
                   : static_cast<int>(cfg.integer_or("grid.n_x", g.n_x));
    g.max_iterations =
        fl.max_iterations
            ? *fl.max_iterations
            : static_cast<int>(
                  cfg.integer_or("solver.max_iterations", g.max_iterations));
    const Colors colors = load_colors(cfg);
    const fs::path dir = common.out_dir.value_or("ou_out");

    json inputs = {{"rate", rate_json(d)},
                   {"ou", {{"mu", p.mu}, {"xi", p.xi}}},
                   {"grid",
                    {{"r_min", g.r_min},
                     {"r_max", g.r_max},
                     {"x_max", g.x_max},
                     {"n_r", g.n_r},
                     {"n_x", g.n_x}}}};
    return run_guarded(dir, "ou-solve", inputs, 0, [&](ManifestWriter* mw) {
        const odc::ValueSurface vs = odc::solve_hjb_ou(p, g);
        const odc::RegularityReport reg = odc::verify_regularity(p, vs);
        const std::vector<odc::BoundaryPoint> boundary =
            odc::extract_pay_boundary(p, vs);

        odc::CsvBuilder csv({"r", "x", "value", "policy"});
        for (std::size_t i = 0; i < vs.r.size(); ++i)
            for (std::size_t j = 0; j < vs.x.size(); ++j)
                csv.row()
                    .cell(vs.r[i])
                    .cell(vs.x[j])
                    .cell(vs.value_at(i, j))
                    .cell(vs.policy[vs.idx(i, j)]);
        odc::write_text_file(dir / "surface.csv", csv.str());
        mw->add_output("surface.csv");

        json report = {{"surface", odc::surface_summary(vs)},
                       {"regularity", reg},
                       {"boundary", boundary}};
        odc::write_text_file(dir / "report.json", report.dump(2) + "\n");
        mw->add_output("report.json");

        odc::SvgHeatmapSpec spec;
        spec.hx = vs.r;
        spec.vy = vs.x;
        spec.category = [&vs](std::size_t ih, std::size_t iv) -> std::size_t {
            const double c = vs.policy[vs.idx(ih, iv)];
            if (c <= 0.0) return 0;
            if (vs.xi <= vs.mu) return 1;  // the only positive rate is the cap
            return c >= 0.5 * (vs.mu + vs.xi) ? 1 : 2;
        };
        spec.colors = {colors.wait, colors.pay, colors.income};
        spec.legend = {{colors.wait, "wait"},
                       {colors.pay, "pay at the cap"},
                       {colors.income, "pay the income rate"}};
        if (p.xi > p.mu) {
            odc::SvgOverlay curve;
            curve.color = "#d84a4a";
            curve.label = "par-maturity threshold";
            for (const auto& bp : boundary)
                if (bp.r < 0.0)
                    curve.points.emplace_back(bp.r, bp.x_reference);
            if (curve.points.size() >= 2) spec.overlays.push_back(curve);
        }
        spec.title = "consumption policy";
        spec.h_label = "short rate r";
        spec.v_label = "surplus x";
        odc::write_text_file(dir / "policy.svg", odc::render_heatmap(spec));
        mw->add_output("policy.svg");

        std::cout << "converged in " << vs.iterations
                  << " iterations, residual "
                  << odc::format_compact(vs.residual_norm, 6)
                  << ", bound violations " << vs.bound_violations << "\n"
                  << "outputs in " << dir.string() << "\n";
    });
}

int cmd_mc_check(const CommonFlags& common,
                 const std::optional<std::int64_t>& n_paths_flag) {
    const odc::Config cfg = common.load();
    const std::uint64_t seed = common.resolve(cfg);
    const std::int64_t n_paths =
        n_paths_flag ? *n_paths_flag : cfg.integer_or("mc.n_paths", 100000);
    std::optional<fs::path> dir;
    if (common.out_dir) dir = fs::path(*common.out_dir);

    json inputs = {{"mc", {{"n_paths", n_paths}}}};
    return run_guarded(dir, "mc-check", inputs, seed, [&](ManifestWriter* mw) {
        const std::vector<odc::McCrossCheck> checks =
            odc::run_mc_cross_checks(seed, n_paths);
        bool all_pass = true;
        json results = json::array();
        for (const auto& c : checks) {
            all_pass = all_pass && c.pass;
            json jc = {{"name", c.name},
                       {"closed_form", c.closed_form},
                       {"estimate", c.estimate},
                       {"z_score", c.z_score},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass}};
            results.push_back(jc);
            std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name
                      << ": closed=" << odc::format_compact(c.closed_form, 9)
                      << " mc=" << odc::format_compact(c.estimate.mean, 9)
                      << " se=" << odc::format_compact(c.estimate.std_error, 3)
                      << " z=" << odc::format_compact(c.z_score, 3) << "\n";
        }
        if (mw) {
            odc::write_text_file(*dir / "results.json",
                                 json{{"seed", seed},
                                      {"n_paths", n_paths},
                                      {"checks", results}}
                                         .dump(2) +
                                     "\n");
            mw->add_output("results.json");
        }
        if (!all_pass)
            throw odc::numerical_error(
                "mc-check: at least one estimate missed its closed form");
        std::cout << "all " << checks.size() << " cross-checks passed\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal consumption under stochastic discounting"};
    app.require_subcommand(1);
    int rc = 0;

    // classify
    auto* c_classify = app.add_subcommand(
        "classify", "report the shape of the log discount curve");
    CommonFlags classify_common;
    RateFlags classify_rate;
    std::optional<double> classify_T;
    classify_common.attach(c_classify, false);
    classify_rate.attach(c_classify);
    c_classify->add_option("--T", classify_T, "horizon");
    c_classify->callback(
        [&] { rc = cmd_classify(classify_common, classify_rate, classify_T); });

    // example
    auto* c_example = app.add_subcommand(
        "example", "run the showcase parameter set and write all artifacts");
    CommonFlags example_common;
    example_common.attach(c_example);
    c_example->callback([&] { rc = cmd_example(example_common); });

    // zb-value
    auto* c_zbv = app.add_subcommand(
        "zb-value", "finite-horizon value at a state (t, x)");
    CommonFlags zbv_common;
    ZbFlags zbv_flags;
    double zbv_t = 0.0, zbv_x = 0.0;
    zbv_common.attach(c_zbv);
    zbv_flags.attach(c_zbv);
    c_zbv->add_option("--t", zbv_t, "current time")->required();
    c_zbv->add_option("--x", zbv_x, "current surplus")->required();
    c_zbv->callback(
        [&] { rc = cmd_zb_value(zbv_common, zbv_flags, zbv_t, zbv_x, false); });

    // zb-strategy
    auto* c_zbs = app.add_subcommand(
        "zb-strategy", "finite-horizon plan and value at a state (t, x)");
    CommonFlags zbs_common;
    ZbFlags zbs_flags;
    double zbs_t = 0.0, zbs_x = 0.0;
    zbs_common.attach(c_zbs);
    zbs_flags.attach(c_zbs);
    c_zbs->add_option("--t", zbs_t, "current time")->required();
    c_zbs->add_option("--x", zbs_x, "current surplus")->required();
    c_zbs->callback(
        [&] { rc = cmd_zb_value(zbs_common, zbs_flags, zbs_t, zbs_x, true); });

    // zb-surface
    auto* c_zbsf = app.add_subcommand(
        "zb-surface", "value and initial-action surface over (t, x)");
    CommonFlags zbsf_common;
    ZbFlags zbsf_flags;
    int zbsf_nt = 201, zbsf_nx = 151;
    double zbsf_xmax = 3.0;
    zbsf_common.attach(c_zbsf);
    zbsf_flags.attach(c_zbsf);
    c_zbsf->add_option("--nt", zbsf_nt, "time nodes")->check(CLI::PositiveNumber);
    c_zbsf->add_option("--nx", zbsf_nx, "surplus nodes")
        ->check(CLI::PositiveNumber);
    c_zbsf->add_option("--x-max", zbsf_xmax, "surplus bound");
    c_zbsf->callback([&] {
        rc = cmd_zb_surface(zbsf_common, zbsf_flags, zbsf_nt, zbsf_nx,
                            zbsf_xmax);
    });

    // gbm-value
    auto* c_gbm = app.add_subcommand(
        "gbm-value", "infinite-horizon value under the drifting rate");
    CommonFlags gbm_common;
    GbmFlags gbm_flags;
    gbm_common.attach(c_gbm);
    gbm_flags.attach(c_gbm);
    c_gbm->callback([&] { rc = cmd_gbm_value(gbm_common, gbm_flags); });

    // ou-solve
    auto* c_ou = app.add_subcommand(
        "ou-solve",
        "numerical value surface under the mean-reverting rate");
    CommonFlags ou_common;
    OuFlags ou_flags;
    ou_common.attach(c_ou);
    ou_flags.attach(c_ou);
    c_ou->callback([&] { rc = cmd_ou_solve(ou_common, ou_flags); });

    // mc-check
    auto* c_mc = app.add_subcommand(
        "mc-check", "simulate every closed form and compare");
    CommonFlags mc_common;
    std::optional<std::int64_t> mc_n_paths;
    mc_common.attach(c_mc);
    c_mc->add_option("--n-paths", mc_n_paths, "paths per check")
        ->check(CLI::PositiveNumber);
    c_mc->callback([&] { rc = cmd_mc_check(mc_common, mc_n_paths); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const odc::parameter_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const odc::domain_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const odc::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
