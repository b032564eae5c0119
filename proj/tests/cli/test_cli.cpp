#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// runs the binary through the shell with ODC_SEED scrubbed from the
// environment; extra_env may re-introduce variables ("ODC_SEED=5")
RunResult run_cli(const std::string& args, const std::string& extra_env = "") {
    static int counter = 0;
    const fs::path base = fs::temp_directory_path() /
                          ("odc_cli_cap_" + std::to_string(++counter));
    const fs::path so = base.string() + ".out";
    const fs::path se = base.string() + ".err";
    std::string cmd = "env -u ODC_SEED ";
    if (!extra_env.empty()) cmd += extra_env + " ";
    cmd += std::string(ODC_CLI_PATH) + " " + args + " >" + so.string() +
           " 2>" + se.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    fs::remove(so);
    fs::remove(se);
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("odc_cli_dir_" + std::to_string(::getpid()) + "_" +
                std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    REQUIRE(out.good());
}

const std::string kShowcaseRate =
    "--a 1 --sigma 1 --b -0.1 --r0 -0.2";
const std::string kShowcaseZb =
    kShowcaseRate + " --mu 2 --xi 4 --T 4";

}  // namespace

TEST_CASE("usage errors are configuration errors", "[cli]") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK_THAT(run_cli("--help").out, ContainsSubstring("zb-value"));

    const auto none = run_cli("");
    CHECK(none.exit_code == 2);
    CHECK_THAT(none.err, ContainsSubstring("configuration error"));

    const auto unknown = run_cli("frobnicate");
    CHECK(unknown.exit_code == 2);

    const auto missing = run_cli("zb-value --t 0 --x 0 " + kShowcaseRate +
                                 " --xi 4 --T 4");
    CHECK(missing.exit_code == 2);
    CHECK_THAT(missing.err, ContainsSubstring("zb.mu"));

    const auto conflict =
        run_cli("zb-value --t 0 --x 0 " + kShowcaseZb + " --unrestricted");
    CHECK(conflict.exit_code == 2);
    CHECK_THAT(conflict.err, ContainsSubstring("unrestricted"));
}

TEST_CASE("curve classification reports every threshold", "[cli]") {
    const auto r = run_cli("classify " + kShowcaseRate + " --T 4");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("scenario") == "IncDecInc");
    CHECK(j.at("w1").get<double>() ==
          Catch::Approx(0.261161912149688042).epsilon(1e-9));
    CHECK(j.at("w2").get<double>() ==
          Catch::Approx(2.041423180844357642).epsilon(1e-9));
    CHECK(j.at("t1").get<double>() ==
          Catch::Approx(0.113424698647087901).epsilon(1e-9));
    CHECK(j.at("t2").get<double>() ==
          Catch::Approx(0.438840570920118486).epsilon(1e-9));
    CHECK(j.at("f_end").get<double>() ==
          Catch::Approx(0.016316343685909506).epsilon(1e-9));
    CHECK(j.at("f_start").get<double>() == 0.0);
}

TEST_CASE("finite-horizon values and plans at a pinned state", "[cli]") {
    const auto r =
        run_cli("zb-value --t 0.15 --x 0.05 " + kShowcaseZb);
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("value").get<double>() ==
          Catch::Approx(7.880707920531839).epsilon(1e-12));
    CHECK(j.at("case") == "cap>income");
    CHECK(j.at("scenario") == "IncDecInc");

    const auto s =
        run_cli("zb-strategy --t 0.15 --x 0.05 " + kShowcaseZb);
    REQUIRE(s.exit_code == 0);
    const json js = json::parse(s.out);
    REQUIRE(js.contains("strategy"));
    CHECK_FALSE(js.at("strategy").at("segments").empty());
    // the reported plan attains the reported value
    CHECK(js.at("strategy_return").get<double>() ==
          Catch::Approx(js.at("value").get<double>()).margin(1e-9));
}

TEST_CASE("lognormal-rate values from flags", "[cli]") {
    const auto r = run_cli(
        "gbm-value --m 0.6 --sigma 0.4 --r0 0.5 --mu 1 --xi 3 --x 1.7");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j.at("case") == "cap>income");
    CHECK(j.at("kappa").get<double>() == Catch::Approx(0.52).epsilon(1e-14));
    CHECK(j.at("value").get<double>() ==
          Catch::Approx(1.999802419792508).epsilon(1e-12));
    CHECK(j.at("expected_discount_1y").get<double>() ==
          Catch::Approx(0.3605949401730783).epsilon(1e-12));

    // kappa <= 0 means the perpetuity diverges: rejected up front
    const auto bad = run_cli(
        "gbm-value --m 0.08 --sigma 0.4 --r0 0.5 --mu 1 --xi 3");
    CHECK(bad.exit_code == 2);
    CHECK_THAT(bad.err, ContainsSubstring("configuration error"));
}

TEST_CASE("malformed configuration files are rejected", "[cli]") {
    TempDir td;
    const fs::path cfg = td.path / "bad.json";
    write_file(cfg, "{ \"rate\": { \"a\": 1, }");  // trailing comma + EOF
    const auto r = run_cli("classify --config " + cfg.string() + " --T 4");
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.err, ContainsSubstring("configuration error"));

    const auto gone =
        run_cli("classify --config " + (td.path / "absent.json").string() +
                " --T 4");
    CHECK(gone.exit_code != 0);
}

TEST_CASE("config file drives the stationary solver", "[cli]") {
    TempDir td;
    const fs::path cfg = td.path / "solve.json";
    write_file(cfg, R"({
  "rate": {"a": 1.0, "sigma_tilde": 0.8, "b_tilde": 0.8, "r0": 0.0},
  "ou": {"mu": 1.0, "xi": 2.0},
  "grid": {"n_r": 41, "n_x": 41}
})");
    const fs::path out1 = td.path / "run1";
    const auto r1 = run_cli("ou-solve --config " + cfg.string() +
                            " --out-dir " + out1.string());
    REQUIRE(r1.exit_code == 0);
    CHECK_THAT(r1.out, ContainsSubstring("converged"));

    const json report = json::parse(slurp(out1 / "report.json"));
    const json& surf = report.at("surface");
    CHECK(surf.at("converged") == true);
    CHECK(surf.at("residual_norm").get<double>() < 1e-8);
    CHECK(surf.at("bound_violations").get<long>() == 0);
    CHECK(surf.at("n_r").get<int>() == 41);
    const json& reg = report.at("regularity");
    CHECK(reg.at("increasing_x") == true);
    CHECK(reg.at("concave_x") == true);
    CHECK(reg.at("decreasing_r") == true);
    CHECK(reg.at("convex_r") == true);
    CHECK_FALSE(report.at("boundary").empty());

    const json manifest = json::parse(slurp(out1 / "manifest.json"));
    CHECK(manifest.at("status") == "ok");
    CHECK(manifest.at("command") == "ou-solve");
    for (const char* name : {"surface.csv", "report.json", "policy.svg"}) {
        CHECK(fs::exists(out1 / name));
        bool listed = false;
        for (const auto& o : manifest.at("outputs"))
            listed = listed || o == name;
        CHECK(listed);
    }
    const std::string csv = slurp(out1 / "surface.csv");
    CHECK(csv.rfind("r,x,value,policy\n", 0) == 0);

    SECTION("reruns are byte-identical apart from the manifest") {
        const fs::path out2 = td.path / "run2";
        const auto r2 = run_cli("ou-solve --config " + cfg.string() +
                                " --out-dir " + out2.string());
        REQUIRE(r2.exit_code == 0);
        CHECK(slurp(out2 / "surface.csv") == csv);
        CHECK(slurp(out2 / "report.json") == slurp(out1 / "report.json"));
        CHECK(slurp(out2 / "policy.svg") == slurp(out1 / "policy.svg"));
    }
    SECTION("a grid that misses the reversion level is rejected") {
        const auto bad = run_cli("ou-solve --config " + cfg.string() +
                                 " --r-min 1.0 --r-max 2.0 --out-dir " +
                                 (td.path / "bad").string());
        CHECK(bad.exit_code == 2);
        CHECK_THAT(bad.err, ContainsSubstring("configuration error"));
        // the manifest still records the failure
        const json m = json::parse(slurp(td.path / "bad" / "manifest.json"));
        CHECK(m.at("status") == "error");
    }
}

TEST_CASE("showcase run certifies its reference values", "[cli]") {
    TempDir td;
    const fs::path dir = td.path / "showcase";
    const auto r = run_cli("example --out-dir " + dir.string());
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.out, ContainsSubstring("scenario IncDecInc"));
    CHECK_THAT(r.out, ContainsSubstring("w1 = 0.261161912"));

    const json check = json::parse(slurp(dir / "check.json"));
    for (const char* key : {"w1", "w2", "t1", "t2"}) {
        INFO(key);
        CHECK(check.at(key).at("pass") == true);
        CHECK(check.at(key).at("abs_error").get<double>() < 5e-4);
    }
    CHECK(check.at("peak_above_end_above_start") == true);

    const json scenario = json::parse(slurp(dir / "scenario.json"));
    CHECK(scenario.at("scenario") == "IncDecInc");
    CHECK(fs::exists(dir / "surface.csv"));
    CHECK(fs::exists(dir / "regions.svg"));
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("status") == "ok");
}

TEST_CASE("simulation cross-checks run and reproduce bitwise", "[cli]") {
    TempDir td;
    const fs::path a = td.path / "a", b = td.path / "b", c = td.path / "c";
    const std::string args = "mc-check --n-paths 4000 --seed 123 --out-dir ";

    const auto ra = run_cli(args + a.string());
    REQUIRE(ra.exit_code == 0);
    CHECK_THAT(ra.out, ContainsSubstring("cross-checks passed"));
    const json results = json::parse(slurp(a / "results.json"));
    CHECK(results.at("seed").get<std::uint64_t>() == 123);
    CHECK(results.at("checks").size() >= 5);
    for (const auto& chk : results.at("checks")) {
        INFO(chk.at("name").get<std::string>());
        CHECK(chk.at("pass") == true);
    }

    const auto rb = run_cli(args + b.string());
    REQUIRE(rb.exit_code == 0);
    CHECK(slurp(b / "results.json") == slurp(a / "results.json"));
    CHECK(rb.out == ra.out);

    SECTION("an explicit seed flag beats the environment") {
        const auto rc = run_cli(args + c.string(), "ODC_SEED=555");
        REQUIRE(rc.exit_code == 0);
        CHECK(slurp(c / "results.json") == slurp(a / "results.json"));
    }
    SECTION("the environment seed is honoured when no flag is given") {
        const fs::path d = td.path / "d";
        const auto rd = run_cli("mc-check --n-paths 4000 --out-dir " +
                                    d.string(),
                                "ODC_SEED=555");
        REQUIRE(rd.exit_code == 0);
        const json jd = json::parse(slurp(d / "results.json"));
        CHECK(jd.at("seed").get<std::uint64_t>() == 555);
        CHECK(slurp(d / "results.json") != slurp(a / "results.json"));
    }
}
