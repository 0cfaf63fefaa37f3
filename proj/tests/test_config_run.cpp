#include "linf/config.hpp"
#include "linf/error.hpp"
#include "linf/run.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace linf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "linf_test_config_run" / name;
    fs::remove_all(p);
    return p;
}

RunConfig config(const std::string& body, const std::string& out)
{
    return parse_config_text(body + "output.dir = " + scratch(out).string() + "\n");
}

nlohmann::json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

const std::string kFixture = "domain.kind = interval\n"
                             "domain.n = 201\n"
                             "model.name = linear\n"
                             "boundary.u0 = x^3 - x^2\n"
                             "continuation.stop_rel_e = 0\n";

}  // namespace

TEST_CASE("config parsing")
{
    SUBCASE("defaults")
    {
        const RunConfig c = parse_config_text("domain.kind = rectangle\ndomain.n = 33\nmodel.name = linear\nboundary.u0 = x*x/2\n");
        CHECK(c.kind == DomainKind::rectangle);
        CHECK(c.n == 33);
        CHECK(c.schedule.p_max == 1024.0);
        CHECK(c.schedule.growth == 2.0);
        CHECK(c.tau == 0.01);
        CHECK(c.probe_count == 0);
        CHECK(c.entries.size() == 4);
        const DomainPtr d = c.make_domain();
        const Field u0 = c.make_u0(d);
        const std::size_t k = d->index(16, 3);
        CHECK(u0[k] == doctest::Approx(0.5 * d->point(k).x * d->point(k).x));
    }
    SUBCASE("comments and whitespace")
    {
        const RunConfig c = parse_config_text("# header\n  domain.kind=interval   # inline\n\ndomain.n = 24\nmodel.name = arctan_tilt\nmodel.epsilon = 0.25\nboundary.u0 = x\n");
        CHECK(c.make_model().c == doctest::Approx(0.8));
    }
    SUBCASE("errors")
    {
        const std::string ok = "domain.kind = interval\ndomain.n = 50\nmodel.name = linear\nboundary.u0 = x\n";
        CHECK_NOTHROW(parse_config_text(ok));
        CHECK_THROWS_AS(parse_config_text("domain.kind = interval\ndomain.n = 50\nboundary.u0 = x\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text(ok + "domain.colour = red\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text(ok + "domain.n = 60\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("domain.kind = interval\ndomain.n = 23\nmodel.name = linear\nboundary.u0 = x\n"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config_text(ok + "continuation.p_max = lots\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("domain.kind = interval\ndomain.n = 50\nmodel.name = linear\nboundary.u0 = x +\n"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config_text("domain.kind = interval\ndomain.n = 50\nmodel.name = weighted\nboundary.u0 = x\n"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("/nonexistent/linf.cfg"), ConfigError);
        try {
            parse_config_text(ok + "bogus = 1\n", "mine.cfg");
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("mine.cfg") != std::string::npos);
            CHECK(msg.find("bogus") != std::string::npos);
        }
    }
    SUBCASE("shipped configurations parse")
    {
        for (const auto& entry : fs::directory_iterator(fs::path(LINF_SOURCE_DIR) / "configs"))
            if (entry.path().extension() == ".cfg") CHECK_NOTHROW(parse_config(entry.path().string()));
    }
}

TEST_CASE("solve reports")
{
    SUBCASE("clamped cubic data against the oracle")
    {
        const RunConfig cfg = config(kFixture, "fixture");
        const CommandResult r = cmd_solve(cfg);
        CHECK(r.exit_code == exit_ok);
        const auto& o = r.report["oracle"];
        CHECK(o["e"].get<double>() == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(1e-10));
        CHECK(o["e_rel_error"].get<double>() <= 0.02);
        CHECK(o["crossing_error_h"].get<double>() <= 2.0);
        CHECK(r.report["checks"]["monotone_energy"].get<bool>());
        CHECK(r.report["checks"]["dual_bound"].get<bool>());

        const fs::path dir = cfg.output_dir;
        for (const char* f : {"report.json", "trace.csv", "config.echo", "fields/u_final.bin", "fields/f_final.csv",
                              "fields/u_oracle.csv", "plotdata/profile.csv"})
            CHECK_MESSAGE(fs::exists(dir / f), f);
        CHECK(read_json(dir / "report.json")["exit_code"] == 0);
    }
    SUBCASE("harmonic data stop at zero energy")
    {
        const CommandResult r =
            cmd_solve(config("domain.kind = rectangle\ndomain.n = 33\nmodel.name = linear\nboundary.u0 = x*y\n", "harmonic"));
        CHECK(r.exit_code == exit_ok);
        CHECK(r.report["trace"]["early_stop"] == "zero_energy");
        CHECK(r.report["structure"]["e_inf"].get<double>() <= 1e-9);
    }
    SUBCASE("parabola data")
    {
        const CommandResult r = cmd_solve(config(
            "domain.kind = interval\ndomain.n = 201\nmodel.name = linear\nboundary.u0 = x - x^2\ncontinuation.stop_rel_e = 0\n",
            "parabola"));
        CHECK(r.exit_code == exit_ok);
        CHECK(r.report["oracle"]["e"].get<double>() == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(r.report["oracle"]["crossing"] == false);
        CHECK(r.report["structure"]["e_inf"].get<double>() == doctest::Approx(2.0).epsilon(0.02));
    }
    SUBCASE("reports are deterministic apart from timings")
    {
        auto strip = [](nlohmann::json j) {
            j.erase("timings");
            j["config"].erase("output.dir");
            return j;
        };
        const std::string body = "domain.kind = rectangle\ndomain.n = 25\nmodel.name = linear\n"
                                 "boundary.u0 = (x^2 + y^2) / 2\ncontinuation.p_max = 16\n";
        const CommandResult a = cmd_solve(config(body, "det_a"));
        const CommandResult b = cmd_solve(config(body, "det_b"));
        CHECK(strip(a.report) == strip(b.report));
    }
    SUBCASE("model violations are solver-level failures")
    {
        const CommandResult r = guarded([] {
            return cmd_solve(config("domain.kind = interval\ndomain.n = 50\nmodel.name = weighted\nmodel.c = 0.9\n"
                                    "model.a_expr = 3\nboundary.u0 = x^2\n",
                                    "bad_model"));
        });
        CHECK(r.exit_code == exit_solver_failure);
        CHECK(r.report.contains("error"));
    }
    SUBCASE("configuration failures map to exit 4")
    {
        const CommandResult r = guarded([] { return cmd_solve(parse_config("/nonexistent.cfg")); });
        CHECK(r.exit_code == exit_config_error);
    }
}

TEST_CASE("other commands")
{
    SUBCASE("check-model")
    {
        const CommandResult r = cmd_check_model(config("domain.kind = interval\ndomain.n = 50\nmodel.name = arctan_tilt\nboundary.u0 = x\n", "unused"));
        CHECK(r.exit_code == exit_ok);
    }
    SUBCASE("oracle, analyze and probe on a stored solution")
    {
        const RunConfig cfg = config(kFixture, "pipeline");
        const CommandResult o = cmd_oracle(cfg);
        CHECK(o.exit_code == exit_ok);
        CHECK(o.report["m"].get<double>() == doctest::Approx(1.0 - std::numbers::sqrt2 / 2.0).epsilon(1e-10));

        REQUIRE(cmd_solve(cfg).exit_code == exit_ok);
        const std::string u = (fs::path(cfg.output_dir) / "fields" / "u_final.bin").string();
        const CommandResult a = cmd_analyze(cfg, u, 1024.0);
        CHECK(a.exit_code == exit_ok);
        CHECK(a.report["structure"]["e_inf"].get<double>() == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(0.02));

        RunConfig pc = cfg;
        pc.probe_count = 2;
        pc.probe_p = 16.0;
        const CommandResult p = cmd_probe(pc, u);
        CHECK(p.report["probes"].size() == 2);
        CHECK(fs::exists(fs::path(cfg.output_dir) / "probe.json"));
    }
    SUBCASE("probe of the perturbed parabola")
    {
        const CommandResult r = cmd_probe(config("domain.kind = interval\ndomain.a = -1\ndomain.b = 0\ndomain.n = 201\n"
                                                 "model.name = linear\nboundary.u0 = x + (1 - cos(2*pi*x)) / (8*pi^2)\n"
                                                 "analysis.probe_boxes = -1:0\nanalysis.probe_p = 64\n",
                                                 "perturbed"),
                                          "");
        CHECK(r.exit_code == exit_non_minimal);
        CHECK(r.report["max_delta_e"].get<double>() >= 0.45);
    }
    SUBCASE("smooth")
    {
        const RunConfig cfg = config("domain.kind = interval\ndomain.n = 401\nmodel.name = linear\nboundary.u0 = x^2/2\n", "smooth");
        const CommandResult r = cmd_smooth(cfg, 0.05);
        CHECK(r.exit_code == exit_ok);
        CHECK(r.report["measured_sup"].get<double>() <= 0.05);
        CHECK(r.report["clamped_drift"].get<double>() <= 1e-12);
        const CommandResult tight = cmd_smooth(config("domain.kind = interval\ndomain.n = 401\nmodel.name = linear\nboundary.u0 = x^3\n", "smooth_fail"), 1e-3);
        CHECK(tight.exit_code == exit_check_failed);
    }
}
