#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "config.hpp"

using namespace spiralflow;
using nlohmann::json;

namespace {

json base(const std::string& command) {
    return json{{"command", command},
                {"run_id", "t"},
                {"params", {{"gamma", 3}, {"r0", 2}, {"b0", 0.25}, {"rho0", 0.5}, {"U1_0", 0.5}, {"U2_0", 1.5}, {"S0", 0}, {"E0", 0.5}}},
                {"grid", {{"r1", 2.05}, {"radial_nodes", 33}}}};
}

}  // namespace

TEST_CASE("strict config parsing") {
    CHECK_NOTHROW(parse_config(base("background")));
    CHECK_THROWS_AS(parse_config(base("nonsense")), ConfigError);
    json j = base("background");
    j["extra"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base("background");
    j["grid"]["radial_nodes"] = 8;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base("background");
    j["params"]["gamma"] = 2.5;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base("solve-irrotational");
    j["boundary"] = {{"U1en", {{"tag", "eps_sine"}, {"amplitude", 1e-3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["boundary"] = {{"U1en", {{"tag", "eps_sin_k"}, {"amplitude", -1e-3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["boundary"] = {{"U1en", {{"tag", "eps_poly3"}, {"amplitude", 1e-3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["boundary"] = {{"Ken", {{"tag", "eps_sin_k"}, {"amplitude", 1e-3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j["boundary"] = {{"U3en", {{"tag", "eps_sin_k"}, {"amplitude", 1e-3}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base("solve-axisym");
    j["grid"]["z_nodes"] = 32;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("refinement multiplies the intervals") {
    RunConfig c = parse_config(base("background"));
    c.refine = 2;
    CHECK(c.refined_radial_nodes() == 65);
}

TEST_CASE("background command") {
    const RunOutcome out = execute(parse_config(base("background")));
    CHECK(out.ok());
    const json& r = out.report["results"]["background.integrate_background"];
    CHECK(r["K0"].get<double>() == doctest::Approx(1.625));
    CHECK(r["at_r0"]["M1sq"].get<double>() == doctest::Approx(1.0 / 3.0));
    CHECK(r["at_r0"]["M2sq"].get<double>() == doctest::Approx(3.0));
    REQUIRE(out.files.size() == 1);
    CHECK(out.files[0].file == "background.csv");
    CHECK(out.files[0].content.rfind("# field=background run=t\n", 0) == 0);
    CHECK(out.report["command"] == "background");
}

TEST_CASE("runs are deterministic") {
    json j = base("certify");
    j["grid"]["r1"] = 2.01;
    const RunConfig c = parse_config(j);
    const RunOutcome a = execute(c), b = execute(c);
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.report["results"]["multiplier.certify"]["certified"] == true);
}

TEST_CASE("solver failures are reported, not thrown") {
    json j = base("certify");
    j["grid"]["r1"] = 2.05;
    const RunOutcome out = execute(parse_config(j));
    CHECK_FALSE(out.ok());
    CHECK(out.report["pass"] == false);
    CHECK_FALSE(out.report["failures"].empty());
}

TEST_CASE("shipped example configs load") {
    const std::filesystem::path dir = std::filesystem::path(SPIRAL_SOURCE_DIR) / "tools" / "examples";
    int count = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        INFO(e.path().string());
        CHECK_NOTHROW(load_config(e.path().string()));
        ++count;
    }
    CHECK(count == 6);
}

TEST_CASE("csv text") {
    const std::string s = csv_text("f", "id", {"a", "b"}, {{1.0 / 3.0, 2.0}});
    CHECK(s == "# field=f run=id\na,b\n0.33333333333333331,2\n");
}
