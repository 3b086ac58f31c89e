#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "equity_cli_test.log";
    const std::string cmd = std::string("\"") + EQUITY_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::ostringstream os;
    os << in.rdbuf();
    r.out = os.str();
    return r;
}

fs::path fresh(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("equity_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

const std::string kData = EQUITY_TEST_DATA;

}  // namespace

TEST_CASE("questions prints the checklist") {
    const Run r = cli("questions");
    CHECK(r.code == 0);
    int numbered = 0;
    std::istringstream is(r.out);
    for (std::string line; std::getline(is, line);) {
        if (line.size() > 4 && line.rfind("  ", 0) == 0 && line.find(") ") != std::string::npos) ++numbered;
    }
    CHECK(numbered == 21);
    CHECK(cli("questions").out == r.out);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("audit").code == 1);
    CHECK(cli("--format yaml questions").code == 1);
}

TEST_CASE("audit writes reports and flags undefined metrics") {
    const fs::path dir = fresh("audit");
    write(dir / "ok.csv", "pred,label,group,y_tt\n1,1,0,1\n0,0,0,0\n1,1,1,0\n0,0,1,0\n1,0,1,1\n");
    const Run ok = cli("--out \"" + (dir / "o").string() + "\" --format csv audit --input \"" + (dir / "ok.csv").string() + "\"");
    CHECK(ok.code == 0);
    CHECK(fs::exists(dir / "o" / "audit.csv"));

    write(dir / "degenerate.csv", "pred,label,group\n1,1,0\n1,1,1\n");
    CHECK(cli("--out \"" + (dir / "d").string() + "\" audit --input \"" + (dir / "degenerate.csv").string() + "\"").code == 3);

    write(dir / "bad.csv", "pred,label,group\n1,x,0\n");
    CHECK(cli("--out \"" + (dir / "b").string() + "\" audit --input \"" + (dir / "bad.csv").string() + "\"").code == 2);
    CHECK(cli("audit --input /nonexistent.csv").code == 2);
}

TEST_CASE("casestudy writes tables and reloadable models") {
    const fs::path dir = fresh("casestudy");
    const Run r = cli("--out \"" + dir.string() + "\" --format json casestudy --input \"" + kData +
                      "/student_fixture.csv\" --save-models \"" + (dir / "models").string() + "\"");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "casestudy.json"));
    CHECK(fs::exists(dir / "admissibility_by_sex.csv"));
    CHECK(fs::exists(dir / "eo_violation.csv"));
    CHECK(fs::exists(dir / "utilization_shares.csv"));
    CHECK(fs::exists(dir / "regimes"));

    const Run g = cli("--out \"" + (dir / "g").string() + "\" gaps --proxy \"" + (dir / "models" / "admissibility.json").string() +
                      "\" --intended \"" + (dir / "models" / "performance.json").string() + "\"");
    CHECK(g.code == 0);
    REQUIRE(fs::exists(dir / "g" / "gaps.json"));
    std::ifstream in(dir / "g" / "gaps.json");
    const auto j = nlohmann::json::parse(in);
    // only "sex" is shared between the two feature sets
    CHECK(j.at("gaps").at("gamma_x").size() == 10);
    CHECK(j.at("gaps").at("gamma_x")[0] == 0);

    CHECK(cli("casestudy --input \"" + kData + "/student_fixture.csv\" --regime nonsense").code == 2);
}

TEST_CASE("score and simulate-loop run from a config file") {
    const fs::path dir = fresh("score");
    write(dir / "run.toml", "seed = 3\nformat = [\"json\", \"csv\"]\n[loop]\nn_per_round = 300\nrounds = 2\n"
                            "[scoring]\nmax_outer_iters = 5\nmax_inner_iters = 5\n");
    const std::string base = "--config \"" + (dir / "run.toml").string() + "\" --out \"" + dir.string() + "\" ";
    CHECK(cli(base + "score").code == 0);
    CHECK(fs::exists(dir / "score_trace.json"));
    CHECK(fs::exists(dir / "score_trace.csv"));
    CHECK(cli(base + "simulate-loop --regime full_equity").code == 0);
    CHECK(fs::exists(dir / "loop_trajectory.csv"));

    write(dir / "broken.toml", "[scoring]\ntau = \"high\"\n");
    CHECK(cli("--config \"" + (dir / "broken.toml").string() + "\" score").code == 2);
}
