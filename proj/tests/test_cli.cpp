#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "hjred/parser.hpp"
#include "hjred/model.hpp"

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string bin() {
    const char* b = std::getenv("HJRED_BIN");
    REQUIRE(b != nullptr);
    return b;
}

std::string models_dir() {
    const char* d = std::getenv("HJRED_MODELS");
    REQUIRE(d != nullptr);
    return d;
}

RunResult run(const std::string& args) {
    std::string cmd = bin() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

double grab_number(const std::string& text, const std::string& label) {
    auto pos = text.find(label);
    REQUIRE(pos != std::string::npos);
    pos += label.size();
    return std::stod(text.substr(pos));
}

} // namespace

TEST_CASE("analyze: disc report and exit code") {
    RunResult r = run("analyze " + models_dir() + "/disc.hj");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("chain status: integrable") != std::string::npos);
    CHECK(r.out.find("dq2 = 0") != std::string::npos);
    CHECK(r.out.find("reduced h0") != std::string::npos);
    CHECK(r.out.find("branches:") != std::string::npos);
}

TEST_CASE("analyze --json: schema and the generated mass-shell constraint") {
    RunResult r = run("analyze --json " + models_dir() + "/relativistic_particle.hj");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == 1);
    CHECK(j["seed"] == 42);
    CHECK(j["chain"]["status"] == "integrable");
    REQUIRE(j["chain"]["constraints"].size() == 3);
    // the generated constraint equals (1/2)(p^2 + m^2) as a normalized string
    hjred::Model m = hjred::builtin_models()[0];
    std::string got = j["chain"]["constraints"][2]["expr"];
    CHECK(hjred::parse(got, *m.table) ==
          hjred::parse("(1/2)*(-x0_p^2 + x1_p^2 + x2_p^2 + x3_p^2 + m^2)", *m.table));
    CHECK(j["chain"]["constraints"][2]["classification"] == "first-class");
}

TEST_CASE("analyze: missing file exits 1") {
    RunResult r = run("analyze no_such_file.hj");
    CHECK(r.exit_code == 1);
}

TEST_CASE("analyze: chain outcomes map to exit codes") {
    std::string path = "/tmp/hjred_cli_inconsistent_" + std::to_string(getpid()) + ".hj";
    {
        std::ofstream out(path);
        out << "name impossible\ncoordinate q1 q2\nlagrangian q1_d^2/2 + q2\n";
    }
    RunResult r = run("analyze " + path);
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("inconsistent") != std::string::npos);
    std::remove(path.c_str());

    std::string upath = "/tmp/hjred_cli_undecided_" + std::to_string(getpid()) + ".hj";
    {
        std::ofstream out(upath);
        out << "name fuzzy\ncoordinate q1 q2\nlagrangian q1_d^2/2 - q2^2*q1/1000000000\n";
    }
    RunResult ru = run("analyze " + upath);
    CHECK(ru.exit_code == 3);
    std::remove(upath.c_str());
}

TEST_CASE("simulate: on-surface run prints drift and residual") {
    RunResult r = run("simulate " + models_dir() +
                      "/disc.hj --init q1=0.6,q1_p=0,q2=0.8 --span 10 --step 0.001");
    CHECK(r.exit_code == 0);
    CHECK(grab_number(r.out, "max constraint drift: ") <= 1e-8);
    CHECK(grab_number(r.out, "action residual: ") <= 1e-6);

    // span 0 gives a single CSV row plus header
    std::string csv = "/tmp/hjred_cli_test_" + std::to_string(getpid()) + ".csv";
    RunResult r0 = run("simulate " + models_dir() +
                       "/disc.hj --init q1=0.6,q1_p=0,q2=0.8 --span 0 --step 0.001 "
                       "--out " + csv);
    CHECK(r0.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
    std::remove(csv.c_str());
}

TEST_CASE("simulate: off-surface init exits 2") {
    RunResult r = run("simulate " + models_dir() +
                      "/disc.hj --init q1=1,q1_p=1,q2=1 --span 1 --step 0.001");
    CHECK(r.exit_code == 2);
}

TEST_CASE("spectrum: disc at R=3 has five admissible states") {
    RunResult r = run("spectrum " + models_dir() +
                      "/disc.hj --const R=3 --grid 512 --extent 10");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("admissible count: 5") != std::string::npos);
}

TEST_CASE("spectrum: CSV export and the negative branch") {
    std::string csv = "/tmp/hjred_cli_spec_" + std::to_string(getpid()) + ".csv";
    RunResult r = run("spectrum " + models_dir() +
                      "/disc.hj --const R=3 --grid 128 --extent 10 --out " + csv);
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,lambda_n,g_lambda_n,admissible");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 128);
    std::remove(csv.c_str());

    RunResult rn = run("spectrum " + models_dir() +
                       "/disc.hj --const R=3 --grid 128 --extent 10 --branch -");
    CHECK(rn.exit_code == 0);
    CHECK(rn.out.find("admissible count: 5") != std::string::npos);
}

TEST_CASE("kernel: CSV export carries the grid header") {
    std::string csv = "/tmp/hjred_cli_kern_" + std::to_string(getpid()) + ".csv";
    RunResult r = run("kernel --slices 8 --grid 32 --extent 4 --out " + csv);
    CHECK(r.exit_code == 0);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("# grid n=32 extent=4") != std::string::npos);
    std::remove(csv.c_str());
}

TEST_CASE("spectrum: punctured plane reports an infinite admissible set") {
    RunResult r = run("spectrum " + models_dir() +
                      "/punctured_plane.hj --const R=3 --grid 512 --extent 10");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("admissible set: infinite") != std::string::npos);
    // lowest level sits at the hole boundary, g = 0
    CHECK(std::abs(grab_number(r.out, "g=")) <= 1e-6);
}

TEST_CASE("spectrum: relativistic particle has no reduced 1-D form") {
    RunResult r = run("spectrum " + models_dir() + "/relativistic_particle.hj");
    CHECK(r.exit_code == 4);
}

TEST_CASE("kernel: comparison summary and beta = 0") {
    RunResult r = run("kernel --mass 1 --e 1 --beta 1 --slices 64 --grid 64 --extent 8");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("max error vs operator exponential:") != std::string::npos);
    CHECK(r.out.find("doubled-slices error ratio:") != std::string::npos);

    RunResult r0 = run("kernel --beta 0 --slices 16 --grid 64 --extent 8");
    CHECK(r0.exit_code == 0);
    CHECK(grab_number(r0.out, "max error vs operator exponential: ") <= 1e-12);

    RunResult bad = run("kernel --slices 0");
    CHECK(bad.exit_code == 1);

    RunResult rj = run("kernel --slices 32 --grid 64 --extent 8 --json");
    CHECK(rj.exit_code == 0);
    auto j = nlohmann::json::parse(rj.out);
    CHECK(j["schema"] == 1);
    CHECK(j["slices"] == 32);
    CHECK(j["max_error"].is_number());
    CHECK(j["doubled_slices_error_ratio"].is_number());
}

TEST_CASE("determinism: repeated invocations are byte-identical") {
    std::vector<std::string> cmds{
        "analyze " + models_dir() + "/disc.hj",
        "analyze --json " + models_dir() + "/disc.hj",
        "analyze --json " + models_dir() + "/relativistic_particle.hj",
        "simulate " + models_dir() +
            "/disc.hj --init q1=0.6,q1_p=0,q2=0.8 --span 1 --step 0.01",
        "spectrum " + models_dir() + "/disc.hj --const R=3 --grid 128 --extent 10",
        "kernel --slices 16 --grid 64 --extent 8",
    };
    for (const std::string& c : cmds) {
        RunResult a = run(c);
        RunResult b = run(c);
        CHECK(a.exit_code == b.exit_code);
        CHECK(a.out == b.out);
    }
}
