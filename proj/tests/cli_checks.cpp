#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qread/sme.hpp"

#ifndef QREAD_CLI_PATH
#error "QREAD_CLI_PATH must point at the built CLI"
#endif

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(QREAD_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buffer;
    while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) result.out.append(buffer.data(), n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

// split a CSV body (ignoring # comments) into rows of cells
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("xi subcommand reproduces the model I correlation length") {
    const CliResult result = run_cli("xi model=I x=1");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 2); // header + one row
    REQUIRE(rows[0][2] == "xi");
    REQUIRE_THAT(std::stod(rows[1][2]), Catch::Matchers::WithinAbs(3.7397642472446344, 1e-9));
}

TEST_CASE("missing and unknown keys exit with code 2") {
    REQUIRE(run_cli("mi-sweep x=1 T=1").exit_code == 2);            // missing model
    REQUIRE(run_cli("mi-sweep model=I x=1 T=1 bogus=3").exit_code == 2);
    REQUIRE(run_cli("nonmonotone-scan x=1 T=5").exit_code == 2);    // missing phi
    REQUIRE(run_cli("nonmonotone-scan phi= x=1 T=5").exit_code == 2);
    REQUIRE(run_cli("frobnicate model=I").exit_code == 2);
    REQUIRE(run_cli("mi-sweep model=I x=50 T=1 Tmax=4").exit_code == 2);
}

TEST_CASE("projective-limit sweep lands on a third of a bit") {
    const CliResult result = run_cli("mi-sweep model=I x=50 T=1 seed=7");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 2);
    REQUIRE_THAT(std::stod(rows[1][3]), Catch::Matchers::WithinAbs(1.0 / 3.0, 0.02));
    REQUIRE(rows[1][6] == "6623");
}

TEST_CASE("output is byte-identical across reruns") {
    const std::string args = "mi-sweep model=II x=0.4,0.6 a=1 T=1,2,4 M=500 seed=11";
    const CliResult a = run_cli(args);
    const CliResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);
    REQUIRE(a.out.find("# qread mi-sweep") == 0);
    REQUIRE(a.out.find("# seed=11") != std::string::npos);
}

TEST_CASE("config file keys are read and overridden by flags") {
    const std::string path = "/tmp/qread_cli_test_config.txt";
    {
        std::ofstream file(path);
        file << "model=I\nx=1\n# comment line\nT=1\nM=400\nseed=3\n";
    }
    const CliResult from_file = run_cli("mi-sweep config=" + path);
    REQUIRE(from_file.exit_code == 0);
    const CliResult overridden = run_cli("mi-sweep config=" + path + " seed=4");
    REQUIRE(overridden.exit_code == 0);
    REQUIRE(from_file.out != overridden.out);
    REQUIRE(overridden.out.find("# seed=4") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("single deterministic sme path matches the Lindblad solution") {
    const CliResult result = run_cli("sme-ensemble model=I eta=0 paths=1 dt=0.001 t=1 seed=5");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 1002); // header + 1001 grid points
    const auto& last = rows.back();
    REQUIRE_THAT(std::stod(last[0]), Catch::Matchers::WithinAbs(1.0, 1e-12));
    const qread::PauliVector exact = qread::lindblad_solution_model1({1.0, 0.0, 0.0, 1.0}, 1.0, 1.0);
    REQUIRE_THAT(std::stod(last[4]), Catch::Matchers::WithinAbs(exact.pz, 1e-3));
}

TEST_CASE("plateau-compare marks the divergent commuting case") {
    const CliResult result = run_cli("plateau-compare model=II alpha=0 eta=0.3 M=200 x=0.2 x2T=2 seed=2");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[1][6] == "1"); // mi_theory pinned at the 1-bit maximum
    REQUIRE(rows[1][8] == "1"); // divergence flag

    const CliResult zero = run_cli("plateau-compare model=I eta=0 M=200 seed=2");
    REQUIRE(zero.exit_code == 0);
    const auto zrows = parse_csv(zero.out);
    REQUIRE(std::stod(zrows[1][5]) == 0.0);
    REQUIRE(std::stod(zrows[1][6]) == 0.0);
    REQUIRE(zrows[1][7] == "nan");
}

TEST_CASE("Tmax builds a shared x^2 T ladder across strengths") {
    const CliResult result = run_cli("mi-sweep model=II x=0.1,0.2 a=1 Tmax=400 points=4 M=300 seed=6");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 9); // header + 4 rows per strength
    // rows at equal ladder position share the x^2 T abscissa exactly
    for (int j = 0; j < 4; ++j) {
        REQUIRE(rows[static_cast<std::size_t>(1 + j)][2] == rows[static_cast<std::size_t>(5 + j)][2]);
    }
    REQUIRE(rows[1][1] == "100");
    REQUIRE(rows[5][1] == "25");
}

TEST_CASE("accuracy subcommand matches the single-step channel value") {
    const CliResult result = run_cli("accuracy model=II x=1 T=1 M=3000 seed=9");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 2);
    REQUIRE_THAT(std::stod(rows[1][1]), Catch::Matchers::WithinAbs(0.8808, 0.05));
}

TEST_CASE("overfit subcommand emits one row per record length") {
    const CliResult result = run_cli("overfit model=I x=0.4 n=400 T=1,8 iters=40 seed=3");
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0][0] == "T");
    for (int r = 1; r <= 2; ++r) {
        for (int c = 1; c <= 3; ++c) {
            const double acc = std::stod(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            REQUIRE(acc >= 0.3);
            REQUIRE(acc <= 1.0);
        }
    }
}

TEST_CASE("nonmonotone-scan accepts the transverse prior") {
    const CliResult result = run_cli("nonmonotone-scan phi=0.3926990816987241 T=25 x=0.4,3 prior=transverse M=2000 seed=14");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.find("# prior=transverse") != std::string::npos);
    const auto rows = parse_csv(result.out);
    REQUIRE(rows.size() == 3);
    // weak measurement beats strong for transverse initial states
    REQUIRE(std::stod(rows[1][4]) > std::stod(rows[2][4]));
}

TEST_CASE("reals are written with 17 significant digits") {
    const CliResult result = run_cli("xi model=I x=1.0625"); // exactly representable input
    REQUIRE(result.exit_code == 0);
    const auto rows = parse_csv(result.out);
    const double xi = std::stod(rows[1][2]);
    std::ostringstream os;
    os.precision(17);
    os << xi;
    REQUIRE(rows[1][2] == os.str());
}
