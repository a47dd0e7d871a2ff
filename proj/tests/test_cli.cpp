#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string g_binary;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) res.output += buf;
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path work_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "bistab_cli_tests" / name;
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Value of a key=value line in CLI output; empty when absent.
std::string value_of(const std::string& output, const std::string& key) {
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
    }
    return {};
}

const char* fig_config_text =
    "[model]\n"
    "a_param = 16\n"
    "s_param = 9\n";

}  // namespace

TEST_CASE("help and argument errors use the documented exit codes") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("params --bogus-flag").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("steady").exit_code == 2);  // missing required --detuning
}

TEST_CASE("config problems exit with code 2 and a message") {
    const RunResult missing = run_cli("--config /nowhere/missing.ini params");
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("/nowhere/missing.ini") != std::string::npos);

    const fs::path dir = work_dir("bad_config");
    write_file(dir / "bad.ini", "[physical]\nkappa = 70e3\n");
    const RunResult bad = run_cli("--config " + (dir / "bad.ini").string() + " params");
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("kappa_hz") != std::string::npos);
}

TEST_CASE("params echoes physical and derived quantities") {
    const RunResult res = run_cli("params");
    REQUIRE(res.exit_code == 0);
    CHECK(value_of(res.output, "kappa_hz") == "70000");
    CHECK(value_of(res.output, "n_atoms") == "150000");
    CHECK(value_of(res.output, "a_param") == "21.4285714");
    CHECK(value_of(res.output, "a_source") == "derived");
    CHECK(value_of(res.output, "s_param") == "12");
    CHECK(value_of(res.output, "s_source") == "derived");
    CHECK(value_of(res.output, "shift_sign") == "figure_convention");

    const fs::path dir = work_dir("params_override");
    write_file(dir / "fig.ini", fig_config_text);
    const RunResult fig = run_cli("--config " + (dir / "fig.ini").string() + " params");
    REQUIRE(fig.exit_code == 0);
    CHECK(value_of(fig.output, "a_param") == "16");
    CHECK(value_of(fig.output, "a_source") == "override");
    CHECK(value_of(fig.output, "s_source") == "override");
}

TEST_CASE("steady and region report the figure-parameter landscape") {
    const fs::path dir = work_dir("steady_region");
    write_file(dir / "fig.ini", fig_config_text);
    const std::string cfg = " --config " + (dir / "fig.ini").string();

    const RunResult steady = run_cli("steady --detuning 4" + cfg);
    REQUIRE(steady.exit_code == 0);
    CHECK(value_of(steady.output, "count") == "3");

    const RunResult region = run_cli("region" + cfg);
    REQUIRE(region.exit_code == 0);
    CHECK(std::abs(std::stod(value_of(region.output, "lower")) - 1.42421585) < 1e-6);
    CHECK(std::abs(std::stod(value_of(region.output, "upper")) - 6.92304906) < 1e-6);

    write_file(dir / "empty.ini", "[model]\na_param = 0\ns_param = 0\n");
    const RunResult none = run_cli("region --config " + (dir / "empty.ini").string());
    REQUIRE(none.exit_code == 0);
    CHECK(none.output.find("none") != std::string::npos);
}

TEST_CASE("numerical breakdown exits with code 3") {
    const fs::path dir = work_dir("numerical");
    write_file(dir / "huge.ini", "[model]\na_param = 16\ns_param = 1e200\n");
    const RunResult res =
        run_cli("steady --detuning 4 --config " + (dir / "huge.ini").string());
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("numerical error") != std::string::npos);
}

TEST_CASE("scan emits both directions and is bit-reproducible") {
    const fs::path dir = work_dir("scan_repro");
    write_file(dir / "fig.ini", fig_config_text);
    const std::string cfg = " --config " + (dir / "fig.ini").string();

    const RunResult first = run_cli("scan" + cfg + " --output-dir " + (dir / "a").string());
    REQUIRE(first.exit_code == 0);
    REQUIRE(fs::exists(dir / "a" / "scan_up.csv"));
    REQUIRE(fs::exists(dir / "a" / "scan_down.csv"));

    const RunResult second = run_cli("scan" + cfg + " --output-dir " + (dir / "b").string());
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(dir / "a" / "scan_up.csv") == slurp(dir / "b" / "scan_up.csv"));
    CHECK(slurp(dir / "a" / "scan_down.csv") == slurp(dir / "b" / "scan_down.csv"));

    // The up trace begins on the dark branch at the default scan start.
    std::istringstream up(slurp(dir / "a" / "scan_up.csv"));
    std::string header, row;
    std::getline(up, header);
    std::getline(up, row);
    const double first_intensity = std::stod(row.substr(row.find(',') + 1));
    CHECK(first_intensity < 0.1);
}

TEST_CASE("noise is seeded and deterministic") {
    const fs::path dir = work_dir("scan_noise");
    write_file(dir / "fig.ini", fig_config_text);
    const std::string cfg = " --config " + (dir / "fig.ini").string();
    const std::string noisy = "scan --noise-rms 0.02" + cfg + " --output-dir ";

    REQUIRE(run_cli(noisy + (dir / "s1").string() + " --seed 7").exit_code == 0);
    REQUIRE(run_cli(noisy + (dir / "s2").string() + " --seed 7").exit_code == 0);
    REQUIRE(run_cli(noisy + (dir / "s3").string() + " --seed 8").exit_code == 0);
    CHECK(slurp(dir / "s1" / "scan_up.csv") == slurp(dir / "s2" / "scan_up.csv"));
    CHECK(slurp(dir / "s1" / "scan_up.csv") != slurp(dir / "s3" / "scan_up.csv"));

    CHECK(run_cli("scan --noise-rms -0.5" + cfg).exit_code == 2);
}

TEST_CASE("fixed-step dynamics reruns byte-identically") {
    const fs::path dir = work_dir("dynamics_repro");
    write_file(dir / "dyn.ini",
               std::string(fig_config_text) +
                   "[dynamics]\n"
                   "chirp_start = 8\n"
                   "chirp_end = 0\n"
                   "duration_s = 2e-4\n"
                   "output_dt_s = 1e-6\n"
                   "fixed_step = true\n"
                   "fixed_dt_s = 1e-8\n");
    const std::string cfg = " --config " + (dir / "dyn.ini").string();
    REQUIRE(run_cli("dynamics" + cfg + " --output-dir " + (dir / "a").string()).exit_code == 0);
    REQUIRE(run_cli("dynamics" + cfg + " --output-dir " + (dir / "b").string()).exit_code == 0);
    const std::string traj = slurp(dir / "a" / "trajectory.csv");
    CHECK(traj == slurp(dir / "b" / "trajectory.csv"));
    CHECK(traj.rfind("t_s,detuning_norm,intensity_norm,pop_fraction\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 1 + 201);
}

TEST_CASE("spectrogram pipeline finds the limit-cycle tone") {
    const fs::path dir = work_dir("spectrogram");
    write_file(dir / "osc.ini",
               "[physical]\n"
               "n_atoms = 250000\n"
               "[dynamics]\n"
               "chirp_start = 24\n"
               "chirp_end = 24\n"
               "duration_s = 1e-3\n"
               "output_dt_s = 5e-7\n");
    const std::string cfg = " --config " + (dir / "osc.ini").string();
    const std::string out = (dir / "out").string();
    REQUIRE(run_cli("dynamics" + cfg + " --output-dir " + out).exit_code == 0);

    const RunResult spec = run_cli("spectrogram" + cfg + " --output-dir " + out +
                                   " --dominant-out " + (dir / "out" / "dominant.csv").string() +
                                   " --band-lo 10e3 --band-hi 900e3");
    REQUIRE(spec.exit_code == 0);
    REQUIRE(fs::exists(dir / "out" / "spectrogram.csv"));
    REQUIRE(fs::exists(dir / "out" / "dominant.csv"));

    // The tail of the run oscillates, so late sections carry a frequency.
    std::istringstream dom(slurp(dir / "out" / "dominant.csv"));
    std::string line;
    std::getline(dom, line);
    CHECK(line == "t_s,frequency_hz");
    std::string last_with_value;
    while (std::getline(dom, line)) {
        if (!line.empty() && line.back() != ',') last_with_value = line;
    }
    REQUIRE(!last_with_value.empty());
    const double freq = std::stod(last_with_value.substr(last_with_value.find(',') + 1));
    CHECK(freq > 1e4);
    CHECK(freq < 1e6);
}

TEST_CASE("scan then fit recovers the generating parameters") {
    const fs::path dir = work_dir("pipeline");
    write_file(dir / "fig.ini",
               std::string(fig_config_text) +
                   "[analysis]\n"
                   "fit_a_max = 40\n"
                   "fit_s_max = 20\n");
    const std::string cfg = " --config " + (dir / "fig.ini").string();
    const std::string out = (dir / "out").string();
    REQUIRE(run_cli("scan" + cfg + " --output-dir " + out).exit_code == 0);

    const RunResult fit = run_cli("fit" + cfg + " --up " + out + "/scan_up.csv --down " + out +
                                  "/scan_down.csv");
    REQUIRE(fit.exit_code == 0);
    CHECK(value_of(fit.output, "converged") == "true");
    const double a_est = std::stod(value_of(fit.output, "a_est"));
    const double s_est = std::stod(value_of(fit.output, "s_est"));
    CHECK(std::abs(a_est - 16.0) / 16.0 < 1e-4);
    CHECK(std::abs(s_est - 9.0) / 9.0 < 1e-4);

    CHECK(run_cli("fit" + cfg + " --up missing.csv --down also_missing.csv").exit_code == 2);
}

int main(int argc, char** argv) {
    std::vector<char*> rest;
    for (int i = 0; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg.rfind("--binary=", 0) == 0) {
            g_binary = arg.substr(9);
        } else {
            rest.push_back(argv[i]);
        }
    }
    if (g_binary.empty()) {
        std::fprintf(stderr, "usage: cli_tests --binary=<path to bistab>\n");
        return 1;
    }
    doctest::Context ctx;
    ctx.applyCommandLine(static_cast<int>(rest.size()), rest.data());
    return ctx.run();
}
