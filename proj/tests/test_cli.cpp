#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::current_path() / "cli_work";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const fs::path log = work_dir() / "stdout.txt";
    const std::string cmd = "cd '" + work_dir().string() + "' && '" + QRECT_CLI_PATH + "' " + args + " > '" +
                            log.string() + "' 2> /dev/null";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

nlohmann::json last_json(const std::string& out) {
    std::istringstream in(out);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty() && line.front() == '{') last = line;
    return nlohmann::json::parse(last);
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("gen writes clouds and rejects bad parameters") {
    auto r = run("gen --family parallel_lines --eps 0.01 --r 1 --h 1e-3 -o pl.csv");
    CHECK(r.code == 0);
    REQUIRE(fs::exists(work_dir() / "pl.csv"));
    const auto j = last_json(r.out);
    CHECK(j.at("status") == "ok");
    CHECK(j.at("N").get<int>() > 1000);

    std::ifstream in(work_dir() / "pl.csv");
    std::string line;
    double lo = 1e300, hi = -1e300;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || !(std::isdigit(static_cast<unsigned char>(line.back())))) continue;
        std::vector<double> v;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (...) {
                v.clear();
                break;
            }
        }
        if (v.size() < 2) continue;
        lo = std::min(lo, v[1]);
        hi = std::max(hi, v[1]);
    }
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(0.01));

    CHECK(run("gen --family parallel_lines --eps 2").code == 2);
    r = run("gen --family heis_lift --curve circle --n 1 -o lift.csv");
    CHECK(r.code == 0);
    CHECK(last_json(r.out).at("metric") == "heisenberg");
    CHECK(run("gen --family nosuch").code == 2);
}

TEST_CASE("analyze on a flat segment") {
    REQUIRE(run("gen --family segment --h 1e-3 -o seg.csv").code == 0);
    const auto r = run("--out-dir seg_out analyze -i seg.csv --depth 6 --coef beta_p:2:2 --svg");
    CHECK(r.code == 0);
    const auto meta = read_json(work_dir() / "seg_out" / "beta_p_q2_p2_meta.json");
    CHECK(meta.at("M_estimate").get<double>() <= 1e-6);
    CHECK(fs::exists(work_dir() / "seg_out" / "beta_p_q2_p2_report.csv"));
    CHECK(fs::exists(work_dir() / "seg_out" / "beta_p_q2_p2_depth.svg"));
}

TEST_CASE("analyze on parallel lines writes two reports") {
    REQUIRE(run("gen --family parallel_lines --eps 0.01 --r 1 --h 1e-3 -o pl2.csv").code == 0);
    const auto r = run("--out-dir pl_out analyze -i pl2.csv --depth 5 --coef beta_p:2:2 iota_p:1:1 --pair-budget 20000");
    CHECK(r.code == 0);
    const auto j = last_json(r.out);
    REQUIRE(j.at("reports").size() == 2);
    for (const auto& rep : j.at("reports")) {
        CHECK(std::isfinite(rep.at("M_estimate").get<double>()));
        CHECK(fs::exists(rep.at("report").get<std::string>().insert(0, work_dir().string() + "/")));
    }
}

TEST_CASE("analyze below resolution exits 3 naming the level") {
    REQUIRE(run("gen --family segment --h 1e-3 -o seg3.csv").code == 0);
    const auto r = run("analyze -i seg3.csv --depth 9");
    CHECK(r.code == 3);
    const auto j = last_json(r.out);
    CHECK(j.at("level") == 7);
    CHECK(j.at("message").get<std::string>().find("level 7") != std::string::npos);
    CHECK(run("analyze -i missing.csv --depth 3").code == 1);
    CHECK(run("analyze -i seg3.csv --depth 3 --coef gamma").code == 2);
}

TEST_CASE("verify suites") {
    auto r = run("verify --suite pythagoras --trials 10000 --seed 7");
    CHECK(r.code == 0);
    const auto py = read_json(work_dir() / "verify_eucl_two_plane.json");
    CHECK(py.at("violations") == 0);
    CHECK(py.at("trials") == 10000);

    REQUIRE(run("gen --family lipschitz_graph --h 5e-4 -o lipgraph.csv").code == 0);
    r = run("verify --suite packing --input lipgraph.csv --depth 7 --pair-budget 20000");
    CHECK(r.code == 0);
    CHECK(fs::exists(work_dir() / "packing.csv"));

    r = run("verify --suite embedding --n 3");
    CHECK(r.code == 0);
    CHECK(fs::exists(work_dir() / "verify_embedding_heis_line.json"));
    CHECK(run("verify --suite nosuch").code == 2);
}

TEST_CASE("reruns are bit-identical") {
    REQUIRE(run("gen --family circle --h 2e-3 --seed 3 -o c1.csv").code == 0);
    REQUIRE(run("gen --family circle --h 2e-3 --seed 3 -o c2.csv").code == 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp(work_dir() / "c1.csv") == slurp(work_dir() / "c2.csv"));
    REQUIRE(run("--out-dir a1 --threads 1 analyze -i c1.csv --depth 4 --coef iota_p:1:1 --pair-budget 5000").code == 0);
    REQUIRE(run("--out-dir a2 --threads 2 analyze -i c1.csv --depth 4 --coef iota_p:1:1 --pair-budget 5000").code == 0);
    CHECK(slurp(work_dir() / "a1" / "iota_p_q1_p1_records.csv") == slurp(work_dir() / "a2" / "iota_p_q1_p1_records.csv"));
}
