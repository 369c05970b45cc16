#include "uscnn/cli.hpp"
#include "uscnn/image_io.hpp"
#include "uscnn/report.hpp"
#include "uscnn/synthetic.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

using namespace uscnn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("uscnn_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    std::size_t entries() const {
        return static_cast<std::size_t>(std::distance(fs::directory_iterator(path), fs::directory_iterator{}));
    }
};

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_bytes(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

void save_image(const Image& img, const std::string& path) {
    save_gray8(img.cast<std::uint8_t>(), path, format_from_extension(path));
}

// small synthetic pair on disk
void write_pair(const TempDir& dir, int size = 32) {
    SyntheticSpec spec;
    spec.size = size;
    spec.square = size / 4;
    spec.seed = 3;
    const SyntheticPair p = make_synthetic_pair(spec);
    save_image(p.t1, dir / "t1.png");
    save_image(p.t2, dir / "t2.png");
    save_map(p.truth, dir / "truth.png");
}

}  // namespace

TEST_CASE("eval on a 4x4 fixture") {
    TempDir dir;
    ChangeMap truth(4, 4), pred(4, 4);
    truth.set(0, 0, Label::changed);
    truth.set(0, 1, Label::changed);
    truth.set(1, 1, Label::changed);
    pred = truth;
    pred.set(1, 1, Label::unchanged);  // FN
    pred.set(3, 3, Label::changed);    // FP
    pred.set(2, 0, Label::changed);    // FP
    save_map(pred, dir / "pred.pgm");
    save_map(truth, dir / "truth.png");
    const Outcome r = run({"eval", dir / "pred.pgm", dir / "truth.png"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["fp"] == 2);
    CHECK(j["fn"] == 1);
    CHECK(j["oe"] == 3);
    CHECK(j["pcc"].get<double>() == doctest::Approx(0.8125));
}

TEST_CASE("mismatched sizes are a usage error and write nothing") {
    TempDir dir;
    save_image(Image::Constant(8, 8, 10), dir / "a.pgm");
    save_image(Image::Constant(8, 9, 10), dir / "b.pgm");
    const std::size_t before = dir.entries();
    CHECK(run({"detect", dir / "a.pgm", dir / "b.pgm", dir / "out.png", "--epochs", "1"}).code == cli::kExitUsage);
    CHECK(run({"lmr", dir / "a.pgm", dir / "b.pgm", dir / "out.png"}).code == cli::kExitUsage);
    CHECK(dir.entries() == before);
}

TEST_CASE("bad flags and values are usage errors") {
    TempDir dir;
    write_pair(dir, 16);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"detect", dir / "t1.png"}).code == cli::kExitUsage);
    CHECK(run({"detect", dir / "t1.png", dir / "t2.png", dir / "o.png", "--k", "0"}).code == cli::kExitUsage);
    CHECK(run({"detect", dir / "t1.png", dir / "t2.png", dir / "o.png", "--epochs", "x"}).code == cli::kExitUsage);
    CHECK(run({"lmr", dir / "t1.png", dir / "t2.png", dir / "o.png", "--window", "4"}).code == cli::kExitUsage);
    CHECK(run({"lmr", dir / "t1.png", dir / "t2.png", dir / "o.tif"}).code == cli::kExitUsage);
    CHECK(!fs::exists(dir / "o.png"));
}

TEST_CASE("missing input files are runtime failures") {
    TempDir dir;
    write_pair(dir, 16);
    const Outcome r = run({"lmr", dir / "nope.png", dir / "t2.png", dir / "o.png"});
    CHECK(r.code == cli::kExitFailure);
    CHECK(!r.err.empty());
    CHECK(!fs::exists(dir / "o.png"));
}

TEST_CASE("help exits cleanly") {
    const Outcome r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("detect") != std::string::npos);
    CHECK(run({"detect", "--help"}).code == 0);
}

TEST_CASE("detect with zero epochs writes a map and report") {
    TempDir dir;
    write_pair(dir);
    const Outcome r = run({"detect", dir / "t1.png", dir / "t2.png", dir / "map.png", "--epochs", "0", "--kernels", "2",
                           "--report", dir / "r.json", "--diff-map", dir / "d.pgm", "--truth", dir / "truth.png"});
    REQUIRE(r.code == 0);
    CHECK(load_truth(dir / "map.png").rows() == 32);
    CHECK(load_gray(dir / "d.pgm").cols() == 32);
    const json rep = json::parse(read_bytes(dir / "r.json"));
    CHECK(rep["loss_history"].empty());
    CHECK(rep["config"]["epochs"] == 0);
    CHECK(rep["wall_clock_seconds"].is_null());
    CHECK(json::parse(r.out).contains("kappa"));
}

TEST_CASE("detect is reproducible for a fixed seed") {
    TempDir dir;
    write_pair(dir);
    const std::vector<std::string> common = {"--epochs", "3", "--kernels", "2", "--seed", "9"};
    auto args = [&](const std::string& tag) {
        std::vector<std::string> a = {"detect", dir / "t1.png", dir / "t2.png", dir / ("m" + tag + ".png"), "--report",
                                      dir / ("r" + tag + ".json")};
        a.insert(a.end(), common.begin(), common.end());
        return a;
    };
    REQUIRE(run(args("a")).code == 0);
    REQUIRE(run(args("b")).code == 0);
    CHECK(read_bytes(dir / "ma.png") == read_bytes(dir / "mb.png"));
    json ra = json::parse(read_bytes(dir / "ra.json")), rb = json::parse(read_bytes(dir / "rb.json"));
    CHECK(ra["loss_history"] == rb["loss_history"]);
}

TEST_CASE("lmr writes a binary map") {
    TempDir dir;
    write_pair(dir);
    const Outcome r = run({"lmr", dir / "t1.png", dir / "t2.png", dir / "l.pgm", "--truth", dir / "truth.png"});
    REQUIRE(r.code == 0);
    const Image m = load_gray(dir / "l.pgm");
    CHECK(((m.array() == 0.0) || (m.array() == 255.0)).all());
    CHECK(json::parse(r.out)["oe"].get<int>() >= 0);
}

TEST_CASE("sweep-k emits one CSV row per k") {
    TempDir dir;
    write_pair(dir, 16);
    const Outcome r = run({"sweep-k", dir / "t1.png", dir / "t2.png", dir / "truth.png", "--ks", "5", "--epochs", "1",
                           "--kernels", "1"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, row, extra;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header == "k,pcc,kappa,oe");
    CHECK(row.rfind("5,", 0) == 0);
    CHECK(!std::getline(lines, extra));
    CHECK(run({"sweep_k", dir / "t1.png", dir / "t2.png", dir / "truth.png", "--ks", "1,2", "--epochs", "0",
               "--kernels", "1", "--csv", dir / "s.csv"})
              .code == 0);
    CHECK(read_bytes(dir / "s.csv").starts_with("k,pcc,kappa,oe\n1,"));
}

TEST_CASE("a failed write leaves no partial outputs") {
    TempDir dir;
    write_pair(dir, 16);
    const std::size_t before = dir.entries();
    const Outcome r = run({"detect", dir / "t1.png", dir / "t2.png", dir / "m.png", "--epochs", "0", "--kernels", "1",
                           "--report", dir / "missing/r.json"});
    CHECK(r.code == cli::kExitFailure);
    CHECK(!fs::exists(dir / "m.png"));
    CHECK(dir.entries() == before);
}

TEST_CASE("report JSON round-trips") {
    RunReport rep;
    rep.command = "detect";
    rep.config.k = 12.5;
    rep.config.seed = 7;
    rep.loss_history = {{1.0, 2.0, 0.5, -3.0}, {0.25, 0.5, 0.125, 0.0}};
    rep.metrics = metrics_from_counts(5, 90, 3, 2);
    rep.change_map_path = "m.png";
    rep.difference_map_path = "d.png";
    rep.wall_clock_seconds = 1.5;
    const json j = rep;
    CHECK(j.get<RunReport>() == rep);
    CHECK(json::parse(j.dump()).get<RunReport>() == rep);

    RunReport bare;
    bare.command = "detect";
    bare.change_map_path = "x.pgm";
    CHECK(json(bare).get<RunReport>() == bare);
}

TEST_CASE("the installed binary maps outcomes to exit codes") {
    const std::string bin = USCNN_BINARY;
    auto status = [](const std::string& cmd) {
        const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    TempDir dir;
    write_pair(dir, 16);
    CHECK(status(bin + " --help") == 0);
    CHECK(status(bin) == 2);
    CHECK(status(bin + " eval " + (dir / "truth.png") + " " + (dir / "truth.png")) == 0);
    CHECK(status(bin + " eval " + (dir / "nothing.png") + " " + (dir / "truth.png")) == 1);
}
