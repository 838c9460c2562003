// Runs the built command-line tool as a subprocess.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "temp_dir.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#ifndef CLASP_CLI_PATH
#error "CLASP_CLI_PATH must name the built command-line tool"
#endif

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the tool with `args` (already shell-quoted) inside `dir`.
Run run(const testutil::TempDir& dir, const std::string& args) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.path().string() + "' && '" CLASP_CLI_PATH "' " + args + " >'" +
                            out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

int lines(const std::string& s) {
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("help lists every subcommand and documents both variants") {
    testutil::TempDir dir("cli-help");
    auto r = run(dir, "--help");
    CHECK(r.code == 0);
    for (const char* word : {"segment", "eval", "synth", "inspect", "--config", "pixel", "patch"}) {
        CHECK_MESSAGE(r.out.find(word) != std::string::npos, word);
    }
    r = run(dir, "segment --help");
    CHECK(r.code == 0);
    for (const char* flag : {"--features", "--image", "--beta", "--seed", "--no-crf", "--fixed-k", "--normalize-rows",
                             "--dump-spectrum", "--dump-search", "--jobs", "--out", "--crf-iterations",
                             "--crf-gt-prob", "--crf-gauss-sxy", "--crf-gauss-compat", "--crf-bilat-sxy",
                             "--crf-bilat-srgb", "--crf-bilat-compat", "--crf-max-pixels"}) {
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    }
    r = run(dir, "eval --help");
    for (const char* flag : {"--pred", "--gt", "--ignore", "--many-to-one", "--jobs", "--out"}) {
        CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
    }
}

TEST_CASE("usage errors exit with status 1 and one diagnostic line") {
    testutil::TempDir dir("cli-usage");
    REQUIRE(run(dir, "synth --rows 4 --cols 4 --k 2 --out f.clspf").code == 0);

    auto r = run(dir, "");
    CHECK(r.code == 1);
    r = run(dir, "segment --features f.clspf --no-crf --bogus --out m.png");
    CHECK(r.code == 1);
    CHECK(lines(r.err) == 1);
    r = run(dir, "segment --features f.clspf --no-crf");
    CHECK(r.code == 1);
    r = run(dir, "segment --features f.clspf --no-crf --beta 1 --out m.png");
    CHECK(r.code == 1);
    r = run(dir, "segment --features f.clspf --no-crf --fixed-k 1 --out m.png");
    CHECK(r.code == 1);

    // CRF on without an image is rejected before any work is done.
    r = run(dir, "segment --features f.clspf --out m.png");
    CHECK(r.code == 1);
    CHECK(lines(r.err) == 1);
    CHECK(r.err.find("MissingImageForCrf") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "m.png"));
}

TEST_CASE("data errors exit with status 2") {
    testutil::TempDir dir("cli-data");
    {
        std::ofstream(dir / "bad.clspf") << "this is not a feature file at all, really";
    }
    auto r = run(dir, "segment --features bad.clspf --no-crf --out m.png");
    CHECK(r.code == 2);
    CHECK(lines(r.err) == 1);
    CHECK(r.err.find("BadMagic") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "m.png"));

    r = run(dir, "inspect --features bad.clspf");
    CHECK(r.code == 2);

    // fixed k beyond n - 1 is only known once the features are read.
    REQUIRE(run(dir, "synth --rows 2 --cols 2 --k 2 --out small.clspf").code == 0);
    r = run(dir, "segment --features small.clspf --no-crf --fixed-k 4 --out m.png");
    CHECK(r.code == 2);
    CHECK(r.err.find("BadK") != std::string::npos);
}

TEST_CASE("synth, segment, eval round trip") {
    testutil::TempDir dir("cli-flow");
    auto r = run(dir, "synth --rows 12 --cols 12 --k 3 --sigma 0.02 --seed 7 --labels gt/a.png --out f.clspf");
    REQUIRE(r.code == 0);
    r = run(dir, "inspect --features f.clspf");
    CHECK(r.code == 0);
    CHECK(r.out.find("patch grid: 12 x 12 (144 patches)") != std::string::npos);

    r = run(dir, "segment --features f.clspf --no-crf --seed 3 --out pred/a.png --dump-spectrum s.json "
                 "--dump-search q.json");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("k=3") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "pred" / "a.json"));
    CHECK(slurp(dir / "s.json").find("elbow_index") != std::string::npos);
    CHECK(slurp(dir / "q.json").find("candidates") != std::string::npos);
    const auto sidecar = slurp(dir / "pred" / "a.json");
    CHECK(sidecar.find("\"variant\": \"patch\"") != std::string::npos);
    CHECK(sidecar.find("\"seed\": 3") != std::string::npos);

    r = run(dir, "segment --features f.clspf --no-crf --seed 3 --out again.png");
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "pred" / "a.png") == slurp(dir / "again.png"));

    r = run(dir, "segment --features f.clspf --no-crf --seed 3 --fixed-k 3 --out fixed.png");
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "fixed.png") == slurp(dir / "again.png"));

    r = run(dir, "eval --pred pred --gt gt --out e.json");
    REQUIRE(r.code == 0);
    const auto e = slurp(dir / "e.json");
    CHECK(e.find("\"miou\": 1.0") != std::string::npos);
    CHECK(e.find("\"pixel_acc\": 1.0") != std::string::npos);
    CHECK(e.find("\"n_images\": 1") != std::string::npos);
}

TEST_CASE("pixel variant with an image") {
    testutil::TempDir dir("cli-pixel");
    REQUIRE(run(dir, "synth --rows 4 --cols 4 --k 2 --seed 2 --labels l.png --out f.clspf").code == 0);
    auto r = run(dir, "segment --features f.clspf --image l.png --crf-max-pixels 1024 --crf-iterations 5 --out m.png");
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "m.json").find("\"variant\": \"pixel\"") != std::string::npos);
    r = run(dir, "segment --features f.clspf --image missing.png --out m2.png");
    CHECK(r.code == 2);
    CHECK_FALSE(std::filesystem::exists(dir / "m2.png"));
}

TEST_CASE("batch mode matches single-image runs for any job count") {
    testutil::TempDir dir("cli-batch");
    for (int i = 0; i < 3; ++i) {
        const auto s = std::to_string(i);
        REQUIRE(run(dir, "synth --rows 6 --cols 8 --k 2 --seed " + s + " --out in/x" + s + ".clspf").code == 0);
        REQUIRE(run(dir, "segment --features in/x" + s + ".clspf --no-crf --out single/x" + s + ".png").code == 0);
    }
    auto r = run(dir, "segment --features in --no-crf --jobs 3 --out batch --dump-search search");
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == 3);
    for (int i = 0; i < 3; ++i) {
        const auto name = "x" + std::to_string(i);
        CHECK(slurp(dir / ("single/" + name + ".png")) == slurp(dir / ("batch/" + name + ".png")));
        CHECK(std::filesystem::exists(dir / ("search/" + name + ".search.json")));
    }
}

TEST_CASE("config file supplies defaults, flags override") {
    testutil::TempDir dir("cli-config");
    REQUIRE(run(dir, "synth --rows 6 --cols 6 --k 2 --out f.clspf").code == 0);
    {
        std::ofstream(dir / "c.toml") << "[segment]\nbeta = 0.3\nseed = 9\nno-crf = true\n";
    }
    auto r = run(dir, "--config c.toml segment --features f.clspf --seed 4 --out m.png");
    REQUIRE(r.code == 0);
    const auto j = slurp(dir / "m.json");
    CHECK(j.find("\"beta\": 0.3") != std::string::npos);
    CHECK(j.find("\"seed\": 4") != std::string::npos);
    CHECK(j.find("\"variant\": \"patch\"") != std::string::npos);
}
