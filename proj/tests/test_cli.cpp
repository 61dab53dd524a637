#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dtm/image.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char* cli_path() { return std::getenv("DTM_CLI"); }

CliResult run_cli(const std::string& args) {
    const fs::path dir = fs::temp_directory_path() / "dtm_cli_tests";
    fs::create_directories(dir);
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd =
        std::string(cli_path()) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WEXITSTATUS(status);
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

fs::path work_dir() {
    const fs::path dir = fs::temp_directory_path() / "dtm_cli_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("match of an image with itself reports symmetric directions") {
    if (!cli_path()) {
        MESSAGE("DTM_CLI not set; run through ctest");
        return;
    }
    const fs::path img = work_dir() / "self.pgm";
    dtm::save_pgm(testsupport::textured_image(64, 64, 1), img.string());

    const CliResult r =
        run_cli("match " + img.string() + " " + img.string() + " --canon 64x64");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("similarity_total\t") != std::string::npos);

    // forward and backward lines must carry the same value
    std::istringstream is(r.out);
    std::string line, fwd, bwd;
    while (std::getline(is, line)) {
        if (line.rfind("similarity_forward\t", 0) == 0)
            fwd = line.substr(line.find('\t') + 1);
        if (line.rfind("similarity_backward\t", 0) == 0)
            bwd = line.substr(line.find('\t') + 1);
    }
    CHECK(fwd == bwd);
    CHECK(!fwd.empty());
}

TEST_CASE("match is symmetric across argument order") {
    if (!cli_path())
        return;
    const fs::path a = work_dir() / "a.pgm";
    const fs::path b = work_dir() / "b.pgm";
    dtm::save_pgm(testsupport::textured_image(48, 56, 2), a.string());
    dtm::save_pgm(testsupport::textured_image(72, 40, 3), b.string());

    const CliResult ab = run_cli("match " + a.string() + " " + b.string() + " --canon 64x64");
    const CliResult ba = run_cli("match " + b.string() + " " + a.string() + " --canon 64x64");
    REQUIRE(ab.exit_code == 0);
    REQUIRE(ba.exit_code == 0);

    const auto total = [](const std::string& text) {
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line))
            if (line.rfind("similarity_total\t", 0) == 0)
                return line;
        return std::string();
    };
    CHECK(total(ab.out) == total(ba.out));
}

TEST_CASE("malformed input is reported with the file name and a nonzero exit") {
    if (!cli_path())
        return;
    const fs::path bad = work_dir() / "bad.pgm";
    std::ofstream(bad) << "not a pgm";
    const CliResult r = run_cli("match " + bad.string() + " " + bad.string());
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("bad.pgm") != std::string::npos);
}

TEST_CASE("unknown method lists the valid ones") {
    if (!cli_path())
        return;
    const std::string ann =
        testsupport::write_mini_corpus((work_dir() / "corpus_m").string(), 6, 5);
    const CliResult r = run_cli("bench-patches " + ann + " --method nope --iterations 1" +
                                " --positives 2 --negatives 2");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("sad1") != std::string::npos);
}

TEST_CASE("oversized sample requests cite the shortfall") {
    if (!cli_path())
        return;
    const std::string ann =
        testsupport::write_mini_corpus((work_dir() / "corpus_s").string(), 4, 6);
    const CliResult r = run_cli("bench-patches " + ann +
                                " --method sad1 --iterations 1 --positives 50 --negatives 2");
    CHECK(r.exit_code != 0);
    CHECK(r.err.find("positives") != std::string::npos);
}

TEST_CASE("bench-patches is byte-identical across reruns with one seed") {
    if (!cli_path())
        return;
    const std::string ann =
        testsupport::write_mini_corpus((work_dir() / "corpus_d").string(), 10, 7);
    const fs::path out1 = work_dir() / "run1.tsv";
    const fs::path out2 = work_dir() / "run2.tsv";
    const std::string common = "bench-patches " + ann +
                               " --method dtm --iterations 2 --positives 5 --negatives 5" +
                               " --seed 7 --canon 64x64 --out ";
    REQUIRE(run_cli(common + out1.string()).exit_code == 0);
    REQUIRE(run_cli(common + out2.string()).exit_code == 0);
    const std::string c1 = read_file(out1);
    CHECK(!c1.empty());
    CHECK(c1 == read_file(out2));
}

TEST_CASE("bench-sift rejects zero trials") {
    if (!cli_path())
        return;
    const fs::path img = work_dir() / "tex.pgm";
    dtm::save_pgm(testsupport::textured_image(64, 64, 4), img.string());
    const CliResult r = run_cli("bench-sift " + img.string() + " --trials 0");
    CHECK(r.exit_code != 0);
}

TEST_CASE("sift-match exports the correspondence table") {
    if (!cli_path())
        return;
    const fs::path img = work_dir() / "tex2.pgm";
    dtm::save_pgm(testsupport::textured_image(96, 96, 8), img.string());
    const CliResult r =
        run_cli("sift-match " + img.string() + " " + img.string() + " --method deformable");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("index_a\tindex_b\tx_a\ty_a\tx_b\ty_b\tsimilarity\tinlier\n", 0) == 0);
    // self-matching a textured image must produce at least a few inliers
    std::istringstream is(r.out);
    std::string line;
    int inliers = 0;
    std::getline(is, line);  // header
    while (std::getline(is, line))
        if (!line.empty() && line.back() == '1')
            ++inliers;
    CHECK(inliers >= 4);
}

}  // TEST_SUITE
