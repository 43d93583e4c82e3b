// End-to-end checks through the installed binary: exit codes, file
// outputs, and the documented error contract.

#include "repsim/activation_set.hpp"
#include "repsim/sim_matrix.hpp"
#include "support/helpers.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stderr_text;
};

RunResult run_cli(const std::string& args, const testutil::TempDir& scratch) {
    const auto err_file = scratch / "stderr.txt";
    const std::string command = std::string(REPSIM_CLI_PATH) + " " + args + " 2>" +
                                err_file.string() + " >/dev/null";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    result.stderr_text.assign(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
    return result;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli arch emits table-faithful descriptors") {
    testutil::TempDir dir;
    const auto out = dir / "out";
    const RunResult ok = run_cli("arch physnet3dcnn 10 --out " + out.string(), dir);
    REQUIRE(ok.exit_code == 0);

    std::ifstream in(out / "physnet3dcnn_depth10.json");
    const json doc = json::parse(in);
    std::vector<int> indices;
    for (const auto& pool : doc.at("pooling")) indices.push_back(pool.at("index").get<int>());
    CHECK(indices == std::vector<int>{1, 2, 3, 5, 7, 9});

    const RunResult tscan = run_cli("arch tscan 7 --out " + out.string(), dir);
    REQUIRE(tscan.exit_code == 0);
    std::ifstream tin(out / "tscan_depth07.json");
    const json tdoc = json::parse(tin);
    std::vector<int> tindices;
    for (const auto& pool : tdoc.at("pooling")) tindices.push_back(pool.at("index").get<int>());
    CHECK(tindices == std::vector<int>{1, 3});
}

TEST_CASE("cli arch rejects out-of-range depth with a usage error") {
    testutil::TempDir dir;
    const RunResult result = run_cli("arch physnet3dcnn 1 --out " + (dir / "o").string(), dir);
    CHECK(result.exit_code == 2);
    CHECK(result.stderr_text.find("\"usage\"") != std::string::npos);
}

TEST_CASE("cli self on a synthetic model writes csv/json/pgm with a unit diagonal") {
    testutil::TempDir dir;
    const auto data = dir / "data";
    const auto out = dir / "out";
    REQUIRE(run_cli("synth blocks --layers 8 --boundaries 4,8 --n 48 --p 8 --noise 0.02 "
                    "--seed 5 --out " + data.string(), dir)
                .exit_code == 0);
    const RunResult result =
        run_cli("self " + (data / "manifest.json").string() + " --estimator biased --out " +
                    out.string(), dir);
    REQUIRE(result.exit_code == 0);

    const auto csv = out / "self_synth-blocks-s5.csv";
    REQUIRE(std::filesystem::exists(csv));
    const repsim::SimilarityMatrix S = repsim::read_similarity_csv(csv);
    REQUIRE(S.values.rows() == 8);
    for (int i = 0; i < 8; ++i) {
        CHECK(S.values(i, i) == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(std::filesystem::exists(out / "self_synth-blocks-s5.meta.json"));
    CHECK(std::filesystem::exists(out / "self_synth-blocks-s5.pgm"));
}

TEST_CASE("cli reports corrupt manifests as error kind manifest with exit 2") {
    testutil::TempDir dir;
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{\"model_id\": \"x\"}";
    const RunResult result =
        run_cli("self " + bad.string() + " --out " + (dir / "out").string(), dir);
    CHECK(result.exit_code == 2);
    CHECK(result.stderr_text.find("\"kind\":\"manifest\"") != std::string::npos);
}

TEST_CASE("cli grid detects misaligned inputs") {
    testutil::TempDir dir;
    const auto a = dir / "a";
    const auto b = dir / "others" / "b";
    REQUIRE(run_cli("synth blocks --layers 3 --boundaries 3 --n 32 --p 4 --seed 1 --out " +
                        a.string(), dir)
                .exit_code == 0);
    REQUIRE(run_cli("synth blocks --layers 3 --boundaries 3 --n 24 --p 4 --seed 2 --out " +
                        b.string(), dir)
                .exit_code == 0);
    const RunResult result = run_cli("grid " + (a / "manifest.json").string() + " " +
                                         (dir / "others").string() + " --out " +
                                         (dir / "out").string(), dir);
    CHECK(result.exit_code == 2);
    CHECK(result.stderr_text.find("\"kind\":\"alignment\"") != std::string::npos);
}

TEST_CASE("cli grid names the gated depth and is byte-deterministic") {
    testutil::TempDir dir;
    const auto family = dir / "family";
    REQUIRE(run_cli("synth family --depths 2..8 --gate-depth 4 --n 128 --p 8 --noise 0.03 "
                    "--seed 9 --out " + family.string(), dir)
                .exit_code == 0);

    const std::string reference = (family / "d08" / "manifest.json").string();
    const auto out1 = dir / "run1";
    const auto out2 = dir / "run2";
    const std::string common = "grid " + reference + " " + family.string() +
                               " --estimator biased --tau 0.8 --min-coverage 1.0 --out ";
    REQUIRE(run_cli(common + out1.string(), dir).exit_code == 0);
    REQUIRE(run_cli(common + out2.string(), dir).exit_code == 0);

    std::ifstream rec_in(out1 / "recommendation.json");
    const json rec = json::parse(rec_in);
    CHECK(rec.at("recommended_depth").get<int>() == 4);

    // Every produced file must be byte-identical across the two runs.
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(out1)) {
        files.push_back(entry.path().filename());
    }
    REQUIRE_FALSE(files.empty());
    for (const auto& name : files) {
        CHECK(read_file(out1 / name) == read_file(out2 / name));
    }
}

TEST_CASE("cli blocks reports planted boundaries") {
    testutil::TempDir dir;
    const auto data = dir / "data";
    REQUIRE(run_cli("synth blocks --layers 9 --boundaries 3,6,9 --n 96 --p 8 --noise 0.03 "
                    "--seed 11 --out " + data.string(), dir)
                .exit_code == 0);
    REQUIRE(run_cli("blocks " + (data / "manifest.json").string() +
                        " --estimator biased --max-blocks 4 --penalty 0.05 --out " +
                        (dir / "out").string(), dir)
                .exit_code == 0);
    std::ifstream in(dir / "out" / "blocks.json");
    const json doc = json::parse(in);
    CHECK(doc.at("boundaries").get<std::vector<int>>() == std::vector<int>{3, 6, 9});
    CHECK(doc.at("redundancy").size() == 9);
}

TEST_CASE("cli coverage and heatmap round trip") {
    testutil::TempDir dir;
    const auto data = dir / "data";
    REQUIRE(run_cli("synth blocks --layers 4 --boundaries 2,4 --n 48 --p 6 --seed 3 --out " +
                        data.string(), dir)
                .exit_code == 0);
    const std::string manifest = (data / "manifest.json").string();
    REQUIRE(run_cli("coverage " + manifest + " " + manifest + " --tau 0.8 --out " +
                        (dir / "cov").string(), dir)
                .exit_code == 0);
    std::ifstream cov_in(dir / "cov" / "coverage.json");
    const json cov = json::parse(cov_in);
    CHECK(cov.at("coverage_fraction").get<double>() == doctest::Approx(1.0));

    REQUIRE(run_cli("self " + manifest + " --estimator biased --out " + (dir / "sim").string(),
                    dir)
                .exit_code == 0);
    const auto csv = dir / "sim" / "self_synth-blocks-s3.csv";
    REQUIRE(run_cli("heatmap " + csv.string() + " --out " + (dir / "h.pgm").string(), dir)
                .exit_code == 0);
    const std::string pgm = read_file(dir / "h.pgm");
    CHECK(pgm.substr(0, 2) == "P5");

    REQUIRE(run_cli("heatmap " + csv.string() + " --format svg --palette viridis --out " +
                        (dir / "h.svg").string(), dir)
                .exit_code == 0);
    CHECK(read_file(dir / "h.svg").find("<svg") == 0);
}

TEST_CASE("cli cross compares two models and honors kernel/minibatch flags") {
    testutil::TempDir dir;
    const auto a = dir / "a";
    const auto b = dir / "b";
    REQUIRE(run_cli("synth blocks --layers 3 --boundaries 3 --n 64 --p 6 --noise 0.05 "
                    "--seed 40 --out " + a.string(), dir)
                .exit_code == 0);
    REQUIRE(run_cli("synth blocks --layers 5 --boundaries 5 --n 64 --p 6 --noise 0.05 "
                    "--seed 40 --out " + b.string(), dir)
                .exit_code == 0);
    // Same seed/shape generator stream: both sets share the examples hash.
    const std::string pair =
        (a / "manifest.json").string() + " " + (b / "manifest.json").string();

    REQUIRE(run_cli("cross " + pair + " --estimator biased --out " + (dir / "o1").string(),
                    dir)
                .exit_code == 0);
    const auto csv = dir / "o1" / "cross_synth-blocks-s40__synth-blocks-s40.csv";
    REQUIRE(std::filesystem::exists(csv));
    CHECK(repsim::read_similarity_csv(csv).values.rows() == 3);
    CHECK(repsim::read_similarity_csv(csv).values.cols() == 5);

    CHECK(run_cli("cross " + pair + " --kernel rbf --sigma-frac 0.8 --out " +
                      (dir / "o2").string(), dir)
              .exit_code == 0);
    CHECK(run_cli("cross " + pair + " --minibatch 16 --out " + (dir / "o3").string(), dir)
              .exit_code == 0);

    // Minibatch demands the unbiased estimator.
    const RunResult bad = run_cli("cross " + pair + " --minibatch 16 --estimator biased "
                                      "--out " + (dir / "o4").string(), dir);
    CHECK(bad.exit_code == 2);
    CHECK(bad.stderr_text.find("\"kind\":\"argument\"") != std::string::npos);
}

TEST_CASE("cli recommend mirrors the grid recommendation") {
    testutil::TempDir dir;
    const auto family = dir / "family";
    REQUIRE(run_cli("synth family --depths 2..6 --gate-depth 3 --n 96 --p 8 --noise 0.03 "
                    "--seed 13 --out " + family.string(), dir)
                .exit_code == 0);
    const RunResult result = run_cli("recommend " + (family / "d06" / "manifest.json").string() +
                                         " " + family.string() +
                                         " --estimator biased --tau 0.8 --min-coverage 1.0 "
                                         "--out " + (dir / "rec").string(), dir);
    REQUIRE(result.exit_code == 0);
    std::ifstream in(dir / "rec" / "recommendation.json");
    const json rec = json::parse(in);
    CHECK(rec.at("recommended_depth").get<int>() == 3);
    CHECK(rec.at("per_depth").size() == 5);
    const std::string text = read_file(dir / "rec" / "recommendation.txt");
    CHECK(text.find("recommended depth: 3") != std::string::npos);
}

TEST_CASE("cli usage errors exit with 2") {
    testutil::TempDir dir;
    const RunResult unknown = run_cli("frobnicate", dir);
    CHECK(unknown.exit_code == 2);
    const RunResult missing = run_cli("self", dir);
    CHECK(missing.exit_code == 2);

    // Valid reference but an others directory without manifests.
    const auto data = dir / "ref";
    const auto empty = dir / "empty";
    std::filesystem::create_directories(empty);
    REQUIRE(run_cli("synth blocks --layers 2 --boundaries 2 --n 16 --p 3 --seed 8 --out " +
                        data.string(), dir)
                .exit_code == 0);
    const RunResult empty_others =
        run_cli("grid " + (data / "manifest.json").string() + " " + empty.string() +
                    " --out " + (dir / "o").string(), dir);
    CHECK(empty_others.exit_code == 2);
    CHECK(empty_others.stderr_text.find("\"kind\":\"usage\"") != std::string::npos);
}

TEST_CASE("cli grid degenerates cleanly to a single comparison") {
    testutil::TempDir dir;
    const auto ref = dir / "ref";
    const auto others = dir / "others" / "one";
    REQUIRE(run_cli("synth blocks --layers 4 --boundaries 2,4 --n 32 --p 4 --seed 30 --out " +
                        ref.string(), dir)
                .exit_code == 0);
    REQUIRE(run_cli("synth blocks --layers 4 --boundaries 2,4 --n 32 --p 4 --seed 30 --out " +
                        others.string(), dir)
                .exit_code == 0);
    const RunResult result = run_cli("grid " + (ref / "manifest.json").string() + " " +
                                         (dir / "others").string() + " --estimator biased "
                                         "--out " + (dir / "out").string(), dir);
    REQUIRE(result.exit_code == 0);
    int cells = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "out")) {
        if (entry.path().filename().string().rfind("grid_", 0) == 0 &&
            entry.path().extension() == ".csv") {
            ++cells;
        }
    }
    CHECK(cells == 1);
    std::ifstream in(dir / "out" / "recommendation.json");
    const json rec = json::parse(in);
    CHECK(rec.at("recommended_depth").get<int>() == 4);
}

TEST_CASE("cli self averages five per-fold manifests into one matrix") {
    testutil::TempDir dir;
    std::string manifest_args;
    for (int fold = 0; fold < 5; ++fold) {
        const auto fold_dir = dir / ("f" + std::to_string(fold));
        REQUIRE(run_cli("synth blocks --layers 4 --boundaries 2,4 --n 32 --p 4 --seed " +
                            std::to_string(20 + fold) + " --out " + fold_dir.string(), dir)
                    .exit_code == 0);
        // Rewrite fold/model ids so the manifests are folds of one model.
        const auto path = fold_dir / "manifest.json";
        std::ifstream in(path);
        json doc = json::parse(in);
        in.close();
        doc["model_id"] = "folded";
        doc["fold"] = fold;
        doc.erase("examples_hash");
        std::ofstream out(path);
        out << doc.dump(2);
        manifest_args += " " + path.string();
    }

    const RunResult result = run_cli("self" + manifest_args +
                                         " --average-folds --estimator biased --out " +
                                         (dir / "out").string(), dir);
    REQUIRE(result.exit_code == 0);
    std::ifstream meta_in(dir / "out" / "self_folded_avg.meta.json");
    const json meta = json::parse(meta_in);
    CHECK(meta.at("folds_averaged").get<int>() == 5);

    // Without the flag, multiple manifests are a usage error.
    const RunResult rejected = run_cli("self " + (dir / "f0" / "manifest.json").string() +
                                           " " + (dir / "f1" / "manifest.json").string() +
                                           " --out " + (dir / "out2").string(), dir);
    CHECK(rejected.exit_code == 2);
    CHECK(rejected.stderr_text.find("\"kind\":\"usage\"") != std::string::npos);
}
