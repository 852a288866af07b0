// Copyright 2026 The catbreed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "catbreed/cli.hpp"

using namespace catbreed;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

struct Scratch {
    fs::path root;
    Scratch() {
        root = fs::temp_directory_path() / ("catbreed_cli_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Scratch() { fs::remove_all(root); }
    std::string operator/(const std::string &name) const { return (root / name).string(); }
};

const Scratch &scratch() {
    static const Scratch s;
    return s;
}

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "catbreed");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> read_kv(const std::string &path) {
    return io::KeyValueText::parse(io::read_file(path));
}

double value(const std::map<std::string, std::string> &kv, const std::string &key) {
    return io::parse_double(kv.at(key), 0, key);
}

int manifests_in(const fs::path &dir) {
    int n = 0;
    for (const auto &e : fs::directory_iterator(dir)) {
        n += e.path().filename() == "manifest.json";
    }
    return n;
}

}  // namespace

TEST_CASE("help, version and usage errors") {
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"breed", "--help"}).code == cli::kOk);
    CHECK(run({"--version"}).code == cli::kOk);
    CHECK(run({}).code == cli::kInputError);
    CHECK(run({"transmogrify"}).code == cli::kInputError);
    CHECK(run({"breed", "--no-such-flag"}).code == cli::kInputError);
}

TEST_CASE("breed writes the heralded state and its summary") {
    const std::string dir = scratch() / "breed";
    const Run r = run({"breed", "-o", dir});
    REQUIRE(r.code == cli::kOk);
    const auto kv = read_kv(dir + "/summary.txt");
    ProtocolConfig cfg;
    CHECK(value(kv, "herald_probability") == conditioning_probability(cfg));
    CHECK(value(kv, "pipeline_fidelity_at_creation") > 0.60);
    CHECK(value(kv, "pipeline_fidelity_after_readout") > 0.51);
    const DensityOperator rho = io::read_density(dir + "/rho.csv");
    CHECK(rho.check().ok());
    CHECK(fs::exists(dir + "/rho_pipeline_after_readout.csv"));
    CHECK(fs::exists(dir + "/config.ini"));
    CHECK(manifests_in(dir) == 1);
    const auto manifest = nlohmann::json::parse(io::read_file(dir + "/manifest.json"));
    CHECK(manifest.at("command") == "breed");
    CHECK(manifest.at("seed") == cfg.rng_seed);
    CHECK(manifest.at("artifacts").size() >= 5);
    // The recorded configuration reproduces the run.
    CHECK(config::to_text(config::load(dir + "/config.ini")) == config::to_text(cfg));
}

TEST_CASE("near-ideal breeding reaches the target") {
    const std::string dir = scratch() / "breed_ideal";
    REQUIRE(run({"breed", "-o", dir, "--no-pipeline", "--photon-fidelity", "1", "--epsilon", "0.001"}).code == cli::kOk);
    CHECK(value(read_kv(dir + "/summary.txt"), "fidelity_to_target") >= 0.985);
}

TEST_CASE("invalid configuration is an input error") {
    CHECK(run({"breed", "-o", scratch() / "bad1", "--epsilon", "0"}).code == cli::kInputError);
    CHECK(run({"breed", "-o", scratch() / "bad2", "--n-min", "9", "--n-max", "3"}).code == cli::kInputError);
    const std::string cfg = scratch() / "bad.ini";
    io::atomic_write(cfg, "[source]\nf_rep = 76e6\ncolour = blue\n");
    const Run r = run({"breed", "-o", scratch() / "bad3", "-c", cfg});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("source.colour") != std::string::npos);
    CHECK(run({"breed", "-o", scratch() / "bad4", "-c", scratch() / "missing.ini"}).code == cli::kInputError);
    // Flags override the file.
    io::atomic_write(cfg, "[conditioning]\nepsilon = 0.2\n");
    const std::string dir = scratch() / "override";
    REQUIRE(run({"breed", "-o", dir, "--no-pipeline", "-c", cfg, "--epsilon", "0.25"}).code == cli::kOk);
    CHECK(config::load(dir + "/config.ini").epsilon == 0.25);
}

TEST_CASE("curve rows and list parsing") {
    CHECK(run({"curve", "-o", scratch() / "c0", "--n-max-list", ""}).code == cli::kInputError);
    CHECK(run({"curve", "-o", scratch() / "c0", "--n-max-list", "3:1"}).code == cli::kInputError);
    const std::string one = scratch() / "c1";
    REQUIRE(run({"curve", "-o", one, "--n-max-list", "7"}).code == cli::kOk);
    CHECK(io::curve_from_csv(io::read_file(one + "/curve.csv")).size() == 1);
    const std::string many = scratch() / "c2";
    REQUIRE(run({"curve", "-o", many, "--n-max-list", "1:4,10"}).code == cli::kOk);
    const auto rows = io::curve_from_csv(io::read_file(many + "/curve.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows.back().n_max == 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].rate_hz > rows[i - 1].rate_hz);
        CHECK(rows[i].fidelity_after_readout < rows[i].fidelity_at_creation);
    }
}

TEST_CASE("timeline runs are reproducible byte for byte") {
    CHECK(run({"simulate", "-o", scratch() / "s0", "--duration", "0"}).code == cli::kInputError);
    const std::string a = scratch() / "sa", b = scratch() / "sb";
    REQUIRE(run({"simulate", "-o", a, "--duration", "0.005"}).code == cli::kOk);
    REQUIRE(run({"simulate", "-o", b, "--duration", "0.005"}).code == cli::kOk);
    for (const char *f : {"stats.txt", "events.jsonl", "storage_histogram.csv", "rate_check.txt"}) {
        CHECK(io::read_file(a + "/" + f) == io::read_file(b + "/" + f));
    }
    CHECK_FALSE(io::events_from_jsonl(io::read_file(a + "/events.jsonl")).empty());
    const std::string c = scratch() / "sc";
    REQUIRE(run({"simulate", "-o", c, "--duration", "0.005", "--seed", "7"}).code == cli::kOk);
    CHECK(io::read_file(a + "/events.jsonl") != io::read_file(c + "/events.jsonl"));
}

TEST_CASE("sampling and reconstruction from files") {
    const std::string dir = scratch() / "sample";
    REQUIRE(run({"sample", "-o", dir, "-n", "4000", "--stage", "measured"}).code == cli::kOk);
    const HomodyneDataset d = io::read_dataset(dir + "/dataset.csv");
    CHECK(d.size() == 4000);
    const std::string tomo = scratch() / "tomo";
    REQUIRE(run({"tomography", dir + "/dataset.csv", "-o", tomo, "--truth", dir + "/state.csv",
                 "--efficiency", "detection", "--reconstruction-cutoff", "8"})
                .code == cli::kOk);
    const auto meta = read_kv(tomo + "/rho_hat.meta");
    CHECK(value(meta, "fidelity_to_truth") > 0.9);
    CHECK(meta.at("converged") == "true");
    CHECK(io::read_density(tomo + "/rho_hat.csv").dimension() == 9);
    CHECK(run({"sample", "-o", scratch() / "s_bad", "--stage", "later"}).code == cli::kInputError);
}

TEST_CASE("tomography error paths") {
    const std::string empty = scratch() / "empty.csv";
    io::atomic_write(empty, "theta,x\n");
    CHECK(run({"tomography", empty, "-o", scratch() / "t0"}).code == cli::kInputError);
    const std::string single = scratch() / "single.csv";
    io::atomic_write(single, "theta,x\n0,0.1\n");
    CHECK(run({"tomography", single, "-o", scratch() / "t1"}).code == cli::kNumericalError);
    CHECK(run({"tomography", scratch() / "absent.csv", "-o", scratch() / "t2"}).code == cli::kInputError);
    const std::string garbled = scratch() / "garbled.csv";
    io::atomic_write(garbled, "theta,x\n0,0.1\n0.2,zz\n");
    const Run g = run({"tomography", garbled, "-o", scratch() / "t3"});
    CHECK(g.code == cli::kInputError);
    CHECK(g.err.find("line 3") != std::string::npos);
    CHECK(run({"tomography", single, "-o", scratch() / "t4", "--bootstrap", "10"}).code == cli::kInputError);
    CHECK(run({"tomography", single, "-o", scratch() / "t5", "--bootstrap", "60", "--level", "1.5"}).code ==
          cli::kInputError);
}

TEST_CASE("Wigner grids of a state file") {
    const std::string vac = scratch() / "vac.csv";
    io::write_density(vac, fock_state(0, FockCutoff(6)).density());
    const std::string dir = scratch() / "w_vac";
    REQUIRE(run({"wigner", "-o", dir, "--state", vac, "--grid", "-2:2:21"}).code == cli::kOk);
    for (const char *panel : {"none", "storage", "detection", "both"}) {
        const auto pts = io::wigner_from_csv(io::read_file(dir + "/wigner_" + panel + ".csv"));
        REQUIRE(pts.size() == 21 * 21);
        const auto top = std::max_element(pts.begin(), pts.end(), [](auto &a, auto &b) { return a.w < b.w; });
        CHECK_THAT(top->x, WithinAbs(0.0, 1e-12));
        CHECK_THAT(top->p, WithinAbs(0.0, 1e-12));
        CHECK_THAT(top->w, WithinAbs(1.0 / std::numbers::pi, 1e-12));
    }
    // Rerunning with fewer panels removes the stale grids.
    REQUIRE(run({"wigner", "-o", dir, "--state", vac, "--grid", "-2:2:5", "--corrections", "both"}).code == cli::kOk);
    CHECK_FALSE(fs::exists(dir + "/wigner_none.csv"));
    CHECK(fs::exists(dir + "/wigner_both.csv"));
    CHECK(manifests_in(dir) == 1);
    CHECK(run({"wigner", "-o", dir, "--state", vac, "--corrections", "sideways"}).code == cli::kInputError);
    CHECK(run({"wigner", "-o", dir, "--state", vac, "--grid", "1:0:5"}).code == cli::kInputError);
}

TEST_CASE("fully corrected Wigner of the ideal bred state") {
    const FockCutoff c(20);
    const DensityOperator photon = fock_state(1, c).density();
    const DensityOperator bred = breed(photon, photon, AcceptanceWindow(0.001)).state;
    const std::string file = scratch() / "ideal.csv";
    io::write_density(file, bred);
    const std::string dir = scratch() / "w_ideal";
    REQUIRE(run({"wigner", "-o", dir, "--state", file, "--corrections", "both", "--grid", "-3:3:31"}).code ==
            cli::kOk);
    const DensityOperator target = target_cat(TargetCatSpec{}, c).density();
    double to_state = 0.0, to_target = 0.0;
    for (const auto &pt : io::wigner_from_csv(io::read_file(dir + "/wigner_both.csv"))) {
        to_state = std::max(to_state, std::abs(pt.w - wigner(bred, pt.x, pt.p)));
        to_target = std::max(to_target, std::abs(pt.w - wigner(target, pt.x, pt.p)));
    }
    // Both corrections undo every loss stage, so the panel is the supplied state itself.
    CHECK(to_state < 1e-12);
    // The ideal bred state is 99% faithful to the target; its Wigner function differs by a few
    // hundredths at the peak, not by less than 0.01.
    INFO("sup-norm distance to the target " << to_target);
    CHECK(to_target < 0.03);
}

TEST_CASE("default output root comes from the environment") {
    const std::string root = scratch() / "env_root";
    ::setenv(cli::kOutputRootEnv, root.c_str(), 1);
    const Run r = run({"curve", "--n-max-list", "5"});
    ::unsetenv(cli::kOutputRootEnv);
    REQUIRE(r.code == cli::kOk);
    CHECK(fs::exists(root + "/curve/curve.csv"));
    CHECK(manifests_in(root + "/curve") == 1);
}
