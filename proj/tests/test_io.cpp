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

#include <filesystem>
#include <random>

#include "catbreed/config.hpp"
#include "catbreed/io.hpp"
#include "support.hpp"

using namespace catbreed;
using Catch::Matchers::ContainsSubstring;

namespace {

int line_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const IoError &e) {
        return e.line();
    }
    return -1;
}

std::string field_of(const std::string &text) {
    try {
        config::parse(text);
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("numbers print in shortest round-trip form") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        REQUIRE(io::parse_double(io::format_double(v), 1, "v") == v);
    }
    CHECK(io::format_double(0.25) == "0.25");
    CHECK_THROWS_AS(io::parse_double("1.5x", 3, "v"), IoError);
    CHECK(line_of([] { io::parse_double("", 7, "v"); }) == 7);
}

TEST_CASE("dataset round trip") {
    std::mt19937_64 rng(3);
    const DensityOperator rho = testing_support::random_density(FockCutoff(5), rng);
    const HomodyneDataset d = sample_homodyne_phases(rho, 12, 500, rng);
    CHECK(io::dataset_from_csv(io::dataset_to_csv(d)).samples == d.samples);

    const auto dir = std::filesystem::temp_directory_path() / "catbreed_io_test";
    std::filesystem::create_directories(dir);
    io::write_dataset(dir / "d.csv", d);
    const HomodyneDataset back = io::read_dataset(dir / "d.csv");
    CHECK(back.samples == d.samples);
    CHECK(back.source == (dir / "d.csv").string());
    CHECK_FALSE(std::filesystem::exists(dir / "d.csv.tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("malformed datasets report the line") {
    CHECK(line_of([] { io::dataset_from_csv("t,x\n0,1\n"); }) == 1);
    CHECK(line_of([] { io::dataset_from_csv("theta,x\n0,1\n0.5\n"); }) == 3);
    CHECK(line_of([] { io::dataset_from_csv("theta,x\n0,1\n\n0.5,abc\n"); }) == 4);
    CHECK(line_of([] { io::dataset_from_csv("theta,x\n0,nan\n"); }) == 2);
    CHECK_THROWS_AS(io::dataset_from_csv(""), IoError);
    CHECK(io::dataset_from_csv("theta,x\n").empty());
    // Phases outside [0, pi) are folded on input.
    CHECK(io::dataset_from_csv("theta,x\n4.0,1.0\n").samples.front().x == -1.0);
}

TEST_CASE("density matrices round trip exactly") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        const DensityOperator rho = testing_support::random_density(FockCutoff(3 + i % 10), rng).normalized();
        const DensityOperator back = io::density_from_csv(io::density_to_csv(rho));
        REQUIRE(back.dimension() == rho.dimension());
        const double tr = rho.trace();
        // Reading renormalizes, which is the identity when the trace is already one to rounding.
        CHECK((back.matrix() - rho.matrix() / tr).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("invalid density files are rejected") {
    CHECK_THROWS_AS(io::density_from_csv(""), IoError);
    CHECK(line_of([] { io::density_from_csv("a,b\n"); }) == 1);
    CHECK(line_of([] { io::density_from_csv("re_0,im_0,re_1,im_1,re_2,im_2\n1,0,0,0,0,0\n0,0\n"); }) == 3);
    // Two-dimensional matrices are too small.
    CHECK_THROWS_AS(io::density_from_csv("re_0,im_0,re_1,im_1\n1,0,0,0\n0,0,0,0\n"), IoError);
    // Not positive.
    const std::string negative = "re_0,im_0,re_1,im_1,re_2,im_2\n1.5,0,0,0,0,0\n0,0,-0.5,0,0,0\n0,0,0,0,0,0\n";
    CHECK_THROWS_WITH(io::density_from_csv(negative), ContainsSubstring("not a valid state"));
    // Not Hermitian.
    const std::string skew = "re_0,im_0,re_1,im_1,re_2,im_2\n0.5,0,0.1,0,0,0\n0,0,0.5,0,0,0\n0,0,0,0,0,0\n";
    CHECK_THROWS_AS(io::density_from_csv(skew), IoError);
    // Missing rows.
    CHECK_THROWS_AS(io::density_from_csv("re_0,im_0,re_1,im_1,re_2,im_2\n1,0,0,0,0,0\n"), IoError);
}

TEST_CASE("curve, Wigner and key-value round trips") {
    const std::vector<CurveRow> rows = {{1, 18.75, 0.7, 0.6}, {2, 37.1, 0.69, 0.59}};
    const auto back = io::curve_from_csv(io::curve_to_csv(rows));
    REQUIRE(back.size() == 2);
    CHECK(back[1].n_max == 2);
    CHECK(back[1].rate_hz == 37.1);
    CHECK(back[0].fidelity_after_readout == 0.6);
    CHECK(line_of([] { io::curve_from_csv("n_max,rate_hz,fidelity_at_creation,fidelity_after_readout\n1,2\n"); }) == 2);

    const std::vector<double> xs = {-1.0, 0.0, 1.0}, ps = {-0.5, 0.5};
    RealMatrix w(3, 2);
    w << 0.1, -0.2, 0.3, 1.0 / 3.0, -0.05, 0.0;
    const auto pts = io::wigner_from_csv(io::wigner_to_csv(xs, ps, w));
    REQUIRE(pts.size() == 6);
    CHECK(pts[3].x == 0.0);
    CHECK(pts[3].p == 0.5);
    CHECK(pts[3].w == 1.0 / 3.0);
    CHECK(line_of([] { io::wigner_from_csv("x,p\n"); }) == 1);

    io::KeyValueText kv;
    kv.add("a", 0.1).add("b", 3).add("c", true).add("d", "text with spaces");
    const auto parsed = io::KeyValueText::parse(kv.str());
    CHECK(parsed.at("a") == "0.1");
    CHECK(parsed.at("b") == "3");
    CHECK(parsed.at("c") == "true");
    CHECK(parsed.at("d") == "text with spaces");
    CHECK(line_of([] { io::KeyValueText::parse("# note\na = 1\nbroken\n"); }) == 3);
}

TEST_CASE("event log round trip") {
    const std::vector<TimelineEvent> events = {
        {EventKind::herald, 10, 0, -1},       {EventKind::trap, 10, 0, -1},  {EventKind::hold, 40, 0, 30},
        {EventKind::breed, 40, 0, 30},        {EventKind::condition_pass, 40, 0, 30},
        {EventKind::phase_trigger, 41, 0, 30}, {EventKind::readout, 55, 0, 30}, {EventKind::dead_time, 56, 1, -1},
        {EventKind::condition_fail, 90, 1, 4}};
    CHECK(io::events_from_jsonl(io::events_to_jsonl(events)) == events);
    CHECK(line_of([] { io::events_from_jsonl("{\"pulse\":1,\"kind\":\"herald\",\"attempt\":0,\"trips\":-1}\n{oops\n"); }) ==
          2);
    CHECK(line_of([] { io::events_from_jsonl("{\"pulse\":1,\"kind\":\"boom\",\"attempt\":0,\"trips\":-1}\n"); }) == 1);
}

TEST_CASE("configuration text round trip") {
    ProtocolConfig c;
    c.epsilon = 0.125;
    c.n_max = 42;
    c.per_trip_transmission = 0.987654321;
    c.rng_seed = 123456789012345ULL;
    c.target.squeezing_db = 2.5;
    const std::string text = config::to_text(c);
    const ProtocolConfig back = config::parse(text);
    CHECK(config::to_text(back) == text);
    CHECK(back.epsilon == 0.125);
    CHECK(back.n_max == 42);
    CHECK(back.per_trip_transmission == 0.987654321);
    CHECK(back.rng_seed == 123456789012345ULL);
    CHECK(back.target.squeezing_db == 2.5);
    // Empty text leaves the base untouched.
    CHECK(config::to_text(config::parse("")) == config::to_text(ProtocolConfig{}));
}

TEST_CASE("aggregate loss is converted per round trip") {
    const ProtocolConfig c = config::parse("[storage]\ntotal_loss = 0.2\nloss_trips = 10\n");
    CHECK(std::pow(c.per_trip_transmission, 10) == Catch::Approx(0.8).epsilon(1e-14));
    CHECK(field_of("[storage]\ntotal_loss = 0.2\nper_trip_transmission = 0.99\n") == "storage.total_loss");
}

TEST_CASE("configuration errors name the field and line") {
    CHECK(field_of("[source]\nf_rep = 76e6\nbogus = 1\n") == "source.bogus");
    CHECK_THROWS_WITH(config::parse("[source]\nf_rep = 76e6\nbogus = 1\n"), ContainsSubstring("line 3"));
    CHECK(field_of("[conditioning]\nepsilon = abc\n") == "conditioning.epsilon");
    CHECK_THROWS_WITH(config::parse("\n[conditioning]\nepsilon = abc\n"), ContainsSubstring("line 3"));
    CHECK(field_of("[nowhere]\nx = 1\n") == "nowhere");
    CHECK(field_of("[storage]\nn_max = 2.5\n") == "storage.n_max");
    // Values are range-checked after parsing.
    CHECK(field_of("[conditioning]\nepsilon = 0\n") == "epsilon");
    CHECK(field_of("[storage]\nn_min = 10\nn_max = 5\n") == "n_max");
    // Syntax errors carry the line.
    CHECK(line_of([] { config::parse("[source]\nf_rep = 1\n[broken\n"); }) == 3);
}
