#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rtp/core/errors.hpp"
#include "rtp/io/formats.hpp"
#include "rtp/io/manifest.hpp"

using namespace rtp;
using namespace rtp::io;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("rtp_io_" + name);
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("reals round trip through text") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(gen) * std::pow(10.0, i % 40 - 20);
        REQUIRE(std::stod(format_real(v)) == v);
    }
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(2.0) == "2");
}

TEST_CASE("trajectory CSV round trip is exact") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<DensityField> slices;
    for (int k = 0; k < 4; ++k) {
        DensityField f(6);
        for (Spin s : kSpins) {
            for (double& v : f.layer_values(s)) v = u(gen);
        }
        slices.push_back(f);
    }
    const DensityTrajectory traj(1.0 / 3.0, slices);
    std::stringstream buf;
    write_trajectory_csv(buf, traj);
    const auto back = read_trajectory_csv(buf);
    CHECK(back.slices() == traj.slices());
    CHECK(back.dt() == doctest::Approx(traj.dt()).epsilon(1e-15));
}

TEST_CASE("snapshot and series CSV layout") {
    LatticeConfiguration cfg(2);
    cfg.add(1, Spin::minus, 3);
    std::stringstream snap;
    write_snapshot_csv(snap, 0.5, cfg);
    CHECK(snap.str() == "t,x_index,sigma,count\n0.5,0,1,0\n0.5,0,-1,0\n0.5,1,1,0\n0.5,1,-1,3\n");
    std::stringstream series;
    write_series_csv(series, {0.0, 1.0}, {0.25, -1.0});
    CHECK(series.str() == "t,m\n0,0.25\n1,-1\n");
    CHECK_THROWS_AS(write_series_csv(series, {0.0}, {}), ConfigurationError);
}

TEST_CASE("malformed CSV input is rejected") {
    auto read = [](const std::string& text) {
        std::stringstream in(text);
        return read_trajectory_csv(in);
    };
    CHECK_THROWS_AS(read(""), ConfigurationError);
    CHECK_THROWS_AS(read("t,x,sigma,value\n0,0,1,1\n"), ConfigurationError);
    CHECK_THROWS_AS(read("t,x_index,sigma,value\n0,0,1,1\n"), ConfigurationError);  // missing sigma = -1
    CHECK_THROWS_AS(read("t,x_index,sigma,value\n0,0,2,1\n0,0,-1,1\n"), ConfigurationError);
    CHECK_THROWS_AS(read("t,x_index,sigma,value\n0,0,1,abc\n0,0,-1,1\n"), ConfigurationError);
    CHECK_THROWS_AS(read("t,x_index,sigma,value\n0.5,0,1,1\n0.5,0,-1,1\n"), ConfigurationError);
    CHECK_THROWS_AS(read("t,x_index,sigma,value\n0,0,1,1\n0,0,-1,1\n0.1,0,1,1\n0.1,0,-1,1\n0.3,0,1,1\n0.3,0,-1,1\n"),
                    ConfigurationError);
    CHECK(read("t,x_index,sigma,value\n0,0,1,1\n0,0,-1,2\n").front()(0, Spin::minus) == 2.0);
}

TEST_CASE("density CSV in both layouts") {
    const auto plain = temp_file("plain.csv", "x_index,sigma,value\n0,1,0.5\n0,-1,0.25\n1,1,1\n1,-1,2\n");
    const auto field = read_density_csv(plain);
    CHECK(field.grid_size() == 2);
    CHECK(field(1, Spin::minus) == 2.0);
    const auto timed = temp_file("timed.csv", "t,x_index,sigma,value\n0,0,1,3\n0,0,-1,4\n1,0,1,5\n1,0,-1,6\n");
    CHECK(read_density_csv(timed)(0, Spin::plus) == 3.0);
    CHECK_THROWS_AS(read_density_csv("/nonexistent/file.csv"), ConfigurationError);
}

TEST_CASE("named profiles") {
    CHECK(is_named_profile("uniform(1,2)"));
    CHECK(is_named_profile(" sine(1, 0.5, -1)"));
    CHECK_FALSE(is_named_profile("data.csv"));
    const auto u = parse_profile("uniform(1.5, 0.5)");
    CHECK(u(0.3, Spin::plus) == 1.5);
    CHECK(u(0.3, Spin::minus) == 0.5);
    const auto s = parse_profile("sine(1, 0.5, -1)");
    CHECK(s(0.25, Spin::minus) == doctest::Approx(1.5));
    CHECK(s(0.25, Spin::plus) == 1.0);
    CHECK(parse_profile("sine(1,0.5,+1)")(0.75, Spin::plus) == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_profile("uniform(1)"), ConfigurationError);
    CHECK_THROWS_AS(parse_profile("uniform(-1,1)"), ConfigurationError);
    CHECK_THROWS_AS(parse_profile("sine(0.2,0.5,+1)"), ConfigurationError);
    CHECK_THROWS_AS(parse_profile("sine(1,0.5,0)"), ConfigurationError);
    CHECK_THROWS_AS(parse_profile("gauss(1)"), ConfigurationError);
}

TEST_CASE("JSON arguments inline or from a file") {
    CHECK(load_json_argument(R"({"kind": "constant"})").at("kind") == "constant");
    const auto path = temp_file("rate.json", R"({"kind": "curie_weiss", "beta": 2})");
    CHECK(load_json_argument(path.string()).at("beta") == 2);
    CHECK_THROWS_AS(load_json_argument("{not json"), ConfigurationError);
    CHECK_THROWS_AS(load_json_argument("/nonexistent.json"), ConfigurationError);
}

TEST_CASE("SHA-256 and manifests") {
    const auto abc = temp_file("abc.txt", "abc");
    CHECK(sha256_file(abc) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto empty = temp_file("empty.txt", "");
    CHECK(sha256_file(empty) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    RunManifest m;
    m.command = "simulate";
    m.spec = {{"n_sites", 4}};
    m.seeds = {7};
    m.tool_version = "test";
    m.started_at = utc_timestamp();
    m.outputs = {abc.filename()};
    const auto out = std::filesystem::temp_directory_path() / "rtp_io_manifest.json";
    m.write(out, abc.parent_path());
    std::ifstream in(out);
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc.at("outputs").at(0).at("sha256") == sha256_file(abc));
    CHECK(doc.at("outputs").at(0).at("bytes") == 3);
    CHECK(doc.at("seeds").at(0) == 7);
    CHECK(m.started_at.size() == 20);
}
