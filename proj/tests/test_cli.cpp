#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "arnold/cli.hpp"
#include "arnold/json_io.hpp"

using namespace arnold;
namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv = {"arnold"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("arnold-cli-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

const std::string kData = ARNOLD_DATA_DIR;

}  // namespace

TEST_CASE("schedule writes a placement and scores it") {
    TempDir tmp;
    const auto out = tmp.file("placement.json");
    CHECK(run({"schedule", "--topology", kData + "/topology_small.json", "--job",
               kData + "/job_96gpu.json", "--profiles", kData + "/profiles.json", "--out",
               out}) == 0);
    auto placement = placement_from_json(read_file(out));
    CHECK(placement.rows == 6);
    CHECK(placement.cols == 2);
    CHECK(placement.rank_of_node.size() == 12);
}

TEST_CASE("schedule respects an explicit alpha override") {
    TempDir tmp;
    const auto out = tmp.file("placement.json");
    CHECK(run({"schedule", "--topology", kData + "/topology_small.json", "--job",
               kData + "/job_96gpu.json", "--alpha", "1.0", "--out", out}) == 0);
    CHECK(run({"schedule", "--topology", kData + "/topology_small.json", "--job",
               kData + "/job_96gpu.json", "--alpha", "1.5", "--out", out}) == 2);
}

TEST_CASE("schedule exits 2 on missing files and 1 on infeasible jobs") {
    TempDir tmp;
    CHECK(run({"schedule", "--topology", tmp.file("nope.json"), "--job",
               kData + "/job_96gpu.json", "--alpha", "0.5"}) == 2);

    // 96 GPUs = 12 nodes on a 2-node cluster.
    const auto tiny = tmp.file("tiny.json");
    write_file(tiny, "{\"name\":\"tiny\",\"minipods\":[{\"racks\":[{\"nodes\":2}]}]}\n");
    CHECK(run({"schedule", "--topology", tiny, "--job", kData + "/job_96gpu.json", "--alpha",
               "0.5"}) == 1);
}

TEST_CASE("the scheduling unit toggles PP-aligned vs DP-aligned placements") {
    TempDir tmp;
    const auto topo = tmp.file("two_pods.json");
    write_file(topo,
               "{\"name\":\"2x6\",\"minipods\":[{\"racks\":[{\"nodes\":6}]},"
               "{\"racks\":[{\"nodes\":6}]}]}\n");

    const auto rows_out = tmp.file("rows.json");
    CHECK(run({"schedule", "--topology", topo, "--job", kData + "/job_96gpu.json", "--alpha",
               "0.5", "--unit", "row", "--out", rows_out}) == 0);
    auto rows = placement_from_json(read_file(rows_out));
    for (int r = 0; r < rows.rows; ++r)  // every PP group inside one minipod
        CHECK(rows.minipod_at(r, 0) == rows.minipod_at(r, 1));

    const auto cols_out = tmp.file("cols.json");
    CHECK(run({"schedule", "--topology", topo, "--job", kData + "/job_96gpu.json", "--alpha",
               "0.5", "--unit", "col", "--out", cols_out}) == 0);
    auto cols = placement_from_json(read_file(cols_out));
    for (int c = 0; c < cols.cols; ++c)  // every DP group inside one minipod
        for (int r = 1; r < cols.rows; ++r)
            CHECK(cols.minipod_at(r, c) == cols.minipod_at(0, c));
}

TEST_CASE("profiles match reproduces the MoE affinity split") {
    TempDir tmp;
    const auto out = tmp.file("ignored");
    (void)out;
    CHECK(run({"profiles", "match", "--profiles", kData + "/profiles.json", "--gpu-type", "H800",
               "--r1", "0.99", "--r2", "94.0"}) == 0);
    CHECK(run({"profiles", "match", "--profiles", kData + "/profiles.json", "--gpu-type", "B200",
               "--r1", "1", "--r2", "1"}) == 2);
    CHECK(run({"profiles", "list", "--profiles", kData + "/profiles.json"}) == 0);
}

TEST_CASE("profiles add appends an entry") {
    TempDir tmp;
    const auto db = tmp.file("db.json");
    write_file(db, "[]\n");
    CHECK(run({"profiles", "add", "--profiles", db, "--gpu-type", "H800", "--tag", "test",
               "--r1", "1.0", "--r2", "2.0", "--j-dp", "1.0", "--j-pp", "3.0"}) == 0);
    auto parsed = profiles_from_json(read_file(db));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].tag == "test");
}

TEST_CASE("solve emits a solution dump") {
    TempDir tmp;
    const auto inst = tmp.file("instance.json");
    write_file(inst, R"({"group_count": 6, "group_size": 2,
                         "capacity_nodes": [6, 6, 6],
                         "alpha": 0.5, "beta": 0.5, "unit": "row"})");
    const auto out = tmp.file("solution.json");
    CHECK(run({"solve", "--instance", inst, "--out", out}) == 0);
    const auto dump = read_file(out);
    CHECK(dump.find("\"status\": \"optimal\"") != std::string::npos);
    CHECK(dump.find("\"objective\": 1.5") != std::string::npos);
}

TEST_CASE("benchmark with no algorithms still writes the header") {
    TempDir tmp;
    const auto out = tmp.file("bench.csv");
    CHECK(run({"benchmark", "--settings", kData + "/settings_benchmark.json", "--algorithm",
               "bestfit", "--alpha", "0.5", "--out", out}) == 0);
    const auto csv = read_file(out);
    CHECK(csv.find("setting,algorithm,alpha,score,latency_ms,status\n") == 0);
    CHECK(csv.find("small,bestfit") != std::string::npos);
}

TEST_CASE("simulate replays the bundled example trace") {
    TempDir tmp;
    const auto out = tmp.file("series.csv");
    const auto events = tmp.file("events.jsonl");
    CHECK(run({"simulate", "--trace", kData + "/example_trace.jsonl", "--topology",
               kData + "/topology_small.json", "--alpha", "0", "--out", out, "--events",
               events}) == 0);
    const auto csv = read_file(out);
    CHECK(csv.find("time,allocation_rate") == 0);
    const auto log = read_file(events);
    CHECK(log.find("\"kind\":\"lpj_arrive\"") != std::string::npos);
    CHECK(log.find("\"job\":\"lpj-0\"") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({"schedule"}) == 2);             // missing required options
    CHECK(run({"unknown-subcommand"}) == 2);
    CHECK(run({}) == 2);                       // a subcommand is required
    CHECK(run({"--help"}) == 0);
}
