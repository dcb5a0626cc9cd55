#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sst/trace.hpp"

using namespace sst;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sst_trace_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    out << content;
}

}  // namespace

TEST_CASE("csv load reads rows in order") {
    TempDir tmp;
    write_file(tmp.file("a.csv"),
               "timestamp_s,direction,size_bytes\n0.0,1,100\n0.5,-1,200\n");
    Trace t = load_trace(tmp.file("a.csv"), TraceFormat::Csv);
    REQUIRE(t.size() == 2);
    CHECK(t.packets[0].t == 0.0);
    CHECK(t.packets[0].dir == 1);
    CHECK(t.packets[0].size == 100);
    CHECK(t.packets[1].t == 0.5);
    CHECK(t.packets[1].dir == -1);
}

TEST_CASE("out-of-order rows are sorted on load") {
    TempDir tmp;
    write_file(tmp.file("b.csv"),
               "timestamp_s,direction,size_bytes\n0.5,1,10\n0.0,-1,20\n");
    Trace t = load_trace(tmp.file("b.csv"), TraceFormat::Csv);
    REQUIRE(t.size() == 2);
    CHECK(t.packets[0].t == 0.0);
    CHECK(t.packets[1].t == 0.5);
}

TEST_CASE("zero direction is a parse error naming the line") {
    TempDir tmp;
    write_file(tmp.file("c.csv"), "timestamp_s,direction,size_bytes\n0.5,0,100\n");
    try {
        load_trace(tmp.file("c.csv"), TraceFormat::Csv);
        FAIL("expected TraceError");
    } catch (const TraceError& e) {
        std::string msg = e.what();
        CHECK(msg.find(":2") != std::string::npos);
        CHECK(msg.find("direction") != std::string::npos);
    }
}

TEST_CASE("empty file and empty trace are rejected") {
    TempDir tmp;
    write_file(tmp.file("d.csv"), "");
    CHECK_THROWS_AS(load_trace(tmp.file("d.csv"), TraceFormat::Csv), TraceError);
    write_file(tmp.file("e.csv"), "timestamp_s,direction,size_bytes\n");
    CHECK_THROWS_AS(load_trace(tmp.file("e.csv"), TraceFormat::Csv), TraceError);

    Trace empty;
    CHECK_THROWS_AS(save_trace(empty, tmp.file("f.csv"), TraceFormat::Csv), TraceError);
}

TEST_CASE("round trip is bit-exact in both formats") {
    TempDir tmp;
    Trace t;
    t.packets = {{0.0, 1, 100, false},
                 {0.0065000000000000006, -1, 1448, false},
                 {1.0 / 3.0, 1, 52, false},
                 {12345.678901234567, -1, 9999999, false},
                 {1e-7, 1, 1, false}};
    finalize_trace(t);

    for (TraceFormat fmt : {TraceFormat::Csv, TraceFormat::Jsonl}) {
        std::string path = tmp.file(fmt == TraceFormat::Csv ? "rt.csv" : "rt.jsonl");
        save_trace(t, path, fmt);
        Trace back = load_trace(path, fmt);
        REQUIRE(back.size() == t.size());
        for (size_t i = 0; i < t.size(); ++i) {
            CHECK(back.packets[i].t == t.packets[i].t);  // exact, not approximate
            CHECK(back.packets[i].dir == t.packets[i].dir);
            CHECK(back.packets[i].size == t.packets[i].size);
        }
    }
}

TEST_CASE("csv timestamps carry at least 9 fractional digits") {
    TempDir tmp;
    Trace t;
    t.packets = {{0.5, 1, 10, false}};
    save_trace(t, tmp.file("digits.csv"), TraceFormat::Csv);
    std::ifstream in(tmp.file("digits.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "timestamp_s,direction,size_bytes");
    auto comma = row.find(',');
    auto dot = row.find('.');
    REQUIRE(dot < comma);
    CHECK(comma - dot - 1 >= 9);
}

TEST_CASE("three-packet trace saves to three rows plus header") {
    TempDir tmp;
    Trace t;
    t.packets = {{0.0, 1, 1, false}, {1.0, -1, 2, false}, {2.0, 1, 3, false}};
    save_trace(t, tmp.file("rows.csv"), TraceFormat::Csv);
    std::ifstream in(tmp.file("rows.csv"));
    int lines = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 4);
}

TEST_CASE("jsonl rejects malformed records") {
    TempDir tmp;
    write_file(tmp.file("bad.jsonl"), "{\"t\":0.0,\"d\":1}\n");
    CHECK_THROWS_AS(load_trace(tmp.file("bad.jsonl"), TraceFormat::Jsonl), TraceError);
}
