#include "momentray/corpus.hpp"
#include "momentray/report.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace momentray;

TEST_CASE("shortest number formatting") {
    CHECK(fmt(0.1) == "0.1");
    CHECK(fmt(3.0) == "3");
    CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(fmt(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(fmt(std::nan("")) == "nan");
}

TEST_CASE("FNV-1a reference values") {
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
}

TEST_CASE("CSV layout and quoting") {
    Table t({"name", "value"});
    t.comment("op test");
    t.prepend_comment("momentray x test");
    t.add_row({"a,b", "1"});
    t.add_row({"say \"hi\"", "2.5"});
    CHECK(t.csv() == "# momentray x test\n# op test\nname,value\n\"a,b\",1\n\"say \"\"hi\"\"\",2.5\n");
    CHECK_THROWS(t.add_row({"only one"}));
}

TEST_CASE("JSON rows keep numbers numeric") {
    Table t({"id", "x"});
    t.add_row({"d2-unit", "0.75"});
    t.add_row({"inf-case", "inf"});
    const auto j = t.json();
    CHECK(j["rows"][0]["x"].is_number());
    CHECK(j["rows"][0]["x"].get<double>() == 0.75);
    CHECK(j["rows"][0]["id"].is_string());
    CHECK(j["columns"].size() == 2);
}

TEST_CASE("manifest fields") {
    RunManifest m;
    m.tool_version = "1";
    m.command = "rwt";
    m.seed = 3;
    m.outputs.push_back({"out.csv", "00"});
    const auto j = m.json();
    CHECK(j["command"] == "rwt");
    CHECK(j["seed"] == 3);
    CHECK(j["outputs"].size() == 1);
}

TEST_CASE("corpus loads") {
    const auto entries = load_corpus();
    CHECK(entries.size() == 32);
    CHECK(entries.front().id == "d2-unit");
    CHECK(entries.front().E.measure() == doctest::Approx(1.0));
    for (const auto& e : entries) CHECK(e.E.dim() == e.d);
}

TEST_CASE("corpus version mismatch") {
    nlohmann::json j = {{"version", "0"}, {"entries", nlohmann::json::array()}};
    CHECK_THROWS_AS(parse_corpus(j), DomainError);
}

TEST_CASE("corpus rejects overlapping boxes") {
    const auto j = nlohmann::json::parse(R"([{"lo":[0,0],"hi":[1,1]},{"lo":[0.5,0.5],"hi":[2,2]}])");
    CHECK_THROWS_AS(box_union_from_json(j, 2), DomainError);
}
