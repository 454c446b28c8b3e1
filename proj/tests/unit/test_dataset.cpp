#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpa/dataset.hpp"

#include <cmath>

using namespace mpa;

namespace {

DataSpec spec() {
    return data_spec_from_json(nlohmann::json::parse(R"({
        "treatment": "Z", "outcome": "Y",
        "covariates": [
            {"name": "Age", "type": "categorical", "levels": ["<50", "50-64", "65+"]},
            {"name": "Ckd", "type": "binary", "partial": true},
            {"name": "Bmi", "type": "continuous", "partial": true}
        ]})"));
}

}  // namespace

TEST_CASE("csv round trip with missing cells") {
    const std::string text =
        "Y,Z,Age,Ckd,Bmi,ignored\n"
        "1,0,<50,1,22.5,x\n"
        "0,1,65+,NA,NA,y\n"
        "1,1,50-64,0,NA,z\n";
    const auto d = read_csv(text, spec());
    REQUIRE(d.n() == 3);
    CHECK(d.z() == std::vector<int>{0, 1, 1});
    CHECK(d.y() == std::vector<int>{1, 0, 1});
    CHECK(d.column(0)[1] == 2.0);
    CHECK(d.missing(1, 1));
    CHECK(d.column(2)[0] == 22.5);
    CHECK(d.partial() == std::vector<std::size_t>{1, 2});
    CHECK(d.pattern(0) == 3);
    CHECK(d.pattern(1) == 0);
    CHECK(d.pattern(2) == 1);
    CHECK(d.pattern_label(1) == "Ckd=1,Bmi=0");

    const auto again = read_csv(write_csv(d), spec());
    CHECK(write_csv(again) == write_csv(d));
    CHECK(write_csv(d).substr(0, 15) == "Z,Y,Age,Ckd,Bmi");
}

TEST_CASE("pattern id depends only on the missing mask") {
    const auto d = read_csv("Z,Y,Age,Ckd,Bmi\n0,0,<50,NA,1.5\n1,1,65+,NA,-3\n", spec());
    CHECK(d.pattern(0) == d.pattern(1));
    CHECK(d.pattern(0) == 2);
}

TEST_CASE("csv errors") {
    const auto s = spec();
    CHECK_THROWS_AS(read_csv("", s), DataError);
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd\n", s), DataError);                    // missing column
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\n2,0,<50,1,1\n", s), DataError);    // non-binary treatment
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\nNA,0,<50,1,1\n", s), DataError);   // missing treatment
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\n1,0,NA,1,1\n", s), DataError);     // NA in full column
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\n1,0,old,1,1\n", s), DataError);    // unknown level
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\n1,0,<50,1,abc\n", s), DataError);  // bad number
    CHECK_THROWS_AS(read_csv("Z,Y,Age,Ckd,Bmi\n1,0,<50,1\n", s), DataError);      // short row
    try {
        read_csv("Z,Y,Age,Ckd,Bmi\n1,0,<50,1,1\n1,0,<50,7,1\n", s);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("spec errors") {
    using nlohmann::json;
    CHECK_THROWS_AS(data_spec_from_json(json::parse(R"({"treatment":"Z","outcome":"Z","covariates":[]})")), DataError);
    CHECK_THROWS_AS(data_spec_from_json(json::parse(
                        R"({"treatment":"Z","outcome":"Y","covariates":[{"name":"A","type":"ordinal"}]})")),
                    DataError);
    CHECK_THROWS_AS(data_spec_from_json(json::parse(
                        R"({"treatment":"Z","outcome":"Y","covariates":[{"name":"A","type":"categorical","levels":["a"]}]})")),
                    DataError);
    CHECK_THROWS_AS(data_spec_from_json(json::parse(R"({"treatment":"Z"})")), DataError);
    const auto s = spec();
    CHECK(data_spec_from_json(to_json(s)) .covariates.size() == 3);
}

TEST_CASE("subset keeps order and repeats") {
    const auto d = read_csv("Z,Y,Age,Ckd,Bmi\n0,0,<50,NA,1\n1,1,65+,1,NA\n", spec());
    const auto s = d.subset({1, 1, 0});
    CHECK(s.n() == 3);
    CHECK(s.z() == std::vector<int>{1, 1, 0});
    CHECK(s.pattern(2) == 2);
}
