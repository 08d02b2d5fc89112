#include "doctest.h"

#include "critmkt/io.hpp"
#include "critmkt/trend.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace critmkt;

namespace {

std::string error_of(std::string_view text, CsvSchema schema = CsvSchema::detect) {
    try {
        (void)parse_price_csv(text, schema, "t.csv");
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("two-row long file gives one log-return") {
    const auto table = parse_price_csv("market,date,price\nES,2020-01-02,100\nES,2020-01-03,110\n");
    REQUIRE(table.markets.size() == 1);
    const auto& s = table.markets[0];
    CHECK(s.market == "ES");
    CHECK(s.prices == std::vector<double>{100.0, 110.0});
    const auto r = log_returns(s.prices);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(s.days[1] - s.days[0] == 1);
}

TEST_CASE("duplicate and decreasing dates are rejected with the date") {
    const auto dup = error_of("market,date,price\nES,2020-01-02,100\nES,2020-01-02,101\n");
    CHECK(dup.find("2020-01-02") != std::string::npos);
    CHECK(dup.find("t.csv:3:") != std::string::npos);
    const auto dec = error_of("date,A\n2020-01-03,1\n2020-01-02,2\n");
    CHECK(dec.find("2020-01-02") != std::string::npos);
}

TEST_CASE("bad prices and malformed rows name the line") {
    CHECK(error_of("market,date,price\nES,2020-01-02,100\nES,2020-01-03,-1\n").find("t.csv:3:") != std::string::npos);
    CHECK(error_of("market,date,price\nES,2020-01-02,0\n").find("t.csv:2:") != std::string::npos);
    CHECK(error_of("market,date,price\nES,2020-01-02,abc\n").find("t.csv:2:") != std::string::npos);
    CHECK(error_of("market,date,price\nES,2020-01-02\n").find("t.csv:2:") != std::string::npos);
    CHECK(error_of("market,date,price\nES,2020-13-02,1\n").find("t.csv:2:") != std::string::npos);
    CHECK(error_of("date,A,B\n1,2,3\n2,4\n").find("t.csv:3:") != std::string::npos);
    CHECK(error_of("") .find("empty") != std::string::npos);
    CHECK(error_of("market,date,price\n# nothing\n").find("no data rows") != std::string::npos);
}

TEST_CASE("wide file with ragged starts keeps per-market lengths") {
    const std::string text =
        "\xEF\xBB\xBF# comment\n"
        "date,A,B,C\n"
        "2021-03-01,10,,\n"
        "2021-03-02,11,20,\n"
        "2021-03-03,12,21,30\n"
        "2021-03-04,13,22,31\n";
    const auto table = parse_price_csv(text);
    REQUIRE(table.markets.size() == 3);
    CHECK(table.markets[0].size() == 4);
    CHECK(table.markets[1].size() == 3);
    CHECK(table.markets[2].size() == 2);
    CHECK(table.markets[2].dates.front() == "2021-03-03");
    CHECK(table.markets[1].prices.back() == 22.0);
}

TEST_CASE("gaps are recorded") {
    // 2021-03-05 is a Friday; the Monday after is not a gap, a missing Tuesday is.
    const auto table = parse_price_csv("date,A\n2021-03-05,1\n2021-03-08,2\n2021-03-10,3\n");
    CHECK(table.markets[0].gaps == 1);
    const auto ints = parse_price_csv("date,A\n1,1\n2,2\n5,3\n6,4\n");
    CHECK(ints.markets[0].gaps == 1);
}

TEST_CASE("schema forcing") {
    CHECK_THROWS_AS((void)parse_price_csv("date,A\n1,2\n", CsvSchema::long_format), InputError);
    CHECK_THROWS_AS((void)parse_price_csv("market,date,price\n1,2,3\n", CsvSchema::wide), InputError);
    CHECK(parse_price_csv("date,market\n1,2\n", CsvSchema::wide).markets.at(0).market == "market");
}

TEST_CASE("day parsing") {
    CHECK(parse_day("1970-01-01") == 0);
    CHECK(parse_day("2000-03-01") == 11017);
    CHECK(parse_day("42") == 42);
    CHECK_THROWS((void)parse_day("2021-02-30"));
    CHECK_THROWS((void)parse_day("x"));
}

TEST_CASE("shortest round-trip doubles") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1e300) == "1e+300");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-HUGE_VAL) == "-inf");
    for (const double v : {1.0 / 3.0, 0.28364816427662774, 6.02214076e23, 5e-324}) CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("writers carry provenance and the variance reader round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "critmkt_test_io";
    std::filesystem::remove_all(dir);
    Provenance prov;
    prov.command = "fit-kappa";
    prov.seed = 7;
    prov.input_hashes["x.csv"] = sha256_hex("x");
    prov.config_hash = sha256_hex("{}");
    prov.notes.emplace_back("kappa", "0.9");
    write_csv(dir / "sub" / "v.csv", prov, {"k", "var", "se"}, {{1, 0.5, 0.01}, {2, 0.25, 0.02}});

    std::ifstream in(dir / "sub" / "v.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    CHECK(text.rfind("# critmkt 0.1.0\n", 0) == 0);
    CHECK(text.find("# seed: 7\n") != std::string::npos);
    CHECK(text.find("# input x.csv sha256: " + sha256_hex("x")) != std::string::npos);
    CHECK(text.find("# kappa: 0.9\n") != std::string::npos);
    CHECK(text.find("k,var,se\n1,0.5,0.01\n2,0.25,0.02\n") != std::string::npos);

    const auto rows = load_variance_csv(dir / "sub" / "v.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].var == 0.25);
    CHECK(rows[1].se == 0.02);

    // The analyze variance table is read by column name.
    write_csv(dir / "fig8.csv", prov, {"k", "T", "var_tilde", "var_tilde_se", "var_phi"}, {{3, 8, 0.9, 0.05, 1.1}});
    const auto wide = load_variance_csv(dir / "fig8.csv");
    REQUIRE(wide.size() == 1);
    CHECK(wide[0].k == 3.0);
    CHECK(wide[0].var == 0.9);
    CHECK(wide[0].se == 0.05);
    {
        std::ofstream bad(dir / "bad.csv");
        bad << "k,se\n1,0.1\n";
    }
    CHECK_THROWS_WITH_AS((void)load_variance_csv(dir / "bad.csv"), doctest::Contains("bad.csv:1:"), InputError);

    write_json(dir / "r.json", prov, {{"x", 1}});
    std::ifstream jin(dir / "r.json");
    const auto j = nlohmann::json::parse(jin);
    CHECK(j["x"] == 1);
    CHECK(j["provenance"]["seed"] == 7);
    CHECK(j["provenance"]["version"] == "0.1.0");
    std::filesystem::remove_all(dir);
}
