#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>

#include "kslab/textio.hpp"

using namespace kslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path p = fs::temp_directory_path() / "kslab_textio_test";
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("doubles print shortest and round-trip") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(-2.5) == "-2.5");
    CHECK(fmt_double(0.0) == "0");
    CHECK(fmt_double(1e-05) == "1e-05");
    CHECK(fmt_double(1e300) == "1e+300");
    CHECK(fmt_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(fmt_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(fmt_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

    for (double x : {0.1, 1.0 / 3.0, 6.5e-9, -123456.789, 2e-308, 1.7976931348623157e308}) {
        const std::string s = fmt_double(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(fmt_bool(true) == "true");
    CHECK(fmt_bool(false) == "false");
}

TEST_CASE("key=value documents keep insertion order") {
    KeyValueDoc doc;
    doc.add("zeta", 1);
    doc.add("alpha", 2.5);
    doc.add("flag", true);
    doc.add("name", "bump");
    doc.add("count", 40L);
    CHECK(doc.str() == "zeta=1\nalpha=2.5\nflag=true\nname=bump\ncount=40\n");
    REQUIRE(doc.rows().size() == 5);
    CHECK(doc.rows()[0].first == "zeta");
    CHECK(doc.rows()[3].second == "bump");
}

TEST_CASE("documents and csv land on disk byte for byte") {
    const fs::path dir = scratch_dir();

    KeyValueDoc doc;
    doc.add("a", 1);
    doc.add("b", "x");
    const fs::path rp = dir / "nested" / "report.txt";
    doc.write(rp);
    CHECK(read_text_file(rp) == "a=1\nb=x\n");

    const fs::path cp = dir / "t.csv";
    write_csv(cp, {"r", "u"}, {{0.5, 1.25}, {1.0, 2.0}});
    CHECK(read_text_file(cp) == "r,u\n0.5,1.25\n1,2\n");

    CHECK_THROWS_AS(write_csv(cp, {"r", "u"}, {{0.5}}), std::runtime_error);
    CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), std::runtime_error);

    const fs::path tp = dir / "plain.txt";
    write_text_file(tp, "hello\n");
    CHECK(read_text_file(tp) == "hello\n");

    fs::remove_all(dir);
}
