#include "caresim/csv.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST(CsvSplit, FieldsAndEmptyCells) {
    auto f = caresim::csv::split_line("a,b,c");
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[0], "a");
    EXPECT_EQ(f[2], "c");

    f = caresim::csv::split_line(",x,");
    ASSERT_EQ(f.size(), 3u);
    EXPECT_EQ(f[0], "");
    EXPECT_EQ(f[1], "x");
    EXPECT_EQ(f[2], "");

    // a lone separator still yields two (empty) fields
    f = caresim::csv::split_line(",");
    EXPECT_EQ(f.size(), 2u);
}

TEST(CsvSplit, StripsCarriageReturn) {
    auto f = caresim::csv::split_line("a,b\r");
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[1], "b");
}

TEST(CsvFormatReal, SixSignificantDigits) {
    EXPECT_EQ(caresim::csv::format_real(0.0), "0");
    EXPECT_EQ(caresim::csv::format_real(0.25), "0.25");
    EXPECT_EQ(caresim::csv::format_real(1234567.0), "1.23457e+06");
    EXPECT_EQ(caresim::csv::format_real(0.123456789), "0.123457");
    EXPECT_EQ(caresim::csv::format_real(-3.5), "-3.5");
}

TEST(CsvFile, RoundTripExactBytes) {
    const std::string path = temp_path("caresim_csv_roundtrip.csv");
    const std::string content = "age,year,rate\n0,1951,0.02\n";
    caresim::csv::write_file(path, content);

    std::ifstream in(path, std::ios::binary);
    std::string back((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(back, content);
    std::remove(path.c_str());
}

TEST(CsvFile, ReadSkipsBlankLinesAndHandlesCrlf) {
    const std::string path = temp_path("caresim_csv_crlf.csv");
    caresim::csv::write_file(path, "h1,h2\r\n\r\n1,2\r\n\n3,4\n");
    auto rows = caresim::csv::read_file(path);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][0], "h1");
    EXPECT_EQ(rows[1][1], "2");
    EXPECT_EQ(rows[2][0], "3");
    std::remove(path.c_str());
}

TEST(CsvFile, MissingFileThrows) {
    EXPECT_THROW(caresim::csv::read_file("/nonexistent/nope.csv"), caresim::IoError);
}

TEST(AgeBand, ParseClosedAndOpenEnded) {
    auto b = caresim::parse_age_band("17-24");
    EXPECT_EQ(b.first, 17);
    EXPECT_EQ(b.second, 24);

    b = caresim::parse_age_band("65+");
    EXPECT_EQ(b.first, 65);
    EXPECT_EQ(b.second, 200);
}

TEST(AgeBand, ParseRejectsGarbage) {
    EXPECT_THROW(caresim::parse_age_band("x-7"), caresim::IoError);
    EXPECT_THROW(caresim::parse_age_band("12"), caresim::IoError);
    EXPECT_THROW(caresim::parse_age_band(""), caresim::IoError);
}

TEST(AgeBandTable, LookupAndDefaults) {
    caresim::AgeBandTable t;
    EXPECT_TRUE(t.empty());
    t.add_band(20, 29, 0.1);
    t.add_band(30, 39, 0.2);
    EXPECT_DOUBLE_EQ(t.value_at(25), 0.1);
    EXPECT_DOUBLE_EQ(t.value_at(30), 0.2);
    EXPECT_DOUBLE_EQ(t.value_at(39), 0.2);
    // uncovered ages fall back to zero
    EXPECT_DOUBLE_EQ(t.value_at(19), 0.0);
    EXPECT_DOUBLE_EQ(t.value_at(40), 0.0);
}

TEST(AgeBandTable, RejectsBadAndOverlappingBands) {
    caresim::AgeBandTable t;
    t.add_band(20, 29, 0.1);
    EXPECT_THROW(t.add_band(25, 34, 0.2), caresim::IoError); // overlaps 20-29
    EXPECT_THROW(t.add_band(40, 30, 0.2), caresim::IoError); // bounds reversed
    EXPECT_THROW(t.add_band(-1, 5, 0.2), caresim::IoError);
}
