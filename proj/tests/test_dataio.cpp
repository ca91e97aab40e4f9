#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "roughscale/dataio.hpp"
#include "roughscale/errors.hpp"

using namespace roughscale;
using namespace roughscale::dataio;

namespace {

class DataIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("roughscale_dataio_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path write(const std::string& body) {
    const auto p = dir_ / "lib.csv";
    std::ofstream(p) << body;
    return p;
  }

  ErrorKind load_error(const std::string& body, std::vector<Measure> required = {}) {
    try {
      load_library_csv(write(body), required);
    } catch (const Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no roughscale::Error thrown";
    return ErrorKind::argument;
  }

  std::filesystem::path dir_;
};

}  // namespace

TEST(Dates, ParsesBothLayoutsAndRoundTripsSerials) {
  EXPECT_EQ(parse_date("2000-01-03")->iso(), "2000-01-03");
  EXPECT_EQ(parse_date("2000-01-03 00:00:00+00:00")->iso(), "2000-01-03");
  EXPECT_EQ(parse_date("31/12/1999")->iso(), "1999-12-31");
  EXPECT_FALSE(parse_date("2000-13-01"));
  EXPECT_FALSE(parse_date("yesterday"));
  EXPECT_EQ((Date{1970, 1, 1}.serial()), 0);
  EXPECT_EQ((Date{2000, 3, 1}.serial() - Date{2000, 2, 28}.serial()), 2);
  for (long d : {-1000L, 0L, 10957L, 20000L}) EXPECT_EQ(Date::from_serial(d).serial(), d);
}

TEST(Symbols, LeadingPunctuationIsStripped) {
  EXPECT_EQ(normalize_symbol(".AEX"), "AEX");
  EXPECT_EQ(normalize_symbol("^GSPC"), "GSPC");
  EXPECT_EQ(normalize_symbol("SPX"), "SPX");
}

TEST_F(DataIo, LoadsAndRepairsInRowPosition) {
  const auto r = load_library_csv(write(
      ",Symbol,close_price,rv10,open_price\n"
      "2000-01-03,.AEX,100,,99\n"
      "2000-01-04,.AEX,101,0.0002,100\n"
      "2000-01-05,.AEX,102,NaN,101\n"
      "2000-01-10,.AEX,103,0.0005,102\n"
      "2000-01-11,.AEX,104,,103\n"
      "2000-01-03,.SPX,50,0.1,50\n"
      "2000-01-04,.SPX,51,0.2,50\n"));
  ASSERT_EQ(r.series.size(), 2u);
  const auto& aex = r.series.at("AEX");
  ASSERT_EQ(aex.size(), 5u);
  const auto& rv = aex.measures.at(Measure::rv10);
  EXPECT_DOUBLE_EQ(rv[0], 0.0002);
  EXPECT_DOUBLE_EQ(rv[2], 0.00035);  // midway by row, not by calendar
  EXPECT_DOUBLE_EQ(rv[4], 0.0005);
  ASSERT_EQ(r.repairs.size(), 3u);
  EXPECT_EQ(r.repairs[0].method, "nearest");
  EXPECT_EQ(r.repairs[1].method, "linear");
  EXPECT_EQ(r.repairs[1].row, 2u);
  EXPECT_EQ(r.repairs[1].date.iso(), "2000-01-05");
  EXPECT_EQ(r.repairs[1].column, "rv10");

  const auto oc = select_measure(aex, Measure::open_to_close);
  EXPECT_NEAR(oc[0], std::log(100.0 / 99.0), 1e-15);
  EXPECT_EQ(select_measure(aex, Measure::close_price)[3], 103.0);
  try {
    select_measure(aex, Measure::bv);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
  }
}

TEST_F(DataIo, WriteThenLoadIsLossless) {
  const auto first = load_library_csv(write(
      "date,Symbol,close_price,open_to_close,rv5\n"
      "2001-02-01,X,10.123456789012345,0.001,1e-5\n"
      "2001-02-02,X,10.2,-0.002,2.5e-5\n"));
  const auto out = dir_ / "again.csv";
  write_library_csv(first.series, out);
  const auto second = load_library_csv(out);
  ASSERT_EQ(second.series.size(), 1u);
  const auto& a = first.series.at("X");
  const auto& b = second.series.at("X");
  EXPECT_EQ(a.dates, b.dates);
  EXPECT_EQ(a.measures, b.measures);
}

TEST_F(DataIo, RequiredColumnsAndSchemaErrors) {
  EXPECT_EQ(load_error("date,close_price\n2000-01-03,1\n"), ErrorKind::schema);
  EXPECT_EQ(load_error("Symbol,close_price\nA,1\n"), ErrorKind::schema);
  EXPECT_EQ(load_error("date,Symbol,volume\n2000-01-03,A,1\n"), ErrorKind::schema);
  EXPECT_EQ(load_error("date,Symbol,close_price\n2000-01-03,A,1\n", {Measure::rv10}), ErrorKind::schema);
}

TEST_F(DataIo, MalformedRowsAreFormatErrors) {
  EXPECT_EQ(load_error(""), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\n2000-01-03,A\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\nsoon,A,1\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\n2000-01-03,A,abc\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\n2000-01-03,A,-1\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,close_price\n2000-01-03,A,0\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\n2000-01-04,A,1\n2000-01-03,A,1\n"), ErrorKind::format);
  EXPECT_EQ(load_error("date,Symbol,rv10\n2000-01-04,A,1\n2000-01-04,A,1\n"), ErrorKind::format);
}

TEST_F(DataIo, MissingFileIsIoError) {
  try {
    load_library_csv(dir_ / "nope.csv");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

TEST(Measures, NamesRoundTrip) {
  for (Measure m : kAllMeasures) EXPECT_EQ(measure_from_string(to_string(m)), m);
  EXPECT_TRUE(is_variance_measure(Measure::rsv));
  EXPECT_FALSE(is_variance_measure(Measure::open_to_close));
  EXPECT_THROW(measure_from_string("rv1"), Error);
}
