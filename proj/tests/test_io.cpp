#include <doctest.h>

#include "thickstab/errors.hpp"
#include "thickstab/io.hpp"
#include "thickstab/thick_sets.hpp"

#include <cmath>
#include <limits>

using namespace thickstab;

TEST_CASE("field round trip") {
  const Grid g = make_grid(2, 3.5, 8);
  ComplexArray v(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) v(i) = Complex(std::sin(double(i)), 1.0 / (1.0 + i));
  const SpectralField f(g, v);
  const std::string bytes = encode_field(f);
  CHECK(bytes.substr(0, 4) == "TSF1");
  CHECK(bytes.size() == 4 + 4 + 4 + 8 + 16 * 64);
  CHECK(bytes[4] == 2);
  CHECK(bytes[8] == 8);
  const SpectralField back = decode_field(bytes);
  CHECK(back.grid() == g);
  CHECK((back.values() == f.values()).all());

  CHECK_THROWS_AS(decode_field(bytes.substr(0, 30)), InvalidArgument);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad), InvalidArgument);
}

TEST_CASE("mask round trip") {
  const Grid g = make_grid(1, 8.0, 64);
  const SupportMask m = make_random_thick(g, 1.0, 0.4, 3);
  const std::string bytes = encode_mask(m);
  CHECK(bytes.substr(0, 4) == "TSM1");
  const SupportMask back = decode_mask(bytes);
  CHECK((back.fraction() == m.fraction()).all());
  CHECK_THROWS_AS(decode_mask(encode_field(SpectralField::zeros(g))), InvalidArgument);
}

TEST_CASE("git blob hashes") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("number formatting and CSV") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e300) == "1e+300");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  CsvWriter csv({"a", "b"});
  csv.row(std::vector<double>{1.0, 0.25}).row(std::vector<std::string>{"x", "y"});
  CHECK(csv.text() == "a,b\n1,0.25\nx,y\n");
  CHECK(csv.rows() == 2);
  CHECK_THROWS_AS(csv.row(std::vector<double>{1.0}), InvalidArgument);
}
