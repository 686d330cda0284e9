#include "doctest.h"

#include <random>

#include "timdnn/tile.hpp"

using namespace timdnn;

namespace {

TileConfig one_block() {
  TileConfig c;
  c.blocks = 1;
  return c;
}

TritVector ones(int n) { return TritVector::Ones(n); }

// Plain-loop reference for a whole tile: sum_r w(r, c) * a(r), no clipping.
Eigen::VectorXd oracle_dot(const TritMatrix& w, const Eigen::VectorXi& a) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) out(c) += static_cast<double>(w(r, c)) * a(r);
  return out;
}

}  // namespace

TEST_CASE("row storage") {
  TpcArray arr(one_block());
  TritVector row = TritVector::Zero(256);
  row(3) = 1;
  row(7) = -1;
  arr.write_row(0, 5, row);
  CHECK(arr.read_row(0, 5) == row);
  CHECK(arr.cell(0, 5, 7) == Trit::Neg);
  row(3) = -1;
  arr.write_row(0, 5, row);
  CHECK(arr.cell(0, 5, 3) == Trit::Neg);
  CHECK(arr.row_writes() == 2);
  CHECK_THROWS_AS(arr.write_row(1, 0, row), AddressError);
  CHECK_THROWS_AS(arr.write_row(0, 16, row), AddressError);
  CHECK_THROWS_AS(arr.read_row(-1, 0), AddressError);
}

TEST_CASE("block counts") {
  TpcArray arr(one_block());
  TritMatrix w = TritMatrix::Zero(16, 256);

  SUBCASE("zero input leaves bitlines precharged") {
    w.setOnes();
    arr.load(w);
    for (const auto& c : block_counts(arr, 0, TritVector::Zero(16), 8)) CHECK(c == ColumnCounts{0, 0});
  }
  SUBCASE("raw 16 clips to 8") {
    w.col(0).setOnes();
    arr.load(w);
    CHECK(raw_block_counts(arr, 0, ones(16))[0] == ColumnCounts{16, 0});
    CHECK(block_counts(arr, 0, ones(16), 8)[0] == ColumnCounts{8, 0});
  }
  SUBCASE("five positive and three negative products") {
    w.col(0).head(5).setConstant(1);
    w.col(0).segment(5, 3).setConstant(-1);
    arr.load(w);
    CHECK(block_counts(arr, 0, ones(16), 8)[0] == ColumnCounts{5, 3});
    CHECK(matvec_unweighted(arr, 0, ones(16))(0) == 2);
  }
}

TEST_CASE("unweighted matvec") {
  TpcArray arr(one_block());
  TritMatrix w = TritMatrix::Zero(16, 256);
  SUBCASE("unit case") {
    w(4, 0) = 1;
    arr.load(w);
    TritVector in = TritVector::Zero(16);
    in(4) = 1;
    CHECK(matvec_unweighted(arr, 0, in)(0) == 1);
  }
  SUBCASE("clipped output differs from the exact sum") {
    w.col(0).head(10).setConstant(1);
    arr.load(w);
    CHECK(matvec_unweighted(arr, 0, ones(16))(0) == 8);
  }
  SUBCASE("input length is checked") {
    arr.load(w);
    CHECK_THROWS_AS(matvec_unweighted(arr, 0, ones(8)), ShapeError);
  }
}

TEST_CASE("asymmetric step scales") {
  const auto sys = TernarySystem::asymmetric(0.7, 0.4, 0.5, 0.25);
  const StepScale one = asymmetric_step_scale(Step::One, sys);
  CHECK(one.input_scale == doctest::Approx(0.5));
  CHECK(one.polarity == Trit::Pos);
  const StepScale two = asymmetric_step_scale(Step::Two, sys);
  CHECK(two.input_scale == doctest::Approx(-0.25));
  CHECK(two.polarity == Trit::Neg);
  auto zero = sys;
  zero.neg_input = 0.0;
  CHECK(asymmetric_step_scale(Step::Two, zero).input_scale == 0.0);
}

TEST_CASE("weighted matvec") {
  TpcArray arr(one_block());
  TritMatrix w = TritMatrix::Zero(16, 256);
  w(0, 0) = 1;
  w(1, 0) = -1;
  arr.load(w);
  TritVector in = TritVector::Zero(16);
  const auto sys = TernarySystem::asymmetric(0.7, 0.4, 0.5, 0.25);
  CHECK((matvec_weighted(arr, 0, in, sys).array() == 0.0).all());

  in(0) = 1;
  in(1) = -1;
  AccessStats stats;
  AccessHooks hooks;
  hooks.stats = &stats;
  const Eigen::VectorXd out = matvec_weighted(arr, 0, in, sys, hooks);
  CHECK(out(0) == doctest::Approx(0.7 * 0.5 + (-0.4) * (-0.25)));
  CHECK(out(0) == doctest::Approx(0.45));
  CHECK(stats.accesses() == 2);
  REQUIRE(stats.records.size() == 2);
  CHECK(stats.records[0].counts[0] == ColumnCounts{1, 0});
  CHECK(stats.records[1].counts[0] == ColumnCounts{0, 1});

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> t(-1, 1);
  for (int c = 0; c < 256; ++c)
    for (int r = 0; r < 16; ++r) w(r, c) = static_cast<std::int8_t>(t(rng));
  arr.load(w);
  for (int r = 0; r < 16; ++r) in(r) = static_cast<std::int8_t>(t(rng));
  const Eigen::VectorXd a = matvec_weighted(arr, 0, in, TernarySystem::unweighted());
  const Eigen::VectorXi b = matvec_unweighted(arr, 0, in);
  CHECK(a == b.cast<double>());
}

TEST_CASE("bit-serial matvec") {
  TpcArray arr(one_block());
  TritMatrix w = TritMatrix::Zero(16, 256);
  w(0, 0) = 1;
  arr.load(w);
  Eigen::VectorXi acts = Eigen::VectorXi::Zero(16);
  const auto sys = TernarySystem::unweighted();
  CHECK((matvec_bitserial(arr, 0, acts, 2, sys).array() == 0.0).all());
  acts(0) = 3;
  CHECK(matvec_bitserial(arr, 0, acts, 2, sys)(0) == 3.0);
  acts(0) = -5;
  CHECK(matvec_bitserial(arr, 0, acts, 3, sys)(0) == -5.0);
  CHECK(bit_plane(acts, 0)(0) == -1);
  CHECK(bit_plane(acts, 1)(0) == 0);
  CHECK(bit_plane(acts, 2)(0) == -1);
  acts(0) = 8;
  CHECK_THROWS_AS(matvec_bitserial(arr, 0, acts, 3, sys), InputError);
}

TEST_CASE("full tile matvec") {
  TpcArray arr{TileConfig{}};
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> t(-1, 1);
  // Sparse enough that no block column reaches the clipping range.
  std::bernoulli_distribution keep(0.25);
  TritMatrix w = TritMatrix::Zero(256, 256);
  for (int c = 0; c < 256; ++c)
    for (int r = 0; r < 256; ++r)
      if (keep(rng)) w(r, c) = static_cast<std::int8_t>(t(rng));
  for (int c = 0; c < 256; ++c)
    for (int b = 0; b < 16; ++b) {
      int nz = 0;
      for (int r = 0; r < 16; ++r)
        if (w(b * 16 + r, c) != 0 && ++nz > 8) w(b * 16 + r, c) = 0;
    }
  arr.load(w);

  TritVector in(256);
  for (int r = 0; r < 256; ++r) in(r) = static_cast<std::int8_t>(t(rng));
  const TileResult res = tile_matvec(arr, in);
  CHECK(res.out == oracle_dot(w, in.cast<int>()));
  CHECK(res.stats.accesses() == 16);

  TritVector first = TritVector::Zero(256);
  first.head(16) = in.head(16);
  const TileResult one = tile_matvec(arr, first);
  CHECK(one.out == matvec_unweighted(arr, 0, in.head(16)).cast<double>());
  CHECK(one.stats.accesses() == 16);

  Eigen::VectorXi acts(256);
  std::uniform_int_distribution<int> a(-15, 15);
  for (int r = 0; r < 256; ++r) acts(r) = a(rng);
  const TileResult bs = tile_matvec(arr, acts, 4);
  CHECK(bs.out == oracle_dot(w, acts));
  CHECK(bs.stats.accesses() == 16 * 4);
}

TEST_CASE("tile config validation") {
  TileConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.capacity_words() == 65536);
  CHECK(c.digitization_rounds() == 8);
  c.adc_max = 11;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
