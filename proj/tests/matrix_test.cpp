#include <gtest/gtest.h>

#include <stdexcept>

#include "oracles.hpp"
#include "rawbci/matrix.hpp"
#include "rawbci/rng.hpp"

using rawbci::Matrix;
using rawbci::SeededRng;

namespace {

Matrix random_matrix(SeededRng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

}  // namespace

TEST(Matrix, ConstructionGuards) {
  EXPECT_THROW(Matrix(0, 3), std::invalid_argument);
  EXPECT_THROW(Matrix(3, 0), std::invalid_argument);
  Matrix m(2, 3, 1.5);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_DOUBLE_EQ(m(1, 2), 1.5);
}

TEST(Matmul, HandExample) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{5, 6}, {7, 8}};
  const Matrix got = rawbci::matmul(a, b);
  const Matrix expected = oracle::naive_matmul(a, b);
  EXPECT_DOUBLE_EQ(got(0, 0), 19.0);
  EXPECT_DOUBLE_EQ(got(0, 1), 22.0);
  EXPECT_DOUBLE_EQ(got(1, 0), 43.0);
  EXPECT_DOUBLE_EQ(got(1, 1), 50.0);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_DOUBLE_EQ(got.data()[i], expected.data()[i]);
  }
}

TEST(Matmul, IdentityAndZero) {
  SeededRng rng(11);
  const Matrix a = random_matrix(rng, 4, 6);
  const Matrix ai = rawbci::matmul(a, Matrix::identity(6));
  const Matrix az = rawbci::matmul(a, Matrix::zeros(6, 3));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(ai.data()[i], a.data()[i]);
  }
  for (double v : az.data()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Matmul, MatchesNaiveOracleOnRandomInputs) {
  SeededRng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(rng, 8, 8);
    const Matrix b = random_matrix(rng, 8, 8);
    const double err =
        oracle::max_relative_error(rawbci::matmul(a, b),
                                   oracle::naive_matmul(a, b), 1e-300);
    EXPECT_LT(err, 1e-12);
  }
}

TEST(Matmul, DimensionMismatchNamesBothShapes) {
  const Matrix a(2, 3);
  const Matrix b(4, 5);
  try {
    rawbci::matmul(a, b);
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
  }
}

TEST(Transpose, ExamplesAndInvolution) {
  const Matrix row{{1, 2, 3}};
  const Matrix col = rawbci::transpose(row);
  EXPECT_EQ(col.rows(), 3u);
  EXPECT_EQ(col.cols(), 1u);
  EXPECT_DOUBLE_EQ(col(1, 0), 2.0);

  const Matrix m{{1, 2}, {3, 4}};
  const Matrix mt = rawbci::transpose(m);
  EXPECT_DOUBLE_EQ(mt(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(mt(1, 0), 2.0);

  SeededRng rng(5);
  const Matrix r = random_matrix(rng, 5, 7);
  const Matrix rtt = rawbci::transpose(rawbci::transpose(r));
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_DOUBLE_EQ(rtt.data()[i], r.data()[i]);
  }
}

TEST(AddRowBroadcast, ExamplesAndExactness) {
  const Matrix a{{1, 1}, {2, 2}};
  const Matrix row{{10, 20}};
  const Matrix got = rawbci::add_row_broadcast(a, row);
  EXPECT_DOUBLE_EQ(got(0, 0), 11.0);
  EXPECT_DOUBLE_EQ(got(0, 1), 21.0);
  EXPECT_DOUBLE_EQ(got(1, 0), 12.0);
  EXPECT_DOUBLE_EQ(got(1, 1), 22.0);

  // zero row is the identity
  const Matrix same = rawbci::add_row_broadcast(a, Matrix(1, 2, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(same.data()[i], a.data()[i]);
  }

  // each output entry is exactly the scalar sum of its inputs
  SeededRng rng(9);
  const Matrix r = random_matrix(rng, 6, 4);
  const Matrix b = random_matrix(rng, 1, 4);
  const Matrix out = rawbci::add_row_broadcast(r, b);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < r.cols(); ++j) {
      EXPECT_EQ(out(i, j), r(i, j) + b(0, j));
    }
  }

  // on integer-valued inputs the subtraction form is exact too
  const Matrix diff = rawbci::sub(got, a);
  for (std::size_t i = 0; i < diff.rows(); ++i) {
    EXPECT_EQ(diff(i, 0), 10.0);
    EXPECT_EQ(diff(i, 1), 20.0);
  }

  EXPECT_THROW(rawbci::add_row_broadcast(a, Matrix(1, 3)),
               std::invalid_argument);
  EXPECT_THROW(rawbci::add_row_broadcast(a, Matrix(2, 2)),
               std::invalid_argument);
}

TEST(ColumnStats, TwoPointAndConstantAndSingleRow) {
  const Matrix two{{1}, {3}};
  EXPECT_DOUBLE_EQ(rawbci::col_mean(two)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(rawbci::col_var(two)(0, 0), 1.0);

  const Matrix constant{{5}, {5}, {5}};
  EXPECT_DOUBLE_EQ(rawbci::col_mean(constant)(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(rawbci::col_var(constant)(0, 0), 0.0);

  const Matrix single{{2, 4, 6}};
  const Matrix mean = rawbci::col_mean(single);
  const Matrix var = rawbci::col_var(single);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(mean(0, j), single(0, j));
    EXPECT_DOUBLE_EQ(var(0, j), 0.0);
  }
}

TEST(ColumnStats, VarianceNeverNegative) {
  SeededRng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_matrix(rng, 5, 3);
    if (trial % 3 == 0) {
      // near-constant columns stress the formula
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
          m(i, j) = 1e8 + 1e-8 * m(i, j);
        }
      }
    }
    const Matrix var = rawbci::col_var(m);
    for (double v : var.data()) EXPECT_GE(v, 0.0);
  }
}

TEST(Rng, SameSeedSameStream) {
  SeededRng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
  }
  SeededRng c(123), d(123);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(c.normal(), d.normal());
  }
}

TEST(Rng, DeriveSeedSeparatesStreams) {
  const auto s1 = rawbci::derive_seed(1, 0, 0);
  const auto s2 = rawbci::derive_seed(1, 0, 1);
  const auto s3 = rawbci::derive_seed(1, 1, 0);
  EXPECT_NE(s1, s2);
  EXPECT_NE(s1, s3);
  EXPECT_NE(s2, s3);
  EXPECT_EQ(s1, rawbci::derive_seed(1, 0, 0));
}

TEST(Randn, ScaleZeroAndDeterminism) {
  SeededRng rng(4);
  const Matrix z = rawbci::randn(rng, 3, 3, 0.0);
  for (double v : z.data()) EXPECT_EQ(v, 0.0);

  SeededRng r1(99), r2(99);
  const Matrix a = rawbci::randn(r1, 4, 5, 1.0);
  const Matrix b = rawbci::randn(r2, 4, 5, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.data()[i], b.data()[i]);
  }
  EXPECT_THROW(rawbci::randn(r1, 2, 2, -1.0), std::invalid_argument);
}

TEST(Randn, LawOfLargeNumbers) {
  SeededRng rng(2024);
  const Matrix draws = rawbci::randn(rng, 100, 100, 1.0);
  double mean = 0.0;
  for (double v : draws.data()) mean += v;
  mean /= static_cast<double>(draws.size());
  double var = 0.0;
  for (double v : draws.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(draws.size());
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Rng, ShuffleIsAPermutation) {
  SeededRng rng(31);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}
