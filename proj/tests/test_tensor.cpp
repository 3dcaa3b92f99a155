#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "tctf/tensor.hpp"

using namespace tctf;

TEST_SUITE("tensor") {

TEST_CASE("construction validates length and finiteness") {
  CHECK_THROWS_AS(TrafficTensor(2, 2, 2, std::vector<double>(7, 0.0)), ArgumentError);
  std::vector<double> bad(8, 0.0);
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TrafficTensor(2, 2, 2, bad), ArgumentError);
  bad[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(TrafficTensor(2, 2, 2, bad), ArgumentError);
  CHECK_THROWS_AS(TrafficTensor(0, 2, 2), ArgumentError);
}

TEST_CASE("frontal slices") {
  TrafficTensor zero(3, 4, 2);
  CHECK(zero.slice(0).isZero(0.0));

  TrafficTensor eye = TrafficTensor::identity(3, 4);
  CHECK(eye.slice(0).isApprox(Matrix::Identity(3, 3), 0.0));
  CHECK(eye.slice(1).isZero(0.0));

  TrafficTensor t(2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  Matrix expected(2, 2);
  expected << 5, 7, 6, 8;
  CHECK(Matrix(t.slice(1)) == expected);

  CHECK_THROWS_AS(t.slice(2), std::out_of_range);
  CHECK_THROWS_AS(t.slice(-1), std::out_of_range);
}

TEST_CASE("slices tile the tensor exactly") {
  Rng rng(3);
  TrafficTensor t = oracles::random_tensor(4, 3, 5, rng);
  TrafficTensor rebuilt(4, 3, 5);
  for (Index k = 0; k < 5; ++k) rebuilt.slice(k) = t.slice(k);
  CHECK(rebuilt.data() == t.data());
}

TEST_CASE("unfold") {
  TrafficTensor ones(2, 2, 2, std::vector<double>(8, 1.0));
  CHECK(unfold(ones, 1) == Matrix::Ones(2, 4));

  TrafficTensor t(2, 2, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  Matrix expected(2, 4);
  expected << 1, 3, 5, 7, 2, 4, 6, 8;
  CHECK(unfold(t, 1) == expected);

  CHECK_THROWS_AS(unfold(t, 3), ArgumentError);
  CHECK_THROWS_AS(unfold(t, 0), ArgumentError);
}

TEST_CASE("fold inverts unfold") {
  Rng rng(7);
  TrafficTensor t = oracles::random_tensor(3, 5, 4, rng);
  for (int mode : {1, 2}) {
    TrafficTensor back = fold(unfold(t, mode), mode, 3, 5, 4);
    CHECK(back.data() == t.data());
  }
}

TEST_CASE("bcirc layout") {
  Rng rng(11);
  TrafficTensor single = oracles::random_tensor(3, 2, 1, rng);
  CHECK(bcirc(single) == Matrix(single.slice(0)));

  TrafficTensor t = oracles::random_tensor(2, 3, 2, rng);
  Matrix b = bcirc(t);
  REQUIRE(b.rows() == 4);
  REQUIRE(b.cols() == 6);
  CHECK(b.block(0, 0, 2, 3) == Matrix(t.slice(0)));
  CHECK(b.block(0, 3, 2, 3) == Matrix(t.slice(1)));
  CHECK(b.block(2, 0, 2, 3) == Matrix(t.slice(1)));
  CHECK(b.block(2, 3, 2, 3) == Matrix(t.slice(0)));
}

TEST_CASE("bcirc norm identity") {
  Rng rng(13);
  TrafficTensor t = oracles::random_tensor(4, 3, 5, rng);
  double lhs = bcirc(t).squaredNorm();
  double rhs = 5.0 * t.squared_norm();
  CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
}

TEST_CASE("bvec roundtrip") {
  Rng rng(17);
  TrafficTensor t = oracles::random_tensor(3, 4, 3, rng);
  TrafficTensor back = bvfold(bvec(t), 3, 4, 3);
  CHECK(back.data() == t.data());
}

TEST_CASE("frobenius norm") {
  CHECK(TrafficTensor(3, 3, 2).frobenius_norm() == 0.0);
  CHECK(TrafficTensor::identity(3, 4).frobenius_norm() == doctest::Approx(std::sqrt(3.0)));

  Rng rng(19);
  TrafficTensor t = oracles::random_tensor(5, 4, 6, rng);
  CHECK(t.frobenius_norm() == doctest::Approx(oracles::frobenius_bruteforce(t)).epsilon(1e-14));
}

}  // TEST_SUITE
