#include "doctest.h"

#include <vector>

#include "anova/shape.hpp"

using namespace anova;

TEST_CASE("sequence classification") {
  const std::vector<double> xs = {0, 1, 2, 3, 4};
  CHECK(classify_sequence({1, 2, 3, 4, 5}, xs).shape == Shape::nondecreasing);
  CHECK(classify_sequence({5, 4, 3, 2, 1}, xs).shape == Shape::nonincreasing);
  CHECK(classify_sequence({1, 1, 1, 1, 1}, xs).shape == Shape::flat);

  const auto uni = classify_sequence({1, 3, 5, 4, 2}, xs);
  CHECK(uni.shape == Shape::unimodal);
  CHECK(uni.argmax == 2);
  CHECK(uni.argmax_value == 2.0);

  CHECK(classify_sequence({1, 3, 2, 4, 1}, xs).shape == Shape::violation);
  CHECK(classify_sequence({3, 1, 2, 4, 5}, xs).shape == Shape::violation);
}

TEST_CASE("ties do not break an otherwise consistent shape") {
  const std::vector<double> xs = {0, 1, 2, 3, 4, 5};
  CHECK(classify_sequence({1, 1, 2, 2, 3, 3}, xs).shape == Shape::nondecreasing);
  CHECK(classify_sequence({1, 2, 2, 3, 2, 1}, xs).shape == Shape::unimodal);
  // Sub-tolerance wiggles count as ties.
  CHECK(classify_sequence({1.0, 2.0, 2.0 - 1e-13, 3.0, 4.0, 5.0}, xs,
                          1e-9, 1e-12).shape == Shape::nondecreasing);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(classify_sequence({1, 2}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(classify_sequence({1, 2, 3}, {0, 1}), std::invalid_argument);
}

TEST_CASE("risk shapes at the optimum on a sample slice") {
  ModelParams p{1.0, 0.25, 0.8, 1.0, 0.0};
  CHECK(check_monotonicity(Quantity::mse, Axis::pi, p).shape ==
        Shape::nonincreasing);
  CHECK(check_monotonicity(Quantity::mse, Axis::delta, p).shape ==
        Shape::nondecreasing);
  CHECK(check_monotonicity(Quantity::bias2, Axis::pi, p).shape ==
        Shape::nonincreasing);
  CHECK(check_monotonicity(Quantity::sigma_label, Axis::pi, p).shape ==
        Shape::nondecreasing);
  const auto rep = check_monotonicity(Quantity::sigma_sample, Axis::delta, p);
  CHECK(rep.asserted == false);
}

TEST_CASE("quantity parsing") {
  CHECK(parse_quantity("mse") == Quantity::mse);
  CHECK(parse_quantity("sigma_init") == Quantity::sigma_init);
  CHECK_THROWS_AS(parse_quantity("nope"), std::invalid_argument);
}
