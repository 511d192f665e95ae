#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "fedkd/errors.hpp"
#include "fedkd/metrics.hpp"
#include "fedkd/rng.hpp"

using namespace fedkd;

namespace {

LabeledDataset random_testset(int classes, int lo, int head, int rows, int dim,
                              std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset data;
  data.inputs = Tensor::matrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(dim));
  for (double& v : data.inputs.data()) {
    v = rng.normal();
  }
  data.labels.resize(static_cast<std::size_t>(rows));
  for (int& l : data.labels) {
    l = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  }
  data.class_count = head;
  data.class_role = ClassRole::kLocal;
  data.class_lo = lo;
  data.class_hi = lo + classes;
  return data;
}

}  // namespace

TEST_CASE("evaluate_accuracy equals a per-example argmax loop") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int head = 9;
    const ClassSlice slice{3, 9};
    const LabeledDataset data = random_testset(6, 3, head, 40, 5, seed);
    const ModelParams model = init_params(ModelArch{5, 2, 8, head}, seed * 31);

    const Tensor logits = forward_logits(model, data.inputs);
    int hits = 0;
    for (std::size_t r = 0; r < data.inputs.rows(); ++r) {
      int best = slice.lo;
      for (int c = slice.lo + 1; c < slice.hi; ++c) {
        if (logits.at(r, static_cast<std::size_t>(c)) >
            logits.at(r, static_cast<std::size_t>(best))) {
          best = c;
        }
      }
      if (best == data.labels[r]) ++hits;
    }
    const double expected = static_cast<double>(hits) / static_cast<double>(data.inputs.rows());
    CHECK(evaluate_accuracy(model, data, slice) == expected);
  }
}

TEST_CASE("accuracy is an exact rational count") {
  const LabeledDataset data = random_testset(4, 0, 4, 16, 3, 5);
  const ModelParams model = init_params(ModelArch{3, 1, 6, 4}, 2);
  const double acc = evaluate_accuracy(model, data, ClassSlice{0, 4});
  const double scaled = acc * 16.0;
  CHECK(scaled == std::round(scaled));
}

TEST_CASE("argmax ties break to the lowest class index") {
  // zero weights force identical logits everywhere
  LabeledDataset data = random_testset(3, 2, 5, 9, 4, 8);
  const ModelParams zeros = zero_params(ModelArch{4, 1, 5, 5});
  int lo_labels = 0;
  for (int l : data.labels) {
    if (l == 2) ++lo_labels;
  }
  const double acc = evaluate_accuracy(zeros, data, ClassSlice{2, 5});
  CHECK(acc == static_cast<double>(lo_labels) / 9.0);
}

TEST_CASE("slice restricts the argmax to the local block") {
  // head row 0 fires hugely on every input, but lies outside the slice
  ModelParams model = zero_params(ModelArch{2, 1, 2, 4});
  model.layers[1].bias = {1000.0, 0.0, 0.5, 0.0};

  LabeledDataset data;
  data.inputs = Tensor::from_rows({{1.0, 1.0}, {0.5, -0.5}});
  data.labels = {2, 2};
  data.class_count = 4;
  data.class_lo = 1;
  data.class_hi = 4;
  const double acc = evaluate_accuracy(model, data, ClassSlice{1, 4});
  CHECK(acc == 1.0);  // class 2 has the top in-slice bias
}

TEST_CASE("evaluate_accuracy validates the slice and labels") {
  const LabeledDataset data = random_testset(3, 2, 5, 6, 4, 3);
  const ModelParams model = init_params(ModelArch{4, 1, 5, 5}, 1);
  CHECK_THROWS_AS(evaluate_accuracy(model, data, ClassSlice{2, 6}), Error);
  CHECK_THROWS_AS(evaluate_accuracy(model, data, ClassSlice{4, 4}), Error);

  LabeledDataset broken = data;
  broken.labels[0] = 0;  // outside the slice block
  CHECK_THROWS_AS(evaluate_accuracy(model, broken, ClassSlice{2, 5}), Error);
}

TEST_CASE("summarize pulls finals from the last record") {
  RoundRecord r0;
  r0.round_index = 0;
  r0.global_acc = 0.2;
  r0.distilled_acc_mean = 0.3;
  r0.personalised_acc_mean = 0.25;
  r0.gap = 0.05;
  RoundRecord r1 = r0;
  r1.round_index = 1;
  r1.global_acc = 0.4;
  r1.distilled_acc_mean = 0.5;
  r1.personalised_acc_mean = 0.45;
  r1.gap = 0.05;

  const std::vector<double> initial = {0.1, 0.2, 0.3};
  const EvalReport report = summarize({r0, r1}, initial);
  CHECK(report.initial_mean == doctest::Approx(0.2));
  REQUIRE(report.global_final.has_value());
  CHECK(*report.global_final == 0.4);
  CHECK(*report.distilled_final_mean == 0.5);
  CHECK(*report.personalised_final_mean == 0.45);
  CHECK(*report.gap_final == 0.05);
  REQUIRE(report.per_round.size() == 2);
  CHECK(report.per_round[1] == r1);
}

TEST_CASE("summarize with no rounds leaves finals empty") {
  const std::vector<double> initial = {0.5};
  const EvalReport report = summarize({}, initial);
  CHECK(report.initial_mean == 0.5);
  CHECK_FALSE(report.global_final.has_value());
  CHECK_FALSE(report.distilled_final_mean.has_value());
  CHECK_FALSE(report.personalised_final_mean.has_value());
  CHECK_FALSE(report.gap_final.has_value());
}
