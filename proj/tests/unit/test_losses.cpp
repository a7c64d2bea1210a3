#include "doctest.h"
#include "oracles.hpp"

#include "ucahar/losses.hpp"

using namespace ucahar;

namespace {

Matrix<double> mat(Index rows, Index cols, std::initializer_list<double> values) {
  Matrix<double> m(rows, cols);
  auto it = values.begin();
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

Vector<double> flat(const Matrix<double>& m) { return Eigen::Map<const Vector<double>>(m.data(), m.size()); }

Matrix<double> shaped(const Vector<double>& v, Index rows, Index cols) {
  return Eigen::Map<const Matrix<double>>(v.data(), rows, cols);
}

}  // namespace

TEST_CASE("class weights follow the inverse-frequency rule") {
  const Matrix<double> balanced = mat(2, 2, {1, 0, 0, 1});
  CHECK(class_weights(balanced).weights.isApprox(Vector<double>::Ones(2)));

  Matrix<double> skewed = Matrix<double>::Zero(2, 10);
  skewed.row(0).head(8).setOnes();
  skewed.row(1).head(2).setOnes();
  const auto w = class_weights(skewed).weights;
  CHECK(w(0) == doctest::Approx(0.4));
  CHECK(w(1) == doctest::Approx(1.6));

  Matrix<double> empty_class = Matrix<double>::Zero(3, 10);
  empty_class.row(0).head(8).setOnes();
  empty_class.row(1).head(2).setOnes();
  const auto w3 = class_weights(empty_class).weights;
  CHECK(w3(2) == doctest::Approx(w3(1)));
  CHECK(w3.mean() == doctest::Approx(1.0));
  CHECK((w3.array() > 0).all());
}

TEST_CASE("weighted BCE worked values") {
  const Vector<double> one = Vector<double>::Ones(1);
  CHECK(weighted_bce(mat(1, 1, {0.0}), mat(1, 1, {1.0}), one).value == doctest::Approx(0.6931472));
  CHECK(weighted_bce(mat(1, 1, {20.0}), mat(1, 1, {1.0}), one).value == doctest::Approx(2.06e-9).epsilon(0.01));
  CHECK_THROWS_AS(weighted_bce(mat(1, 1, {0.0}), mat(1, 1, {0.5}), one), InvalidInput);
}

TEST_CASE("weighted BCE matches the scalar per-entry oracle") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto logits = oracle::random_normal(3, 4, rng, 2.0);
    const auto targets = oracle::random_binary(3, 4, 0.4, rng);
    const Vector<double> w = oracle::random_normal(3, 1, rng).cwiseAbs();
    CHECK(std::abs(weighted_bce(logits, targets, w).value - oracle::weighted_bce(logits, targets, w)) <= 1e-7);
  }
}

TEST_CASE("cross-entropy worked values") {
  CHECK(cross_entropy<double>(Matrix<double>::Zero(4, 1), mat(4, 1, {0, 1, 0, 0})).value == doctest::Approx(1.3862944));
  CHECK(cross_entropy(mat(2, 1, {10, -10}), mat(2, 1, {1, 0})).value == doctest::Approx(2.06e-9).epsilon(0.01));
  CHECK(cross_entropy(mat(3, 1, {1, 2, 3}), mat(3, 1, {0, 0, 1})).value == doctest::Approx(0.40760596));
  CHECK_THROWS_AS(cross_entropy(mat(2, 1, {0, 0}), mat(2, 1, {1, 1})), InvalidInput);
}

TEST_CASE("cross-entropy matches the scalar softmax oracle") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto logits = oracle::random_normal(5, 6, rng, 3.0);
    const auto targets = oracle::random_one_hot(5, 6, rng);
    CHECK(std::abs(cross_entropy(logits, targets).value - oracle::cross_entropy(logits, targets)) <= 1e-9);
  }
}

TEST_CASE("pair partition follows the shared-label rule") {
  const auto labels = mat(2, 3, {1, 1, 0, 0, 1, 1});
  const auto part = partition_pairs(0, labels);
  CHECK(part.positive == std::vector<Index>{1});
  CHECK(part.negative == std::vector<Index>{2});
  CHECK_THROWS_AS(partition_pairs(0, mat(2, 1, {1, 0})), DegenerateBatch);
}

TEST_CASE("pair partition matches brute-force enumeration on random batches") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Index b = 2 + static_cast<Index>(rng() % 8);
    const auto labels = oracle::random_binary(3, b, 0.3, rng);
    for (Index a = 0; a < b; ++a) {
      const auto part = partition_pairs(a, labels);
      const auto ref = oracle::pair_sets(a, labels);
      CHECK(part.positive == ref.positive);
      CHECK(part.negative == ref.negative);
      CHECK(static_cast<Index>(part.positive.size() + part.negative.size()) == b - 1);
    }
  }
}

TEST_CASE("pair means average each side, empty negatives give zero") {
  const auto fused = mat(2, 3, {9, 0, 2, 9, 2, 0});
  const auto means = pair_means(fused, PairPartition{{1, 2}, {}});
  CHECK(means.positive == Vector<double>::Ones(2));
  CHECK(means.negative.isZero());
  CHECK(means.has_positive);
  const auto single = pair_means(fused, PairPartition{{}, {1}});
  CHECK_FALSE(single.has_positive);
  CHECK(single.negative == fused.col(1));
}

TEST_CASE("contrastive worked anchors") {
  const double expected = std::log1p(std::exp(-1.0));
  // Identical pair, no negatives: p = [1, 0] for both anchors.
  const auto pair = contrastive_loss(mat(2, 2, {1, 1, 2, 2}), mat(1, 2, {1, 1}));
  CHECK(pair.value == doctest::Approx(expected).epsilon(1e-7));

  // Anchor 0 is orthogonal to its positive and anti-parallel to its negative.
  std::vector<double> terms;
  contrastive_loss(mat(2, 3, {1, 0, -1, 0, 1, 0}), mat(2, 3, {1, 1, 0, 0, 0, 1}), &terms);
  CHECK(terms[0] == doctest::Approx(expected).epsilon(1e-7));

  CHECK_THROWS_AS(contrastive_loss(mat(2, 1, {1, 1}), mat(1, 1, {1})), DegenerateBatch);
}

TEST_CASE("anchors without positives contribute zero but count in the divisor") {
  const auto fused = mat(2, 3, {1, 1, 0, 0, 0, 1});
  std::vector<double> terms;
  const auto out = contrastive_loss(fused, mat(2, 3, {1, 1, 0, 0, 0, 1}), &terms);
  CHECK(terms[2] == 0.0);
  CHECK(out.value == doctest::Approx((terms[0] + terms[1]) / 3.0));
}

TEST_CASE("contrastive loss matches the anchor-loop oracle and stays bounded") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Index b = 2 + static_cast<Index>(rng() % 20);
    const Index f = 4 + static_cast<Index>(rng() % 12);
    const auto fused = oracle::random_normal(f, b, rng);
    const auto labels = oracle::random_binary(3, b, 0.3, rng);
    std::vector<double> terms;
    const auto out = contrastive_loss(fused, labels, &terms);
    CHECK(std::abs(out.value - oracle::contrastive(fused, labels)) <= 1e-9);
    for (double t : terms) {
      CHECK(t >= 0.0);
      CHECK(t <= kMaxContrastiveTerm + 1e-12);
    }
  }
}

TEST_CASE("zero representation has similarity zero") {
  const auto out = contrastive_loss<double>(Matrix<double>::Zero(3, 4), Matrix<double>::Ones(1, 4));
  CHECK(out.value == doctest::Approx(std::log(2.0)));
  CHECK(out.gradient.allFinite());
}

TEST_CASE("loss gradients match central differences") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const auto logits = oracle::random_normal(3, 4, rng);
    const auto targets = oracle::random_binary(3, 4, 0.5, rng);
    const Vector<double> w = oracle::random_normal(3, 1, rng).cwiseAbs();
    const auto bce = weighted_bce(logits, targets, w);
    const auto bce_num = oracle::numeric_gradient(
        [&](const Vector<double>& v) { return weighted_bce(shaped(v, 3, 4), targets, w).value; }, flat(logits));
    CHECK(oracle::relative_error(flat(bce.gradient), bce_num) <= 1e-6);

    const auto onehot = oracle::random_one_hot(3, 4, rng);
    const auto ce = cross_entropy(logits, onehot);
    const auto ce_num = oracle::numeric_gradient(
        [&](const Vector<double>& v) { return cross_entropy(shaped(v, 3, 4), onehot).value; }, flat(logits));
    CHECK(oracle::relative_error(flat(ce.gradient), ce_num) <= 1e-6);

    const auto fused = oracle::random_normal(5, 6, rng);
    const auto labels = oracle::random_binary(2, 6, 0.5, rng);
    const auto con = contrastive_loss(fused, labels);
    const auto con_num = oracle::numeric_gradient(
        [&](const Vector<double>& v) { return contrastive_loss(shaped(v, 5, 6), labels).value; }, flat(fused));
    CHECK(oracle::relative_error(flat(con.gradient), con_num) <= 1e-6);
  }
}

TEST_CASE("raising the positive similarity lowers the anchor term") {
  // Anchor 0 moves from its negative (column 2) toward its positive (column 1).
  std::vector<double> before, after;
  contrastive_loss(mat(2, 3, {1, 0, 1, 0.2, 1, 0}), mat(2, 3, {1, 1, 0, 0, 0, 1}), &before);
  contrastive_loss(mat(2, 3, {1, 0, 1, 0.8, 1, 0}), mat(2, 3, {1, 1, 0, 0, 0, 1}), &after);
  CHECK(after[0] < before[0]);
}

TEST_CASE("total loss is affine in the weights and logs L_d when alpha is zero") {
  std::mt19937_64 rng(6);
  HeadLogits<double> logits{oracle::random_normal(3, 5, rng), oracle::random_normal(2, 5, rng),
                            oracle::random_normal(4, 5, rng)};
  LabelBatch<double> labels{oracle::random_binary(3, 5, 0.5, rng), oracle::random_binary(2, 5, 0.5, rng),
                            oracle::random_one_hot(4, 5, rng), oracle::random_binary(5, 5, 0.4, rng)};
  const auto fused = oracle::random_normal(6, 5, rng);
  const ClassWeightTable wa{Vector<double>::Ones(3)}, wc{Vector<double>::Ones(2)};

  const LossWeights w{0.3, 0.7, 1.9};
  const auto r = total_loss(logits, fused, labels, w, wa, wc).breakdown;
  CHECK(r.total == doctest::Approx(r.activity + 0.7 * r.context + 1.9 * r.user + 0.3 * r.contrastive).epsilon(1e-12));

  const auto only_a = total_loss(logits, fused, labels, LossWeights{0, 0, 0}, wa, wc);
  CHECK(only_a.breakdown.total == only_a.breakdown.activity);
  CHECK(only_a.breakdown.contrastive > 0.0);
  CHECK(only_a.fused_grad.size() == 0);
  CHECK(only_a.logit_grad.user.isZero());
}
