#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"
#include "volex/matching.hpp"

using namespace volex;

namespace {

NeuralObjectVolume volume_of(const Matrix& g, int cls) {
  NovGeometry geo;
  geo.centers.assign(static_cast<std::size_t>(g.rows()), Vec3::Zero());
  return attach_features(geo, g, cls);
}

ConceptDictionary dict_of(const Matrix& h, int cls) {
  ConceptDictionary d;
  d.concepts = h;
  d.class_id = cls;
  return d;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

FeatureMap pixels(std::initializer_list<std::initializer_list<double>> px) {
  const int c = static_cast<int>(px.begin()->size());
  FeatureMap f(1, static_cast<int>(px.size()), c);
  std::size_t k = 0;
  for (const auto& p : px)
    for (double v : p) f.values[k++] = v;
  return f;
}

}  // namespace

TEST_CASE("novum_score examples") {
  const std::vector<NeuralObjectVolume> v = {volume_of(rows({{1, 0}}), 0), volume_of(rows({{0, 1}}), 1)};
  const auto s = novum_score(pixels({{1, 0}}), v);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);

  const std::vector<NeuralObjectVolume> a = {volume_of(rows({{1, 0}, {0, 1}}), 0)};
  CHECK(novum_score(pixels({{1, 0}, {0, 1}}), a)[0] == 2.0);

  const auto z = novum_score(FeatureMap(2, 2, 2), v);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);

  CHECK(volex::test::error_of([&] { novum_score(FeatureMap(1, 1, 3), v); }) == ErrorCode::kChannelMismatch);
}

TEST_CASE("match_concepts example") {
  const double r = std::sqrt(0.5);
  const std::vector<ConceptDictionary> d = {dict_of(rows({{1, 0}, {0, 1}}), 0), dict_of(rows({{r, r}}), 1)};
  const auto m = match_concepts(pixels({{1, 0}, {0, 1}}), d);
  CHECK(m.scores[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.scores[1] == doctest::Approx(2.0 * r).epsilon(1e-12));
  CHECK(m.scores[1] == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(m.predicted == 0);
  CHECK(m.winner[0] == ConceptRef{0, 0});
  CHECK(m.winner[1] == ConceptRef{0, 1});
  CHECK(m.class_concept(0, 1) == 1);
  CHECK(m.class_similarity(1, 0) == doctest::Approx(r));
  double sum = 0.0;
  for (double c : m.confidence) sum += c;
  CHECK(std::abs(sum - 1.0) <= 1e-6);
}

TEST_CASE("single class always predicted") {
  std::mt19937_64 rng(1);
  const std::vector<ConceptDictionary> d = {dict_of(volex::test::random_matrix(3, 4, rng), 0)};
  const auto m = match_concepts(volex::test::random_features(2, 2, 4, rng), d);
  CHECK(m.predicted == 0);
  CHECK(m.confidence == std::vector<double>{1.0});
}

TEST_CASE("match_concepts errors") {
  std::vector<ConceptDictionary> d = {dict_of(Matrix(0, 2), 0)};
  CHECK(volex::test::error_of([&] { match_concepts(pixels({{1, 0}}), d); }) == ErrorCode::kEmptyDictionary);
  CHECK(volex::test::error_of([&] { match_concepts(pixels({{1, 0}}), std::span<const ConceptDictionary>{}); }) ==
        ErrorCode::kEmptyDictionary);
  d = {dict_of(rows({{1, 0, 0}}), 0)};
  CHECK(volex::test::error_of([&] { match_concepts(pixels({{1, 0}}), d); }) == ErrorCode::kChannelMismatch);
}

TEST_CASE("ties go to the lowest concept then lowest class") {
  const std::vector<ConceptDictionary> d = {dict_of(rows({{0, 1}, {1, 0}, {1, 0}}), 0),
                                            dict_of(rows({{1, 0}}), 1)};
  const auto m = match_concepts(pixels({{1, 0}}), d);
  CHECK(m.class_concept(0, 0) == 1);
  // Equal similarity: concept index decides before class index.
  CHECK(m.winner[0] == ConceptRef{1, 0});
  const std::vector<ConceptDictionary> same_index = {dict_of(rows({{0, 1}, {1, 0}}), 0),
                                                     dict_of(rows({{0, 1}, {1, 0}}), 1)};
  CHECK(match_concepts(pixels({{1, 0}}), same_index).winner[0] == ConceptRef{0, 1});
  const std::vector<ConceptDictionary> e = {dict_of(rows({{0, 1}, {1, 0}}), 0), dict_of(rows({{1, 0}}), 1)};
  const auto n = match_concepts(pixels({{1, 0}}), e);
  CHECK(n.winner[0] == ConceptRef{1, 0});
}

TEST_CASE("classify and softmax") {
  MatchResult r;
  r.scores = {2.0, 2.0 * std::sqrt(0.5)};
  const auto [y, conf] = classify(r, 1.0);
  CHECK(y == 0);
  // Frozen from an independent evaluation of exp(2)/(exp(2)+exp(sqrt 2)).
  CHECK(conf[0] == doctest::Approx(0.64239778).epsilon(1e-7));
  CHECK(conf[1] == doctest::Approx(0.35760222).epsilon(1e-7));

  r.scores = {1.5, 1.5, 1.5};
  for (double c : classify(r, 0.07).second) CHECK(c == doctest::Approx(1.0 / 3.0));

  r.scores = {1.0, 1.2};
  CHECK(classify(r, 1e-3).second[1] > 1.0 - 1e-12);
  CHECK(volex::test::error_of([&] { classify(r, 0.0); }) == ErrorCode::kInvalidArgument);
  CHECK(volex::test::error_of([&] { classify(r, -1.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("reduction: concepts equal to the Gaussians reproduce the dense score") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> hw(1, 4), ch(1, 8), kk(1, 12), cls(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = ch(rng);
    const auto f = volex::test::random_features(hw(rng), hw(rng), c, rng);
    std::vector<NeuralObjectVolume> vols;
    std::vector<ConceptDictionary> dicts;
    const int n = cls(rng);
    for (int y = 0; y < n; ++y) {
      const Matrix g = volex::test::random_matrix(kk(rng), c, rng);
      vols.push_back(volume_of(g, y));
      dicts.push_back(dict_of(g, y));
    }
    for (bool norm : {true, false}) {
      MatchOptions o;
      o.normalize = norm;
      const auto s = novum_score(f, vols, o);
      const auto m = match_concepts(f, dicts, o);
      for (int y = 0; y < n; ++y) CHECK(std::abs(s[y] - m.scores[y]) <= 1e-9);
    }
  }
}

TEST_CASE("optimized matching equals the naive triple loop") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 1 + trial % 6;
    const auto f = volex::test::random_features(1 + trial % 4, 1 + trial % 3, c, rng);
    std::vector<Matrix> banks;
    std::vector<ConceptDictionary> dicts;
    for (int y = 0; y < 1 + trial % 3; ++y) {
      banks.push_back(volex::test::random_matrix(1 + (trial + y) % 5, c, rng));
      dicts.push_back(dict_of(banks.back(), y));
    }
    const auto m = match_concepts(f, dicts);
    const auto o = oracle::naive_match(f, banks);
    for (std::size_t y = 0; y < banks.size(); ++y) CHECK(m.scores[y] == doctest::Approx(o.scores[y]).epsilon(1e-12));
    for (int i = 0; i < f.pixels(); ++i) {
      CHECK(m.winner[i].cls == o.winner_class[i]);
      CHECK(m.winner[i].index == o.winner_concept[i]);
    }
  }
}

TEST_CASE("score additivity over row partitions") {
  std::mt19937_64 rng(12);
  const auto f = volex::test::random_features(5, 3, 4, rng);
  const std::vector<ConceptDictionary> d = {dict_of(volex::test::random_matrix(4, 4, rng), 0),
                                            dict_of(volex::test::random_matrix(6, 4, rng), 1)};
  const auto whole = match_concepts(f, d).scores;
  for (int cut = 1; cut < 5; ++cut) {
    FeatureMap top(cut, 3, 4), bottom(5 - cut, 3, 4);
    std::copy(f.values.begin(), f.values.begin() + top.values.size(), top.values.begin());
    std::copy(f.values.begin() + top.values.size(), f.values.end(), bottom.values.begin());
    const auto a = match_concepts(top, d).scores;
    const auto b = match_concepts(bottom, d).scores;
    for (int y = 0; y < 2; ++y) CHECK(whole[y] == doctest::Approx(a[y] + b[y]).epsilon(1e-12));
  }
}

TEST_CASE("argmax invariance under a common positive concept scale") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = volex::test::random_features(3, 3, 5, rng);
    std::vector<ConceptDictionary> d, scaled;
    for (int y = 0; y < 3; ++y) {
      d.push_back(dict_of(volex::test::random_matrix(4, 5, rng), y));
      scaled.push_back(dict_of(d.back().concepts * 7.5, y));
    }
    for (bool norm : {true, false}) {
      MatchOptions o;
      o.normalize = norm;
      const auto a = match_concepts(f, d, o);
      const auto b = match_concepts(f, scaled, o);
      CHECK(a.predicted == b.predicted);
      for (int i = 0; i < f.pixels(); ++i) CHECK(a.winner[i] == b.winner[i]);
    }
  }
}

TEST_CASE("match result serialisation") {
  volex::test::TempDir dir("match");
  const std::vector<ConceptDictionary> d = {dict_of(rows({{1, 0}, {0, 1}}), 0), dict_of(rows({{1, 1}}), 1)};
  const auto m = match_concepts(pixels({{1, 0}, {0, 1}}), d);
  save_match_result(m, dir / "r");
  const auto w = read_tensor(dir / "r.winners.cavt");
  CHECK(w.dims == std::vector<std::uint32_t>{1, 2, 2});
  CHECK(w.data == std::vector<float>{0, 0, 0, 1});
  CHECK(read_tensor(dir / "r.scores.cavt").dims == std::vector<std::uint32_t>{2});
  CHECK(read_tensor(dir / "r.confidence.cavt").dims == std::vector<std::uint32_t>{2});
}
