#include <doctest.h>

#include <random>
#include <set>

#include "gazealign/analysis.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace gazealign;

namespace {

LabeledMatrix random_distances(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.5, 20.0);
  LabeledMatrix d;
  for (std::size_t i = 0; i < n; ++i) d.keys.push_back("k" + std::to_string(n - i));  // reverse key order
  d.values.assign(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) d.values[p * n + q] = d.values[q * n + p] = u(rng);
  }
  return d;
}

// Entities with `per_cluster[c][g]` members of group g (0 expert, 1 student) in cluster c.
struct Population {
  std::vector<std::string> keys;
  std::vector<std::size_t> assignments;
  std::vector<Group> truth;
};

Population population(std::array<std::array<std::size_t, 2>, 2> per_cluster) {
  Population pop;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t g = 0; g < 2; ++g) {
      for (std::size_t i = 0; i < per_cluster[c][g]; ++i) {
        pop.keys.push_back((g == 0 ? "e" : "s") + std::to_string(c) + "_" + std::to_string(1000 + i));
        pop.assignments.push_back(c);
        pop.truth.push_back(g == 0 ? Group::Expert : Group::Student);
      }
    }
  }
  return pop;
}

SimilarityMatrix scanpath_matrix(std::vector<std::string> keys, float c,
                                 const std::function<double(std::size_t, std::size_t)>& f) {
  SimilarityMatrix m;
  m.keys = std::move(keys);
  m.c = c;
  const std::size_t n = m.keys.size();
  m.values.assign(n * n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) m.at(p, q) = p == q ? c : f(std::min(p, q), std::max(p, q));
  }
  return m;
}

}  // namespace

TEST_CASE("similarity to distance") {
  SimilarityMatrix m;
  m.keys = {"a", "b"};
  m.c = 10.0f;
  m.values = {10, 4, 4, 10};
  const auto d = similarity_to_distance(m);
  CHECK(d.values == std::vector<double>{0, 6, 6, 0});
  m.values = {10, 0, 0, 10};
  CHECK(similarity_to_distance(m).at(0, 1) == 10.0);
}

TEST_CASE("ward merge sequence equals the definitional recomputation") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const auto d = random_distances(rng, n);
    const auto got = ward_cluster(d, 1).dendrogram;
    const auto want = oracle::ward_by_definition(d.values, d.keys);
    REQUIRE(got.merges.size() == want.size());
    for (std::size_t s = 0; s < want.size(); ++s) {
      CHECK(got.merges[s].cluster_a == want[s].a);
      CHECK(got.merges[s].cluster_b == want[s].b);
      CHECK(got.merges[s].size == want[s].size);
      CHECK(got.merges[s].distance == doctest::Approx(want[s].distance).epsilon(1e-9));
    }
  }
}

TEST_CASE("two tight groups") {
  // points 0, 2, 4 in one group, 1, 3, 5 in the other
  LabeledMatrix d;
  d.keys = {"a", "b", "c", "d", "e", "f"};
  d.values.assign(36, 0.0);
  for (std::size_t p = 0; p < 6; ++p) {
    for (std::size_t q = 0; q < 6; ++q) {
      if (p != q) d.values[p * 6 + q] = (p % 2 == q % 2) ? 0.5 + 0.05 * static_cast<double>(p + q) : 100.0 + static_cast<double>(p + q);
    }
  }
  const auto r = ward_cluster(d, 2);
  CHECK(r.assignments == std::vector<std::size_t>{0, 1, 0, 1, 0, 1});
  CHECK(r.dendrogram.inversions.empty());
  const auto all = ward_cluster(d, 6);
  CHECK(all.assignments == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(ward_cluster(d, 1).assignments == std::vector<std::size_t>(6, 0));
}

TEST_CASE("ward ties break on the smallest leaf keys") {
  LabeledMatrix d;
  d.keys = {"z", "y", "x", "w"};
  d.values.assign(16, 1.0);
  for (std::size_t i = 0; i < 4; ++i) d.values[i * 4 + i] = 0.0;
  const auto r = ward_cluster(d, 1).dendrogram;
  // "w" and "x" (leaves 3 and 2) are the smallest keys.
  CHECK(r.merges[0].cluster_a == 2);
  CHECK(r.merges[0].cluster_b == 3);
}

TEST_CASE("merge heights and the inversion list agree") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_distances(rng, 2 + rng() % 10);
    const auto dendro = ward_cluster(d, 1).dendrogram;
    std::vector<std::size_t> drops;
    for (std::size_t s = 1; s < dendro.merges.size(); ++s) {
      // Ward heights are monotone up to rounding for any non-negative input.
      CHECK(dendro.merges[s].distance >= dendro.merges[s - 1].distance * (1.0 - 1e-12));
      if (dendro.merges[s].distance < dendro.merges[s - 1].distance) drops.push_back(s);
    }
    CHECK(dendro.inversions == drops);
  }
}

TEST_CASE("ward input validation") {
  LabeledMatrix d;
  d.keys = {"a", "b"};
  d.values = {0, 1, 2, 0};
  CHECK_ERROR(ward_cluster(d, 1), ErrorCode::BadMatrix);
  d.values = {0, -1, -1, 0};
  CHECK_ERROR(ward_cluster(d, 1), ErrorCode::BadMatrix);
  d.values = {0, 1, 1, 0};
  CHECK_ERROR(ward_cluster(d, 3), ErrorCode::ConfigError);
  CHECK_ERROR(ward_cluster(d, 0), ErrorCode::ConfigError);
}

TEST_CASE("kappa identities") {
  Confusion perfect;
  perfect.counts = {{{30, 0}, {0, 70}}};
  CHECK(cohen_kappa(perfect) == 1.0);

  Confusion independent;
  independent.counts = {{{8, 2}, {32, 8}}};
  CHECK(std::fabs(cohen_kappa(independent)) < 1e-12);
  for (std::size_t s = 2; s <= 5; ++s) {
    Confusion scaled;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) scaled.counts[i][j] = independent.counts[i][j] * s;
    }
    CHECK(std::fabs(cohen_kappa(scaled)) < 1e-12);
  }

  Confusion worked;
  worked.counts = {{{20, 5}, {10, 65}}};
  CHECK(std::fabs(cohen_kappa(worked) - 0.625) <= 1e-12);
  CHECK(cohen_kappa(worked.transposed()) == cohen_kappa(worked));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    Confusion c;
    for (auto& row : c.counts) {
      for (auto& v : row) v = rng() % 40;
    }
    if (c.total() == 0) continue;
    try {
      const double k = cohen_kappa(c);
      CHECK(k >= -1.0);
      CHECK(k <= 1.0);
      CHECK(k == cohen_kappa(c.transposed()));
      CHECK(k == doctest::Approx(static_cast<double>(oracle::kappa(c))).epsilon(1e-12));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateMarginals);
    }
  }

  Confusion degenerate;
  degenerate.counts = {{{5, 0}, {0, 0}}};
  CHECK_ERROR(cohen_kappa(degenerate), ErrorCode::DegenerateMarginals);
}

TEST_CASE("cluster readout on the reference split") {
  SUBCASE("feature split") {
    const auto pop = population({{{1, 50}, {24, 4}}});
    const auto r = cluster_expertise_report(pop.keys, pop.assignments, pop.truth);
    CHECK(r.cluster_labels[0] == Group::Student);
    CHECK(r.cluster_labels[1] == Group::Expert);
    CHECK(r.confusion.counts[1][1] == 50);
    CHECK(r.confusion.counts[1][0] == 4);
    CHECK(r.confusion.counts[0][0] == 24);
    CHECK(r.confusion.counts[0][1] == 1);
    CHECK(r.tpr_student == doctest::Approx(50.0 / 54.0));
    CHECK(r.tpr_expert == doctest::Approx(0.96));
    CHECK(r.accuracy == doctest::Approx(74.0 / 79.0));
  }
  SUBCASE("semantic split") {
    const auto pop = population({{{1, 44}, {24, 10}}});
    const auto r = cluster_expertise_report(pop.keys, pop.assignments, pop.truth);
    CHECK(r.tpr_student == doctest::Approx(44.0 / 54.0));
    CHECK(r.accuracy == doctest::Approx(68.0 / 79.0));
  }
  SUBCASE("perfect separation") {
    const auto pop = population({{{0, 24}, {12, 0}}});
    const auto r = cluster_expertise_report(pop.keys, pop.assignments, pop.truth);
    CHECK(r.tpr_student == 1.0);
    CHECK(r.tpr_expert == 1.0);
    CHECK(r.accuracy == 1.0);
  }
  SUBCASE("tied cluster takes the label of the smallest key") {
    const std::vector<std::string> keys{"a", "b", "c", "d"};
    const std::vector<std::size_t> assign{0, 0, 1, 1};
    const std::vector<Group> truth{Group::Student, Group::Expert, Group::Student, Group::Student};
    const auto r = cluster_expertise_report(keys, assign, truth);
    CHECK(r.cluster_labels[0] == Group::Expert);
    CHECK(r.cluster_labels[1] == Group::Student);
  }
  SUBCASE("degenerate clusterings") {
    const std::vector<std::string> keys{"a", "b"};
    const std::vector<Group> truth{Group::Student, Group::Expert};
    const std::vector<std::size_t> one{0, 0}, three{0, 2};
    CHECK_ERROR(cluster_expertise_report(keys, one, truth), ErrorCode::DegenerateClustering);
    CHECK_ERROR(cluster_expertise_report(keys, three, truth), ErrorCode::DegenerateClustering);
  }
}

TEST_CASE("knn: majority of three valid neighbours") {
  // Query q@i1. Same-subject and same-image scanpaths are excluded even when
  // they are the most similar.
  const std::vector<std::string> keys{"a@i2", "b@i2", "c@i2", "d@i1", "q@i1", "q@i2", "e@i1", "f@i1"};
  const std::vector<Group> groups{Group::Expert,  Group::Expert,  Group::Student, Group::Student,
                                  Group::Student, Group::Student, Group::Student, Group::Student};
  auto sim = scanpath_matrix(keys, 10.0f, [](std::size_t p, std::size_t q) {
    if (q == 4) return std::array<double, 6>{9, 8, 7, 9.5, 10, 9.9}[p];
    return 1.0;
  });
  sim.level = MatrixLevel::Scanpath;
  const auto r = knn_loo_classify(sim, groups, 3);
  const auto& pred = r.predictions[4];
  CHECK(pred.key == "q@i1");
  CHECK(pred.neighbors == std::vector<std::string>{"a@i2", "b@i2", "c@i2"});
  CHECK(pred.predicted == Group::Expert);
  CHECK_ERROR(knn_loo_classify(sim, groups, 2), ErrorCode::ConfigError);
  CHECK_ERROR(knn_loo_classify(sim, groups, 5), ErrorCode::TooFewCandidates);
}

TEST_CASE("knn: separated groups classify perfectly") {
  std::vector<std::string> keys;
  std::vector<Group> groups;
  for (int s = 0; s < 8; ++s) {
    for (int i = 0; i < 3; ++i) {
      keys.push_back((s < 4 ? "e" : "s") + std::to_string(s) + "@img" + std::to_string(i));
      groups.push_back(s < 4 ? Group::Expert : Group::Student);
    }
  }
  auto sim = scanpath_matrix(keys, 10.0f, [&](std::size_t p, std::size_t q) {
    return groups[p] == groups[q] ? 8.0 - 0.01 * static_cast<double>(p) : 2.0 + 0.01 * static_cast<double>(q);
  });
  sim.level = MatrixLevel::Scanpath;
  const auto r = knn_loo_classify(sim, groups);
  CHECK(r.overall.accuracy == 1.0);
  REQUIRE(r.overall.kappa.has_value());
  CHECK(*r.overall.kappa == 1.0);
  CHECK(r.per_stimulus.size() == 3);
  CHECK(r.predictions.size() == keys.size());
}

TEST_CASE("archetypes") {
  SUBCASE("one scanpath closest to everyone") {
    const std::vector<std::string> keys{"a", "b", "c", "d", "e"};
    auto m = scanpath_matrix(keys, 10.0f, [](std::size_t p, std::size_t q) { return p == 2 || q == 2 ? 9.0 : 1.0; });
    const auto r = archetype_ranking(m, 1);
    CHECK(r.front().key == "c");
    CHECK(r.front().frequency == 4);
  }
  SUBCASE("all ties fall back to key order") {
    const std::vector<std::string> keys{"d", "b", "a", "c"};
    auto m = scanpath_matrix(keys, 10.0f, [](std::size_t, std::size_t) { return 3.0; });
    const auto r = archetype_ranking(m, 1);
    // a is first choice of b, c, d; b is first choice of a.
    REQUIRE(r.size() == 4);
    CHECK(r[0].key == "a");
    CHECK(r[0].frequency == 3);
    CHECK(r[1].key == "b");
    CHECK(r[1].frequency == 1);
    CHECK(r[2].frequency == 0);
    CHECK(r[2].key == "c");
  }
  SUBCASE("brute-force recount") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> u(0, 6);
    std::vector<std::string> keys;
    for (int i = 0; i < 10; ++i) keys.push_back("k" + std::to_string(i));
    std::vector<double> raw(100);
    for (auto& v : raw) v = u(rng);
    auto m = scanpath_matrix(keys, 10.0f, [&](std::size_t p, std::size_t q) { return raw[p * 10 + q]; });
    std::map<std::string, std::size_t> freq;
    for (std::size_t q = 0; q < 10; ++q) {
      std::vector<std::pair<double, std::string>> ranked;
      for (std::size_t p = 0; p < 10; ++p) {
        if (p != q) ranked.emplace_back(-m.at(q, p), keys[p]);
      }
      std::sort(ranked.begin(), ranked.end());
      for (std::size_t i = 0; i < 3; ++i) ++freq[ranked[i].second];
    }
    for (const auto& e : archetype_ranking(m, 3)) CHECK(e.frequency == freq[e.key]);
  }
}
