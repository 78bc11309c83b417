#pragma once
// Independent reference implementations used by the unit and acceptance tests.
// None of them share code with the library beyond its public types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gazealign/analysis.hpp"
#include "gazealign/embed.hpp"

namespace oracle {

using IntVec = std::vector<std::int64_t>;

inline std::int64_t l1(const IntVec& u, const IntVec& v) {
  std::int64_t s = 0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] > v[k] ? u[k] - v[k] : v[k] - u[k];
  return s;
}

// Best local alignment score by walking every alignment path from every start
// cell, stopping anywhere. `pair(i, j)` scores aligning a[i] with b[j]; each gap
// costs `gap`. The empty alignment scores 0.
inline std::int64_t enumerate_local(std::size_t n, std::size_t m,
                                    const std::function<std::int64_t(std::size_t, std::size_t)>& pair,
                                    std::int64_t gap) {
  std::int64_t best = 0;
  std::function<void(std::size_t, std::size_t, std::int64_t)> walk = [&](std::size_t i, std::size_t j,
                                                                         std::int64_t score) {
    best = std::max(best, score);
    if (i < n && j < m) walk(i + 1, j + 1, score + pair(i, j));
    if (i < n) walk(i + 1, j, score - gap);
    if (j < m) walk(i, j + 1, score - gap);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) walk(i, j, 0);
  }
  return best;
}

inline std::int64_t feature_local(const std::vector<IntVec>& a, const std::vector<IntVec>& b, std::int64_t c,
                                  std::int64_t gap) {
  return enumerate_local(
      a.size(), b.size(), [&](std::size_t i, std::size_t j) { return c - l1(a[i], b[j]); }, gap);
}

inline std::int64_t symbolic_local(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return enumerate_local(
      a.size(), b.size(), [&](std::size_t i, std::size_t j) -> std::int64_t { return a[i] == b[j] ? 1 : -1; }, 2);
}

inline gazealign::EmbeddedScanpath to_embedded(const std::vector<IntVec>& rows, std::string subject,
                                               std::string stimulus = "img") {
  gazealign::EmbeddedScanpath e;
  e.subject_id = std::move(subject);
  e.stimulus_id = std::move(stimulus);
  e.dim = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    for (auto v : r) e.data.push_back(static_cast<float>(v));
  }
  return e;
}

// Ward by definition: at every step the merge cost of clusters I and J is
// recomputed from the original squared distances,
//   d2(I, J) = 2 nI nJ / (nI + nJ) * (S_IJ / (nI nJ) - S_II / (2 nI^2) - S_JJ / (2 nJ^2)),
// where S_XY sums squared distances over ordered pairs x in X, y in Y.
struct WardStep {
  std::size_t a, b;
  double distance;
  std::size_t size;
};

inline std::vector<WardStep> ward_by_definition(const std::vector<double>& d, const std::vector<std::string>& keys) {
  const std::size_t n = keys.size();
  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> leaves;
    std::string min_key;
  };
  std::vector<Cluster> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({i, {i}, keys[i]});
  auto sum_sq = [&](const Cluster& x, const Cluster& y) {
    double s = 0.0;
    for (auto p : x.leaves) {
      for (auto q : y.leaves) s += d[p * n + q] * d[p * n + q];
    }
    return s;
  };
  std::vector<WardStep> steps;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    std::pair<std::string, std::string> best_tie;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        const double ni = static_cast<double>(live[i].leaves.size());
        const double nj = static_cast<double>(live[j].leaves.size());
        const double v = 2.0 * ni * nj / (ni + nj) *
                         (sum_sq(live[i], live[j]) / (ni * nj) - sum_sq(live[i], live[i]) / (2.0 * ni * ni) -
                          sum_sq(live[j], live[j]) / (2.0 * nj * nj));
        auto tie = std::minmax(live[i].min_key, live[j].min_key);
        std::pair<std::string, std::string> t{tie.first, tie.second};
        if (v < best || (v == best && t < best_tie)) {
          best = v;
          best_tie = t;
          bi = i;
          bj = j;
        }
      }
    }
    Cluster merged{n + s, live[bi].leaves, std::min(live[bi].min_key, live[bj].min_key)};
    merged.leaves.insert(merged.leaves.end(), live[bj].leaves.begin(), live[bj].leaves.end());
    steps.push_back({std::min(live[bi].id, live[bj].id), std::max(live[bi].id, live[bj].id),
                     std::copysign(std::sqrt(std::fabs(best)), best), merged.leaves.size()});
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
    live[bi] = std::move(merged);
  }
  return steps;
}

// Cohen's kappa from the proportions, in long double.
inline long double kappa(const gazealign::Confusion& c) {
  long double n = 0;
  for (auto& row : c.counts) {
    for (auto v : row) n += v;
  }
  const long double po = (c.counts[0][0] + c.counts[1][1]) / n;
  long double pe = 0;
  for (std::size_t g = 0; g < 2; ++g) {
    pe += ((c.counts[g][0] + c.counts[g][1]) / n) * ((c.counts[0][g] + c.counts[1][g]) / n);
  }
  return (po - pe) / (1 - pe);
}

}  // namespace oracle
