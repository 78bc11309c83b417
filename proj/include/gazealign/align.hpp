#pragma once
// Local alignment of embedded scanpaths.
//
// The score matrix M has (n+1) x (m+1) cells; row i walks fixations of A,
// column j walks fixations of B, row 0 and column 0 are zero:
//
//   M[i][j] = max( M[i-1][j-1] + c - dist(A_i, B_j),   match
//                  M[i-1][j]   - gap,                  gap in B (A_i unmatched)
//                  M[i][j-1]   - gap,                  gap in A (B_j unmatched)
//                  0 )
//
// The similarity is max(M) / min(n, m).
//
// c and gap are binary32 quantities accumulated in double. With c exactly
// representable in 24 bits, k * c is exact for any realistic k, which makes
// self-similarity equal c bit-for-bit.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gazealign/embed.hpp"

namespace gazealign {

enum class Metric { L1, L2, Cosine };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);  // "l1", "l2", "cosine"

struct ScoringParams {
  float c = 0.0f;
  float gap = 0.0f;
  Metric metric = Metric::L1;
};

void validate_params(const ScoringParams& p);

// L1 = sum |u-v|; L2 = sqrt(sum (u-v)^2); Cosine = 1 - u.v / (|u||v|), floored at 0.
double feature_distance(std::span<const float> u, std::span<const float> v, Metric metric);

// Pairwise fixation distances; computed once per alignment so the DP reads
// each cell in O(1).
struct DistanceMatrix {
  std::size_t rows = 0;  // fixations of A
  std::size_t cols = 0;  // fixations of B
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

DistanceMatrix distance_matrix(const EmbeddedScanpath& a, const EmbeddedScanpath& b, Metric metric);

// Path steps use 0-based fixation indices.
struct MatchStep {
  std::size_t a = 0;
  std::size_t b = 0;
  bool operator==(const MatchStep&) const = default;
};
struct GapInA {  // B's fixation b is aligned against a gap in A
  std::size_t b = 0;
  bool operator==(const GapInA&) const = default;
};
struct GapInB {  // A's fixation a is aligned against a gap in B
  std::size_t a = 0;
  bool operator==(const GapInB&) const = default;
};
using AlignStep = std::variant<MatchStep, GapInA, GapInB>;

struct ScoreMatrix {
  std::size_t rows = 0;  // n + 1
  std::size_t cols = 0;  // m + 1
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

struct AlignmentResult {
  double score = 0.0;       // max(M)
  double normalized = 0.0;  // score / min(n, m)
  std::size_t argmax_row = 0;
  std::size_t argmax_col = 0;
  std::vector<AlignStep> path;  // from the first aligned pair to the argmax cell
};

namespace detail {

enum class Move : std::uint8_t { Stop, Match, GapInB, GapInA };

// Generic Smith-Waterman core. `sub(i, j)` returns the match increment for
// 0-based positions; `gap` is the (positive) penalty. Ties prefer
// Match > GapInB > GapInA; the argmax is the first maximum in row-major order.
template <class Substitution>
AlignmentResult smith_waterman(std::size_t n, std::size_t m, Substitution&& sub, double gap,
                               ScoreMatrix* keep) {
  const std::size_t cols = m + 1;
  std::vector<double> M((n + 1) * cols, 0.0);
  std::vector<Move> moves((n + 1) * cols, Move::Stop);
  AlignmentResult r;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double best = M[(i - 1) * cols + (j - 1)] + sub(i - 1, j - 1);
      Move move = Move::Match;
      const double up = M[(i - 1) * cols + j] - gap;
      if (up > best) {
        best = up;
        move = Move::GapInB;
      }
      const double left = M[i * cols + (j - 1)] - gap;
      if (left > best) {
        best = left;
        move = Move::GapInA;
      }
      if (!(best > 0.0)) {
        best = 0.0;
        move = Move::Stop;
      }
      M[i * cols + j] = best;
      moves[i * cols + j] = move;
      if (best > r.score) {
        r.score = best;
        r.argmax_row = i;
        r.argmax_col = j;
      }
    }
  }
  std::size_t i = r.argmax_row, j = r.argmax_col;
  while (M[i * cols + j] > 0.0) {
    switch (moves[i * cols + j]) {
      case Move::Match:
        r.path.emplace_back(MatchStep{i - 1, j - 1});
        --i;
        --j;
        break;
      case Move::GapInB:
        r.path.emplace_back(GapInB{i - 1});
        --i;
        break;
      case Move::GapInA:
        r.path.emplace_back(GapInA{j - 1});
        --j;
        break;
      case Move::Stop:
        i = 0;
        j = 0;
        break;
    }
  }
  std::reverse(r.path.begin(), r.path.end());
  r.normalized = r.score / static_cast<double>(std::min(n, m));
  if (keep) {
    keep->rows = n + 1;
    keep->cols = cols;
    keep->values = std::move(M);
  }
  return r;
}

}  // namespace detail

AlignmentResult align_distances(const DistanceMatrix& d, const ScoringParams& params,
                                ScoreMatrix* keep = nullptr);
AlignmentResult local_align(const EmbeddedScanpath& a, const EmbeddedScanpath& b,
                            const ScoringParams& params, ScoreMatrix* keep = nullptr);

// Re-accumulates a path's score in DP order: 0, then +(c - d) per match and
// -gap per gap step.
double replay_score(std::span<const AlignStep> path, const DistanceMatrix& d, const ScoringParams& params);

// Baseline over hand-labelled AOI sequences: +1 match, -1 mismatch, -2 gap.
inline constexpr double kSymbolMatch = 1.0;
inline constexpr double kSymbolMismatch = -1.0;
inline constexpr double kSymbolGap = 2.0;

AlignmentResult symbolic_align(std::span<const std::string> a, std::span<const std::string> b,
                               ScoreMatrix* keep = nullptr);
double replay_symbolic(std::span<const AlignStep> path, std::span<const std::string> a,
                       std::span<const std::string> b);

// Mean cross-scanpath fixation distance over all unordered scanpath pairs on
// one stimulus, rounded to binary32.
float calibrate_c(std::span<const EmbeddedScanpath> scanpaths, Metric metric);

// gap = 2c
float default_gap(float c);

}  // namespace gazealign
