#include "gazealign/align.hpp"

#include <algorithm>
#include <cmath>

#include "gazealign/error.hpp"
#include "gazealign/kernels.hpp"

namespace gazealign {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::Cosine: return "cosine";
  }
  return "l1";
}

Metric parse_metric(std::string_view text) {
  if (text == "l1") return Metric::L1;
  if (text == "l2") return Metric::L2;
  if (text == "cosine") return Metric::Cosine;
  throw Error(ErrorCode::ConfigError, "unknown metric '" + std::string(text) + "'");
}

void validate_params(const ScoringParams& p) {
  if (!std::isfinite(p.c) || p.c < 0.0f) throw Error(ErrorCode::ConfigError, "c must be finite and >= 0");
  if (!std::isfinite(p.gap) || p.gap < 0.0f) {
    throw Error(ErrorCode::ConfigError, "gap must be finite and >= 0");
  }
}

double feature_distance(std::span<const float> u, std::span<const float> v, Metric metric) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()) + " components");
  }
  switch (metric) {
    case Metric::L1: return kernels::l1(u, v);
    case Metric::L2: return std::sqrt(kernels::sq_l2(u, v));
    case Metric::Cosine: {
      const auto s = kernels::cosine_sums(u, v);
      if (s.uu == 0.0 || s.vv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine distance of a zero vector");
      // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for u == v it is exactly uu.
      return std::max(0.0, 1.0 - s.dot / std::sqrt(s.uu * s.vv));
    }
  }
  throw Error(ErrorCode::Internal, "unhandled metric");
}

DistanceMatrix distance_matrix(const EmbeddedScanpath& a, const EmbeddedScanpath& b, Metric metric) {
  if (a.dim != b.dim) {
    throw Error(ErrorCode::DimMismatch, a.key() + " has dim " + std::to_string(a.dim) + ", " + b.key() +
                                            " has dim " + std::to_string(b.dim));
  }
  DistanceMatrix d;
  d.rows = a.size();
  d.cols = b.size();
  d.values.resize(d.rows * d.cols);
  for (std::size_t i = 0; i < d.rows; ++i) {
    const auto u = a.row(i);
    for (std::size_t j = 0; j < d.cols; ++j) d.values[i * d.cols + j] = feature_distance(u, b.row(j), metric);
  }
  return d;
}

AlignmentResult align_distances(const DistanceMatrix& d, const ScoringParams& params, ScoreMatrix* keep) {
  validate_params(params);
  if (d.rows == 0 || d.cols == 0) throw Error(ErrorCode::EmptyScanpath, "alignment of an empty scanpath");
  const double c = params.c;
  return detail::smith_waterman(
      d.rows, d.cols, [&](std::size_t i, std::size_t j) { return c - d.at(i, j); },
      static_cast<double>(params.gap), keep);
}

AlignmentResult local_align(const EmbeddedScanpath& a, const EmbeddedScanpath& b,
                            const ScoringParams& params, ScoreMatrix* keep) {
  if (a.size() == 0 || b.size() == 0) {
    throw Error(ErrorCode::EmptyScanpath, (a.size() == 0 ? a.key() : b.key()) + " has no fixations");
  }
  return align_distances(distance_matrix(a, b, params.metric), params, keep);
}

namespace {

template <class Sub>
double replay(std::span<const AlignStep> path, Sub&& sub, double gap) {
  double s = 0.0;
  for (const AlignStep& step : path) {
    if (const auto* m = std::get_if<MatchStep>(&step)) {
      s = s + sub(m->a, m->b);
    } else {
      s = s - gap;
    }
  }
  return s;
}

}  // namespace

double replay_score(std::span<const AlignStep> path, const DistanceMatrix& d, const ScoringParams& params) {
  const double c = params.c;
  return replay(path, [&](std::size_t i, std::size_t j) { return c - d.at(i, j); },
                static_cast<double>(params.gap));
}

AlignmentResult symbolic_align(std::span<const std::string> a, std::span<const std::string> b,
                               ScoreMatrix* keep) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyScanpath, "symbolic alignment of an empty sequence");
  return detail::smith_waterman(
      a.size(), b.size(),
      [&](std::size_t i, std::size_t j) { return a[i] == b[j] ? kSymbolMatch : kSymbolMismatch; },
      kSymbolGap, keep);
}

double replay_symbolic(std::span<const AlignStep> path, std::span<const std::string> a,
                       std::span<const std::string> b) {
  return replay(path,
                [&](std::size_t i, std::size_t j) { return a[i] == b[j] ? kSymbolMatch : kSymbolMismatch; },
                kSymbolGap);
}

float calibrate_c(std::span<const EmbeddedScanpath> scanpaths, Metric metric) {
  if (scanpaths.size() < 2) {
    throw Error(ErrorCode::TooFewScanpaths, "calibration needs at least two scanpaths, got " +
                                                std::to_string(scanpaths.size()));
  }
  for (const auto& sp : scanpaths) {
    if (sp.stimulus_id != scanpaths.front().stimulus_id) {
      throw Error(ErrorCode::ConfigError, "calibration scanpaths span stimuli " +
                                              scanpaths.front().stimulus_id + " and " + sp.stimulus_id);
    }
    if (sp.size() == 0) throw Error(ErrorCode::EmptyScanpath, sp.key());
  }
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t p = 0; p < scanpaths.size(); ++p) {
    for (std::size_t q = p + 1; q < scanpaths.size(); ++q) {
      const DistanceMatrix d = distance_matrix(scanpaths[p], scanpaths[q], metric);
      for (double v : d.values) sum += v;
      count += static_cast<double>(d.values.size());
    }
  }
  return static_cast<float>(sum / count);
}

float default_gap(float c) { return 2.0f * c; }

}  // namespace gazealign
