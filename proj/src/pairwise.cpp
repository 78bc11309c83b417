#include "gazealign/pairwise.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gazealign/error.hpp"
#include "gazealign/image_io.hpp"
#include "gazealign/parallel.hpp"
#include "gazealign/text_io.hpp"

namespace gazealign {

std::string_view to_string(MatrixLevel level) {
  return level == MatrixLevel::Scanpath ? "scanpath" : "subject";
}

std::pair<std::string, std::string> split_scanpath_key(std::string_view key) {
  const auto at = key.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == key.size()) {
    throw Error(ErrorCode::ParseError, "'" + std::string(key) + "' is not a subject@stimulus key");
  }
  return {std::string(key.substr(0, at)), std::string(key.substr(at + 1))};
}

SimilarityMatrix all_pairs(std::span<const EmbeddedScanpath> scanpaths, const ScoringParams& params,
                           std::size_t workers) {
  validate_params(params);
  if (workers == 0) throw Error(ErrorCode::ConfigError, "workers must be >= 1");
  if (!scanpaths.empty()) check_uniform_dim(scanpaths);

  SimilarityMatrix m;
  m.level = MatrixLevel::Scanpath;
  m.c = params.c;
  m.metric = params.metric;
  const std::size_t n = scanpaths.size();
  m.keys.reserve(n);
  for (const auto& sp : scanpaths) m.keys.push_back(sp.key());
  m.values.assign(n * n, 0.0);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - (n > 0 ? 1 : 0)) / 2);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) pairs.emplace_back(p, q);
  }
  std::vector<double> slots(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t k) {
    const auto [p, q] = pairs[k];
    try {
      slots[k] = local_align(scanpaths[p], scanpaths[q], params).normalized;
    } catch (const Error& e) {
      throw Error(e.code(), "pair (" + m.keys[p] + ", " + m.keys[q] + "): " + e.what());
    }
  });

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [p, q] = pairs[k];
    m.at(p, q) = slots[k];
    m.at(q, p) = slots[k];
  }
  for (std::size_t p = 0; p < n; ++p) m.at(p, p) = params.c;
  return m;
}

SimilarityMatrix aggregate_by_subject(const SimilarityMatrix& m) {
  if (m.level != MatrixLevel::Scanpath) {
    throw Error(ErrorCode::ConfigError, "aggregation needs a scanpath-level matrix");
  }
  // subject -> stimulus -> index into m.keys
  std::map<std::string, std::map<std::string, std::size_t>> index;
  for (std::size_t p = 0; p < m.size(); ++p) {
    auto [subject, stimulus] = split_scanpath_key(m.keys[p]);
    index[subject][stimulus] = p;
  }

  SimilarityMatrix out;
  out.level = MatrixLevel::Subject;
  out.c = m.c;
  out.metric = m.metric;
  for (const auto& [subject, _] : index) out.keys.push_back(subject);
  const std::size_t n = out.keys.size();
  out.values.assign(n * n, 0.0);

  for (std::size_t s = 0; s < n; ++s) {
    out.at(s, s) = m.c;
    const auto& seen_s = index[out.keys[s]];
    for (std::size_t t = s + 1; t < n; ++t) {
      const auto& seen_t = index[out.keys[t]];
      double sum = 0.0, lo = 0.0, hi = 0.0;
      std::size_t count = 0;
      for (const auto& [stimulus, p] : seen_s) {
        const auto it = seen_t.find(stimulus);
        if (it == seen_t.end()) continue;
        const double v = m.at(p, it->second);
        lo = count == 0 ? v : std::min(lo, v);
        hi = count == 0 ? v : std::max(hi, v);
        sum += v;
        ++count;
      }
      if (count == 0) {
        throw Error(ErrorCode::NoSharedStimuli, out.keys[s] + " and " + out.keys[t]);
      }
      // The mean of values in [lo, hi] lies in [lo, hi]; clamp away rounding.
      const double mean = std::clamp(sum / static_cast<double>(count), lo, hi);
      out.at(s, t) = mean;
      out.at(t, s) = mean;
    }
  }
  return out;
}

std::string format_matrix_csv(const SimilarityMatrix& m) {
  std::ostringstream out;
  out << "key";
  for (const auto& k : m.keys) out << ',' << k;
  out << '\n';
  for (std::size_t p = 0; p < m.size(); ++p) {
    out << m.keys[p];
    for (std::size_t q = 0; q < m.size(); ++q) out << ',' << format_sig9(m.at(p, q));
    out << '\n';
  }
  return out.str();
}

void export_matrix_csv(const std::filesystem::path& path, const SimilarityMatrix& m) {
  write_text_file(path, format_matrix_csv(m));
}

SimilarityMatrix read_matrix_csv(const std::filesystem::path& path, MatrixLevel level, float c,
                                 Metric metric) {
  const std::string text = read_text_file(path);
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::ParseError, path.string() + ": empty matrix file");
  const auto header = split(trim(lines.front()), ',');
  if (header.empty() || header.front() != "key") {
    throw Error(ErrorCode::ParseError, path.string() + ": header must start with 'key'");
  }
  SimilarityMatrix m;
  m.level = level;
  m.c = c;
  m.metric = metric;
  for (std::size_t i = 1; i < header.size(); ++i) m.keys.emplace_back(trim(header[i]));
  const std::size_t n = m.keys.size();
  if (lines.size() != n + 1) throw Error(ErrorCode::ParseError, path.string() + ": row count differs from header");
  m.values.resize(n * n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto cols = split(trim(lines[p + 1]), ',');
    if (cols.size() != n + 1 || trim(cols[0]) != m.keys[p]) {
      throw Error(ErrorCode::ParseError, path.string() + ": malformed row " + std::to_string(p + 2));
    }
    for (std::size_t q = 0; q < n; ++q) {
      if (!parse_double(cols[q + 1], m.at(p, q))) {
        throw Error(ErrorCode::ParseError, path.string() + ": bad value in row " + std::to_string(p + 2));
      }
    }
  }
  return m;
}

std::vector<std::uint8_t> heatmap_pixels(const SimilarityMatrix& m) {
  const std::size_t n = m.size();
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      const double v = m.at(p, q);
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  auto shade = [&](double v) -> std::uint8_t {
    if (!(hi > lo)) return 128;  // constant off-diagonal: uniform mid gray
    const double t = (v - lo) / (hi - lo);
    return static_cast<std::uint8_t>(std::clamp(t * 255.0 + 0.5, 0.0, 255.0));
  };
  std::vector<std::uint8_t> px(n * n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) px[p * n + q] = shade(p == q ? hi : m.at(p, q));
  }
  return px;
}

void export_heatmap_pgm(const std::filesystem::path& path, const SimilarityMatrix& m) {
  if (m.size() == 0) throw Error(ErrorCode::ConfigError, "cannot render an empty matrix");
  write_pgm(path, m.size(), m.size(), heatmap_pixels(m));
}

void export_matrix_sidecar(const std::filesystem::path& path, const SimilarityMatrix& m) {
  nlohmann::ordered_json doc;
  doc["level"] = to_string(m.level);
  doc["c"] = round_sig9(m.c);
  doc["metric"] = to_string(m.metric);
  doc["keys"] = m.keys;
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace gazealign
