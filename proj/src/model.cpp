#include "gazealign/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "gazealign/error.hpp"
#include "gazealign/text_io.hpp"

namespace gazealign {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Group g) {
  switch (g) {
    case Group::Expert: return "expert";
    case Group::Student: return "student";
    case Group::Unknown: return "unknown";
  }
  return "unknown";
}

Group parse_group(std::string_view text) {
  if (text == "expert") return Group::Expert;
  if (text == "student") return Group::Student;
  if (text == "unknown") return Group::Unknown;
  throw Error(ErrorCode::ParseError, "unknown group '" + std::string(text) + "'");
}

std::string scanpath_key(std::string_view subject_id, std::string_view stimulus_id) {
  std::string key(subject_id);
  key += '@';
  key += stimulus_id;
  return key;
}

namespace {

void check_id(std::string_view id, std::string_view what) {
  if (id.empty()) throw Error(ErrorCode::ParseError, std::string(what) + " is empty");
  if (id.find_first_of("@,\n\r") != std::string_view::npos) {
    throw Error(ErrorCode::ParseError,
                std::string(what) + " '" + std::string(id) + "' contains a reserved character");
  }
}

}  // namespace

void validate_scanpath(const Scanpath& sp) {
  check_id(sp.subject_id, "subject_id");
  check_id(sp.stimulus_id, "stimulus_id");
  if (sp.fixations.empty()) throw Error(ErrorCode::EmptyScanpath, sp.key());
  for (std::size_t i = 0; i < sp.fixations.size(); ++i) {
    const Fixation& f = sp.fixations[i];
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || f.x < 0.0 || f.y < 0.0) {
      throw Error(ErrorCode::ParseError, sp.key() + ": fixation " + std::to_string(i) +
                                             " has invalid coordinates");
    }
    if (!std::isfinite(f.start_ms) || !std::isfinite(f.duration_ms) || !(f.duration_ms > 0.0)) {
      throw Error(ErrorCode::ParseError,
                  sp.key() + ": fixation " + std::to_string(i) + " has invalid timing");
    }
    if (f.index != i) {
      throw Error(ErrorCode::OrderError, sp.key() + ": expected index " + std::to_string(i) +
                                             ", found " + std::to_string(f.index));
    }
    if (i > 0 && f.start_ms < sp.fixations[i - 1].start_ms) {
      throw Error(ErrorCode::OrderError,
                  sp.key() + ": start_ms decreases at index " + std::to_string(i));
    }
  }
  if (sp.aoi_labels && sp.aoi_labels->size() != sp.fixations.size()) {
    throw Error(ErrorCode::ParseError, sp.key() + ": aoi label count differs from fixation count");
  }
}

// ---------------------------------------------------------------------------
// Scanpath CSV

namespace {

constexpr std::string_view kHeader = "subject_id,group,stimulus_id,index,x,y,start_ms,duration_ms";
constexpr std::string_view kHeaderAoi =
    "subject_id,group,stimulus_id,index,x,y,start_ms,duration_ms,aoi_label";

struct Row {
  Fixation fixation;
  std::string label;
};

}  // namespace

std::vector<Scanpath> parse_scanpaths_csv(std::string_view text, std::string_view source) {
  const std::string src(source);
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::ParseError, src + ": missing header");

  std::string_view header = trim(lines.front());
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  bool with_aoi = false;
  if (header == kHeaderAoi) {
    with_aoi = true;
  } else if (header != kHeader) {
    throw Error(ErrorCode::ParseError, src + ": unexpected header '" + std::string(header) + "'");
  }
  const std::size_t ncols = with_aoi ? 9 : 8;

  struct Builder {
    Group group;
    std::vector<Row> rows;
  };
  std::map<std::pair<std::string, std::string>, Builder> groups;

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = src + ":" + std::to_string(ln + 1);
    std::string_view line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != ncols) {
      throw Error(ErrorCode::ParseError, where + ": expected " + std::to_string(ncols) +
                                             " columns, found " + std::to_string(cols.size()));
    }
    const std::string subject(trim(cols[0]));
    const std::string stimulus(trim(cols[2]));
    check_id(subject, where + ": subject_id");
    check_id(stimulus, where + ": stimulus_id");
    const Group group = parse_group(trim(cols[1]));

    Row row;
    if (!parse_size(cols[3], row.fixation.index)) {
      throw Error(ErrorCode::ParseError, where + ": bad index");
    }
    if (!parse_double(cols[4], row.fixation.x) || !parse_double(cols[5], row.fixation.y) ||
        !parse_double(cols[6], row.fixation.start_ms) ||
        !parse_double(cols[7], row.fixation.duration_ms)) {
      throw Error(ErrorCode::ParseError, where + ": bad numeric field");
    }
    const Fixation& f = row.fixation;
    if (!std::isfinite(f.x) || !std::isfinite(f.y) || f.x < 0.0 || f.y < 0.0) {
      throw Error(ErrorCode::ParseError, where + ": coordinates must be finite and non-negative");
    }
    if (!std::isfinite(f.start_ms) || !std::isfinite(f.duration_ms) || !(f.duration_ms > 0.0)) {
      throw Error(ErrorCode::ParseError, where + ": duration_ms must be positive");
    }
    if (with_aoi) row.label = std::string(trim(cols[8]));

    auto [it, inserted] = groups.try_emplace({subject, stimulus}, Builder{group, {}});
    if (!inserted && it->second.group != group) {
      throw Error(ErrorCode::ParseError, where + ": group differs from earlier rows of " +
                                             scanpath_key(subject, stimulus));
    }
    it->second.rows.push_back(std::move(row));
  }

  std::vector<Scanpath> out;
  out.reserve(groups.size());
  for (auto& [ids, b] : groups) {
    Scanpath sp;
    sp.subject_id = ids.first;
    sp.stimulus_id = ids.second;
    sp.group = b.group;
    std::stable_sort(b.rows.begin(), b.rows.end(), [](const Row& a, const Row& c) {
      return a.fixation.index < c.fixation.index;
    });
    if (with_aoi) sp.aoi_labels.emplace();
    for (std::size_t i = 0; i < b.rows.size(); ++i) {
      if (b.rows[i].fixation.index != i) {
        throw Error(ErrorCode::OrderError, src + ": " + sp.key() + " indices are not consecutive from 0");
      }
      sp.fixations.push_back(b.rows[i].fixation);
      if (with_aoi) sp.aoi_labels->push_back(std::move(b.rows[i].label));
    }
    validate_scanpath(sp);
    out.push_back(std::move(sp));
  }
  std::sort(out.begin(), out.end(),
            [](const Scanpath& a, const Scanpath& b) { return a.key() < b.key(); });
  return out;
}

std::vector<Scanpath> load_scanpaths(const fs::path& path) {
  return parse_scanpaths_csv(read_text_file(path), path.string());
}

std::string format_scanpaths_csv(std::span<const Scanpath> scanpaths) {
  const bool with_aoi = std::any_of(scanpaths.begin(), scanpaths.end(),
                                    [](const Scanpath& s) { return s.aoi_labels.has_value(); });
  if (with_aoi && !std::all_of(scanpaths.begin(), scanpaths.end(),
                               [](const Scanpath& s) { return s.aoi_labels.has_value(); })) {
    throw Error(ErrorCode::ConfigError, "either all or no scanpaths in one file carry AOI labels");
  }
  std::ostringstream out;
  out << (with_aoi ? kHeaderAoi : kHeader) << '\n';
  for (const Scanpath& sp : scanpaths) {
    validate_scanpath(sp);
    for (std::size_t i = 0; i < sp.fixations.size(); ++i) {
      const Fixation& f = sp.fixations[i];
      out << sp.subject_id << ',' << to_string(sp.group) << ',' << sp.stimulus_id << ','
          << f.index << ',' << format_roundtrip(f.x) << ',' << format_roundtrip(f.y) << ','
          << format_roundtrip(f.start_ms) << ',' << format_roundtrip(f.duration_ms);
      if (with_aoi) out << ',' << (*sp.aoi_labels)[i];
      out << '\n';
    }
  }
  return out.str();
}

void write_scanpaths_csv(const fs::path& path, std::span<const Scanpath> scanpaths) {
  write_text_file(path, format_scanpaths_csv(scanpaths));
}

Scanpath truncate_to_window(const Scanpath& sp, double window_ms) {
  if (!(window_ms > 0.0)) throw Error(ErrorCode::ConfigError, "window_ms must be positive");
  Scanpath out = sp;
  std::size_t keep = 0;
  while (keep < sp.fixations.size() && sp.fixations[keep].start_ms < window_ms) ++keep;
  if (keep == 0) {
    throw Error(ErrorCode::EmptyScanpath,
                sp.key() + ": no fixation starts inside the " + format_sig9(window_ms) + " ms window");
  }
  out.fixations.resize(keep);
  if (out.aoi_labels) out.aoi_labels->resize(keep);
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

const StimulusEntry* DatasetManifest::find_stimulus(std::string_view id) const {
  for (const auto& s : stimuli) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<Scanpath> load_all(const DatasetManifest& manifest) {
  std::vector<Scanpath> all;
  std::map<std::string, fs::path> seen;
  for (const auto& file : manifest.scanpath_files) {
    for (auto& sp : load_scanpaths(file)) {
      if (!manifest.find_stimulus(sp.stimulus_id)) {
        throw Error(ErrorCode::UnknownStimulus,
                    file.string() + ": stimulus '" + sp.stimulus_id + "' is not in the manifest");
      }
      auto [it, inserted] = seen.emplace(sp.key(), file);
      if (!inserted) {
        throw Error(ErrorCode::DuplicateKey, sp.key() + " appears in " + it->second.string() +
                                                 " and " + file.string());
      }
      all.push_back(std::move(sp));
    }
  }
  std::sort(all.begin(), all.end(),
            [](const Scanpath& a, const Scanpath& b) { return a.key() < b.key(); });
  return all;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path) {
  const std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  DatasetManifest m;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "manifest root must be an object");
    for (const auto& s : doc.at("stimuli")) {
      StimulusEntry e{s.at("id").get<std::string>(), resolve(base, s.at("image").get<std::string>())};
      check_id(e.id, "stimulus id");
      if (m.find_stimulus(e.id)) throw Error(ErrorCode::DuplicateKey, "stimulus '" + e.id + "' listed twice");
      m.stimuli.push_back(std::move(e));
    }
    for (const auto& s : doc.at("scanpaths")) {
      m.scanpath_files.push_back(resolve(base, s.get<std::string>()));
    }
    if (doc.contains("embeddings") && !doc.at("embeddings").is_null()) {
      m.embedding_dir = resolve(base, doc.at("embeddings").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  for (const auto& s : m.stimuli) {
    if (!fs::is_regular_file(s.image)) {
      throw Error(ErrorCode::MissingFile, "stimulus image " + s.image.string());
    }
  }
  for (const auto& f : m.scanpath_files) {
    if (!fs::is_regular_file(f)) throw Error(ErrorCode::MissingFile, "scanpath file " + f.string());
  }
  if (m.embedding_dir && !fs::is_directory(*m.embedding_dir)) {
    throw Error(ErrorCode::MissingFile, "embedding directory " + m.embedding_dir->string());
  }
  load_all(m);
  return m;
}

std::vector<Scanpath> load_dataset_scanpaths(const DatasetManifest& manifest) {
  return load_all(manifest);
}

void write_manifest(const fs::path& path, const DatasetManifest& manifest) {
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    return (p.is_absolute() && !base.empty()) ? fs::relative(p, fs::absolute(base)).generic_string()
                                              : p.generic_string();
  };
  json doc;
  doc["stimuli"] = json::array();
  for (const auto& s : manifest.stimuli) doc["stimuli"].push_back({{"id", s.id}, {"image", rel(s.image)}});
  doc["scanpaths"] = json::array();
  for (const auto& f : manifest.scanpath_files) doc["scanpaths"].push_back(rel(f));
  if (manifest.embedding_dir) doc["embeddings"] = rel(*manifest.embedding_dir);
  write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace gazealign
