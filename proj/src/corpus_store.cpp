#include "claraprint/corpus_store.h"

#include <algorithm>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "json.hpp"

namespace claraprint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(std::string_view text, std::string_view origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(fmt::format("{}:{}:{}: {}", origin, line, col, e.what()));
  }
}

const json& require(const json& obj, std::string_view key, std::string_view origin) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(fmt::format("{}: missing required field '{}'", origin, key));
  return *it;
}

std::string require_string(const json& obj, std::string_view key, std::string_view origin) {
  const json& v = require(obj, key, origin);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) {
    throw SchemaError(fmt::format("{}: field '{}' must be a non-empty string", origin, key));
  }
  return v.get<std::string>();
}

double require_number(const json& obj, std::string_view key, std::string_view origin) {
  const json& v = require(obj, key, origin);
  if (!v.is_number()) throw SchemaError(fmt::format("{}: field '{}' must be a number", origin, key));
  return v.get<double>();
}

Event parse_event(const json& e, SourceKind kind, std::string_view origin, std::size_t index) {
  const std::string where = fmt::format("{}: events[{}]", origin, index);
  if (!e.is_object()) throw SchemaError(where + " must be an object");
  Event event;
  event.time_s = require_number(e, "time_s", where);
  if (!(event.time_s >= 0.0)) throw SchemaError(where + ": time_s must be >= 0");
  if (auto it = e.find("duration_s"); it != e.end()) {
    if (!it->is_number() || !(it->get<double>() >= 0.0)) {
      throw SchemaError(where + ": duration_s must be a number >= 0");
    }
    event.duration_s = it->get<double>();
  }
  const json& value = require(e, "value", where);
  if (kind == SourceKind::chord) {
    if (!value.is_string()) throw SchemaError(where + ": chord sources need a string label");
    event.value = value.get<std::string>();
  } else {
    if (!value.is_number()) throw SchemaError(where + ": melody sources need a frequency");
    event.value = value.get<double>();
  }
  if (auto it = e.find("confidence"); it != e.end() && !it->is_null()) {
    if (!it->is_number()) throw SchemaError(where + ": confidence must be a number");
    event.confidence = it->get<double>();
    if (!(event.confidence >= 0.0 && event.confidence <= 1.0)) {
      throw SchemaError(where + ": confidence must be in [0, 1]");
    }
  }
  return event;
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string make_doc_id(std::string_view recording_id, SourceAlgo source, int duration_s) {
  return fmt::format("{}:{}:{}", recording_id, to_string(source), duration_s);
}

void SnapshotConfig::validate() const {
  if (durations.empty()) throw ConfigError("at least one duration is required");
  for (int d : durations) EncoderConfig{d, confidence_min}.validate();
  bm25.validate();
}

AnnotationDoc parse_annotation(std::string_view json_text, std::string_view origin) {
  const json root = parse_json(json_text, origin);
  if (!root.is_object()) throw SchemaError(fmt::format("{}: top level must be an object", origin));

  AnnotationDoc doc;
  doc.recording_id = require_string(root, "recording_id", origin);
  doc.work_id = require_string(root, "work_id", origin);
  const std::string tag = require_string(root, "source", origin);
  auto source = parse_source(tag);
  if (!source) throw SchemaError(fmt::format("{}: unknown source '{}'", origin, tag));
  doc.source = *source;

  if (auto it = root.find("start_at_s"); it != root.end()) {
    if (!it->is_number() || !(it->get<double>() >= 0.0)) {
      throw SchemaError(fmt::format("{}: start_at_s must be a number >= 0", origin));
    }
    doc.start_at_s = it->get<double>();
  }
  if (auto it = root.find("live"); it != root.end()) {
    if (!it->is_boolean()) throw SchemaError(fmt::format("{}: live must be a boolean", origin));
    doc.live = it->get<bool>();
  }
  for (const char* key : {"title", "composer"}) {
    if (auto it = root.find(key); it != root.end() && it->is_string()) {
      doc.metadata[key] = it->get<std::string>();
    }
  }

  const json& events = require(root, "events", origin);
  if (!events.is_array()) throw SchemaError(fmt::format("{}: events must be an array", origin));
  const SourceKind kind = kind_of(doc.source);
  doc.events.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    doc.events.push_back(parse_event(events[i], kind, origin, i));
  }
  std::stable_sort(doc.events.begin(), doc.events.end(),
                   [](const Event& a, const Event& b) { return a.time_s < b.time_s; });
  return doc;
}

std::vector<AnnotationDoc> load_annotations(const fs::path& path) {
  std::vector<AnnotationDoc> out;
  if (fs::is_directory(path)) {
    for (const auto& file : json_files(path)) out.push_back(parse_annotation(read_file(file), file.string()));
  } else {
    out.push_back(parse_annotation(read_file(path), path.string()));
  }
  return out;
}

AnnotationBatch load_annotation_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(fmt::format("'{}' is not a readable directory", dir.string()));
  std::vector<fs::path> files;
  try {
    files = json_files(dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(fmt::format("cannot list '{}': {}", dir.string(), e.what()));
  }

  struct Slot {
    std::optional<AnnotationDoc> doc;
    std::string error;
  };
  std::vector<Slot> slots(files.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), files.size()));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < files.size(); i += workers) {
        try {
          slots[i].doc = parse_annotation(read_file(files[i]), files[i].string());
        } catch (const std::exception& e) {
          slots[i].error = e.what();
        }
      }
    }));
  }
  for (auto& t : tasks) t.get();

  AnnotationBatch batch;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (slots[i].doc) {
      batch.docs.push_back(std::move(*slots[i].doc));
    } else {
      batch.failures.push_back({files[i], std::move(slots[i].error)});
    }
  }
  return batch;
}

std::vector<Clique> derive_cliques(std::span<const DocRecord> docs, std::span<const Clique> known) {
  std::map<std::string, std::set<std::string>> members;
  for (const auto& d : docs) members[d.work_id].insert(d.meta.recording_id);
  std::unordered_map<std::string, const Clique*> by_work;
  for (const auto& c : known) by_work.emplace(c.work_id, &c);

  std::vector<Clique> cliques;
  for (auto& [work_id, ids] : members) {
    Clique c;
    c.work_id = work_id;
    c.recording_ids.assign(ids.begin(), ids.end());
    if (auto it = by_work.find(work_id); it != by_work.end()) c.metadata = it->second->metadata;
    cliques.push_back(std::move(c));
  }
  return cliques;
}

Materialized materialize(std::span<const AnnotationDoc> annotations, const SnapshotConfig& config) {
  config.validate();
  Materialized out;
  out.snapshot.config = config;
  auto& report = out.report;

  std::set<std::string> seen_ids;
  std::unordered_map<std::string, std::string> work_of_recording;
  std::map<std::string, std::map<std::string, std::string>> metadata;

  for (const auto& ann : annotations) {
    auto [wit, inserted] = work_of_recording.emplace(ann.recording_id, ann.work_id);
    if (!inserted && wit->second != ann.work_id) {
      report.warnings.push_back(fmt::format("recording '{}' claims work '{}' but was first seen under '{}'; skipped",
                                            ann.recording_id, ann.work_id, wit->second));
      continue;
    }
    auto& meta = metadata[ann.work_id];
    for (const auto& [k, v] : ann.metadata) meta.emplace(k, v);

    for (int duration : config.durations) {
      std::string doc_id = make_doc_id(ann.recording_id, ann.source, duration);
      if (!seen_ids.insert(doc_id).second) {
        report.warnings.push_back(fmt::format("duplicate document '{}'; later copy skipped", doc_id));
        continue;
      }
      try {
        Fingerprint fp = fingerprint(ann, config.encoder(duration));
        DocRecord rec;
        rec.doc_id = std::move(doc_id);
        rec.work_id = ann.work_id;
        rec.bag = fp.degenerate ? TermBag{} : multi_shingle(fp.print.letters, config.widths);
        rec.meta.recording_id = ann.recording_id;
        rec.meta.sources = {ann.source};
        rec.meta.duration_s = duration;
        rec.meta.letters = std::move(fp.print.letters);
        rec.meta.degenerate = fp.degenerate;
        if (fp.degenerate) {
          report.degenerate_doc_ids.push_back(rec.doc_id);
          report.warnings.push_back(fmt::format("'{}': fingerprint too short ({} letters), indexed empty",
                                                rec.doc_id, rec.meta.letters.size()));
        }
        out.snapshot.docs.push_back(std::move(rec));
      } catch (const std::exception& e) {
        report.warnings.push_back(fmt::format("'{}': {}", doc_id, e.what()));
      }
    }
  }

  std::sort(out.snapshot.docs.begin(), out.snapshot.docs.end(),
            [](const DocRecord& a, const DocRecord& b) { return a.doc_id < b.doc_id; });
  std::sort(report.degenerate_doc_ids.begin(), report.degenerate_doc_ids.end());

  std::vector<Clique> known;
  for (auto& [work_id, meta] : metadata) known.push_back({work_id, {}, meta});
  out.snapshot.cliques = derive_cliques(out.snapshot.docs, known);
  return out;
}

Materialized materialize(std::span<const AnnotationDoc> annotations, const EncoderConfig& encoder,
                         const WidthSet& widths, const BM25Params& bm25) {
  SnapshotConfig config;
  config.durations = {encoder.duration_s};
  config.confidence_min = encoder.confidence_min;
  config.widths = widths;
  config.bm25 = bm25;
  return materialize(annotations, config);
}

// --- snapshot persistence ---------------------------------------------------

namespace {

constexpr std::string_view kFormatName = "claraprint-snapshot";

json config_to_json(const SnapshotConfig& c) {
  return json{{"encoder", {{"durations", c.durations}, {"confidence_min", c.confidence_min}}},
              {"widths", c.widths.values()},
              {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"idf", std::string(to_string(c.bm25.idf))}}}};
}

SnapshotConfig config_from_json(const json& j, std::string_view where) {
  try {
    SnapshotConfig c;
    const json& enc = j.at("encoder");
    c.durations = enc.at("durations").get<std::vector<int>>();
    c.confidence_min = enc.at("confidence_min").get<double>();
    c.widths = WidthSet(j.at("widths").get<std::vector<int>>());
    const json& bm = j.at("bm25");
    c.bm25.k1 = bm.at("k1").get<double>();
    c.bm25.b = bm.at("b").get<double>();
    auto idf = parse_idf_variant(bm.at("idf").get<std::string>());
    if (!idf) throw SchemaError("unknown idf variant");
    c.bm25.idf = *idf;
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: bad config: {}", where, e.what()));
  } catch (const ConfigError& e) {
    throw SchemaError(fmt::format("{}: bad config: {}", where, e.what()));
  }
}

json doc_to_json(const DocRecord& d) {
  json sources = json::array();
  for (SourceAlgo s : d.meta.sources) sources.push_back(std::string(to_string(s)));
  json terms = json::object();
  for (const auto& [term, n] : d.bag) terms[term] = n;
  return json{{"kind", "doc"},
              {"doc_id", d.doc_id},
              {"work_id", d.work_id},
              {"meta",
               {{"recording_id", d.meta.recording_id},
                {"sources", std::move(sources)},
                {"duration_s", d.meta.duration_s},
                {"letters", d.meta.letters},
                {"degenerate", d.meta.degenerate}}},
              {"terms", std::move(terms)}};
}

DocRecord doc_from_json(const json& j, std::string_view where) {
  try {
    DocRecord d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.work_id = j.at("work_id").get<std::string>();
    const json& meta = j.at("meta");
    d.meta.recording_id = meta.at("recording_id").get<std::string>();
    for (const auto& s : meta.at("sources")) {
      auto src = parse_source(s.get<std::string>());
      if (!src) throw SchemaError(fmt::format("{}: unknown source '{}'", where, s.get<std::string>()));
      d.meta.sources.push_back(*src);
    }
    d.meta.duration_s = meta.at("duration_s").get<int>();
    d.meta.letters = meta.at("letters").get<std::string>();
    d.meta.degenerate = meta.at("degenerate").get<bool>();
    for (const auto& [term, n] : j.at("terms").items()) {
      const auto count = n.get<std::uint32_t>();
      if (count == 0) throw SchemaError(fmt::format("{}: zero count for term '{}'", where, term));
      d.bag.add(term, count);
    }
    return d;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: bad doc record: {}", where, e.what()));
  }
}

json clique_to_json(const Clique& c) {
  return json{{"kind", "clique"}, {"work_id", c.work_id}, {"recording_ids", c.recording_ids},
              {"metadata", c.metadata}};
}

Clique clique_from_json(const json& j, std::string_view where) {
  try {
    Clique c;
    c.work_id = j.at("work_id").get<std::string>();
    c.recording_ids = j.at("recording_ids").get<std::vector<std::string>>();
    c.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    if (c.recording_ids.empty()) throw SchemaError(fmt::format("{}: clique '{}' is empty", where, c.work_id));
    return c;
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("{}: bad clique record: {}", where, e.what()));
  }
}

int major_version(std::string_view version) {
  auto dot = version.find('.');
  std::string head(version.substr(0, dot));
  try {
    std::size_t used = 0;
    int major = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
    return major;
  } catch (const std::exception&) {
    throw VersionError(fmt::format("malformed snapshot version '{}'", version));
  }
}

}  // namespace

std::string serialize_snapshot(const CorpusSnapshot& snapshot) {
  std::string out;
  json header{{"kind", "header"},
              {"format", kFormatName},
              {"version", snapshot.version},
              {"config", config_to_json(snapshot.config)}};
  out += header.dump();
  out += '\n';

  std::vector<const DocRecord*> docs;
  for (const auto& d : snapshot.docs) docs.push_back(&d);
  std::sort(docs.begin(), docs.end(), [](auto* a, auto* b) { return a->doc_id < b->doc_id; });
  for (const auto* d : docs) {
    out += doc_to_json(*d).dump();
    out += '\n';
  }

  std::vector<const Clique*> cliques;
  for (const auto& c : snapshot.cliques) cliques.push_back(&c);
  std::sort(cliques.begin(), cliques.end(), [](auto* a, auto* b) { return a->work_id < b->work_id; });
  for (const auto* c : cliques) {
    out += clique_to_json(*c).dump();
    out += '\n';
  }
  return out;
}

CorpusSnapshot parse_snapshot(std::string_view text, std::string_view origin) {
  CorpusSnapshot snap;
  bool have_header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    const std::string where = fmt::format("{}:{}", origin, line_no);
    const json rec = parse_json(line, where);
    if (!rec.is_object() || !rec.contains("kind") || !rec["kind"].is_string()) {
      throw SchemaError(where + ": record without a 'kind'");
    }
    const auto kind = rec["kind"].get<std::string>();

    if (!have_header) {
      if (kind != "header" || rec.value("format", "") != kFormatName) {
        throw SchemaError(where + ": first record must be a snapshot header");
      }
      if (!rec.contains("version") || !rec["version"].is_string()) {
        throw SchemaError(where + ": header has no version");
      }
      snap.version = rec["version"].get<std::string>();
      const int expected = major_version(kSnapshotVersion);
      if (major_version(snap.version) != expected) {
        throw VersionError(fmt::format("{}: snapshot version {} is not supported (major {} expected)", where,
                                       snap.version, expected));
      }
      if (!rec.contains("config")) throw SchemaError(where + ": header has no config");
      snap.config = config_from_json(rec["config"], where);
      have_header = true;
    } else if (kind == "doc") {
      snap.docs.push_back(doc_from_json(rec, where));
    } else if (kind == "clique") {
      snap.cliques.push_back(clique_from_json(rec, where));
    } else {
      throw SchemaError(fmt::format("{}: unknown record kind '{}'", where, kind));
    }
  }
  if (!have_header) throw ParseError(fmt::format("{}: empty snapshot file", origin));

  std::map<std::string, const Clique*> by_work;
  for (const auto& c : snap.cliques) {
    if (!by_work.emplace(c.work_id, &c).second) {
      throw SchemaError(fmt::format("{}: clique '{}' appears twice", origin, c.work_id));
    }
  }
  std::set<std::string> ids;
  for (const auto& d : snap.docs) {
    if (!ids.insert(d.doc_id).second) throw SchemaError(fmt::format("{}: duplicate doc '{}'", origin, d.doc_id));
    auto it = by_work.find(d.work_id);
    if (it == by_work.end()) {
      throw SchemaError(fmt::format("{}: doc '{}' has no clique '{}'", origin, d.doc_id, d.work_id));
    }
  }
  std::sort(snap.docs.begin(), snap.docs.end(), [](auto& a, auto& b) { return a.doc_id < b.doc_id; });
  std::sort(snap.cliques.begin(), snap.cliques.end(), [](auto& a, auto& b) { return a.work_id < b.work_id; });
  return snap;
}

void save_snapshot(const CorpusSnapshot& snapshot, const fs::path& path) {
  const std::string text = serialize_snapshot(snapshot);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

CorpusSnapshot load_snapshot(const fs::path& path) { return parse_snapshot(read_file(path), path.string()); }

}  // namespace claraprint
