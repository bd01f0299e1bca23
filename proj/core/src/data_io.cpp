#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "brepnet/data.hpp"
#include "brepnet/rng.hpp"

namespace brepnet {
namespace {

using nlohmann::json;

const std::map<std::string, SurfaceType>& surface_names() {
  static const std::map<std::string, SurfaceType> m = {
      {"plane", SurfaceType::kPlane},
      {"cylinder", SurfaceType::kCylinder},
      {"cone", SurfaceType::kCone},
      {"sphere", SurfaceType::kSphere},
      {"torus", SurfaceType::kTorus},
      {"rational_bspline", SurfaceType::kRationalBspline},
      {"nonrational_bspline", SurfaceType::kNonrationalBspline},
  };
  return m;
}

const std::map<std::string, CurveType>& curve_names() {
  static const std::map<std::string, CurveType> m = {
      {"line", CurveType::kLine},           {"circle", CurveType::kCircle},
      {"ellipse", CurveType::kEllipse},     {"helix", CurveType::kHelix},
      {"intersection_curve", CurveType::kIntersectionCurve},
  };
  return m;
}

const std::map<std::string, EdgeConvexity>& convexity_names() {
  static const std::map<std::string, EdgeConvexity> m = {
      {"concave", EdgeConvexity::kConcave},
      {"convex", EdgeConvexity::kConvex},
      {"smooth", EdgeConvexity::kSmooth},
  };
  return m;
}

template <typename T>
std::string name_of(const std::map<std::string, T>& names, T value) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  throw std::logic_error("unnamed enum value");
}

template <typename T>
T enum_from(const std::map<std::string, T>& names, const json& j, const char* field) {
  if (!j.is_string()) throw SchemaError(std::string(field) + " must be a string");
  const auto it = names.find(j.get<std::string>());
  if (it == names.end()) throw SchemaError(std::string("unknown ") + field + " '" + j.get<std::string>() + "'");
  return it->second;
}

const json& require(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + field + "'");
  return *it;
}

Index index_from(const json& j, const char* field) {
  if (!j.is_number_integer()) throw SchemaError(std::string(field) + " must be an integer");
  return j.get<Index>();
}

double number_from(const json& j, const char* field) {
  if (!j.is_number()) throw SchemaError(std::string(field) + " must be a number");
  return j.get<double>();
}

bool bool_from(const json& j, const char* field) {
  if (!j.is_boolean()) throw SchemaError(std::string(field) + " must be a boolean");
  return j.get<bool>();
}

SolidRecord record_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("document must be a JSON object");
  SolidRecord record;
  const json& id = require(doc, "id");
  if (!id.is_string()) throw SchemaError("id must be a string");
  record.id = id.get<std::string>();

  const json& coedges = require(doc, "coedges");
  const json& faces = require(doc, "faces");
  const json& edges = require(doc, "edges");
  if (!coedges.is_array() || !faces.is_array() || !edges.is_array()) {
    throw SchemaError("coedges, faces and edges must be arrays");
  }

  record.topology.num_faces = static_cast<Index>(faces.size());
  record.topology.num_edges = static_cast<Index>(edges.size());
  for (const json& c : coedges) {
    if (!c.is_object()) throw SchemaError("coedge entries must be objects");
    record.topology.coedge_next.push_back(index_from(require(c, "next"), "next"));
    record.topology.coedge_mate.push_back(index_from(require(c, "mate"), "mate"));
    record.topology.coedge_edge.push_back(index_from(require(c, "edge"), "edge"));
    record.topology.coedge_face.push_back(index_from(require(c, "face"), "face"));
    record.coedges.push_back({bool_from(require(c, "forward"), "forward")});
  }

  std::size_t labeled = 0;
  for (const json& f : faces) {
    if (!f.is_object()) throw SchemaError("face entries must be objects");
    FaceAttributes attrs;
    attrs.surface_type = enum_from(surface_names(), require(f, "surface_type"), "surface_type");
    attrs.area = number_from(require(f, "area"), "area");
    if (attrs.area < 0) throw SchemaError("area must be >= 0");
    record.faces.push_back(attrs);
    if (const auto it = f.find("label"); it != f.end()) {
      const Index label = index_from(*it, "label");
      if (label < 0 || label >= kNumSegmentClasses) {
        throw SchemaError("label " + std::to_string(label) + " outside the " +
                          std::to_string(kNumSegmentClasses) + "-class vocabulary");
      }
      record.labels.push_back(static_cast<int>(label));
      ++labeled;
    }
  }
  if (labeled != 0 && labeled != faces.size()) {
    throw SchemaError("either every face or no face may carry a label");
  }

  for (const json& e : edges) {
    if (!e.is_object()) throw SchemaError("edge entries must be objects");
    EdgeAttributes attrs;
    attrs.curve_type = enum_from(curve_names(), require(e, "curve_type"), "curve_type");
    attrs.convexity = enum_from(convexity_names(), require(e, "convexity"), "convexity");
    attrs.closed = bool_from(require(e, "closed"), "closed");
    attrs.length = number_from(require(e, "length"), "length");
    if (attrs.length < 0) throw SchemaError("length must be >= 0");
    record.edges.push_back(attrs);
  }
  return record;
}

json record_to_json(const SolidRecord& record) {
  json doc;
  doc["id"] = record.id;
  json coedges = json::array();
  for (Index i = 0; i < record.topology.num_coedges(); ++i) {
    coedges.push_back({{"next", record.topology.coedge_next[i]},
                       {"mate", record.topology.coedge_mate[i]},
                       {"edge", record.topology.coedge_edge[i]},
                       {"face", record.topology.coedge_face[i]},
                       {"forward", record.coedges[i].forward}});
  }
  doc["coedges"] = std::move(coedges);

  json faces = json::array();
  for (std::size_t i = 0; i < record.faces.size(); ++i) {
    json f = {{"surface_type", name_of(surface_names(), record.faces[i].surface_type)},
              {"area", record.faces[i].area}};
    if (record.has_labels()) f["label"] = record.labels[i];
    faces.push_back(std::move(f));
  }
  doc["faces"] = std::move(faces);

  json edges = json::array();
  for (const EdgeAttributes& e : record.edges) {
    edges.push_back({{"curve_type", name_of(curve_names(), e.curve_type)},
                     {"convexity", name_of(convexity_names(), e.convexity)},
                     {"closed", e.closed},
                     {"length", e.length}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// Parses + validates a document, appending to records or to the report.
void ingest(const std::string& text, const std::string& source, std::vector<SolidRecord>& records,
            ReadReport& report) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    report.skipped.push_back({source, std::string("parse: ") + e.what()});
    return;
  }

  const auto ingest_one = [&records, &report](const json& j, const std::string& src) {
    try {
      SolidRecord record = record_from_json(j);
      const ValidationReport validation = validate(record.topology);
      if (!validation.ok()) {
        throw SchemaError("validation: " + validation.issues.front().message);
      }
      if (record.coedges.size() != static_cast<std::size_t>(record.topology.num_coedges())) {
        throw SchemaError("coedge attribute count mismatch");
      }
      records.push_back(std::move(record));
      ++report.loaded;
    } catch (const SchemaError& e) {
      report.skipped.push_back({src, e.what()});
    }
  };

  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) ingest_one(doc[i], source + "[" + std::to_string(i) + "]");
  } else {
    ingest_one(doc, source);
  }
}

}  // namespace

SolidRecord parse_solid_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("parse: ") + e.what());
  }
  return record_from_json(doc);
}

std::string to_document(const SolidRecord& record) { return record_to_json(record).dump(2); }

void write_document(const std::filesystem::path& path, const SolidRecord& record) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << to_document(record) << '\n';
}

std::vector<SolidRecord> read_dataset(const std::filesystem::path& path, ReadReport* report) {
  ReadReport local;
  ReadReport& rep = report ? *report : local;
  rep = ReadReport{};
  std::vector<SolidRecord> records;

  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) ingest(read_file(file), file.string(), records, rep);
  } else if (std::filesystem::is_regular_file(path)) {
    ingest(read_file(path), path.string(), records, rep);
  } else {
    throw std::runtime_error("dataset path does not exist: " + path.string());
  }
  return records;
}

DatasetSplit split_dataset(std::vector<SolidRecord> records, const SplitRatios& ratios, std::uint64_t seed,
                           const std::optional<std::filesystem::path>& split_file) {
  DatasetSplit split;

  if (split_file) {
    json doc;
    try {
      doc = json::parse(read_file(*split_file));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(std::string("split file: ") + e.what());
    }
    std::map<std::string, int> bucket_of;
    const char* buckets[] = {"train", "validation", "test"};
    for (int b = 0; b < 3; ++b) {
      if (const auto it = doc.find(buckets[b]); it != doc.end()) {
        for (const json& id : *it) bucket_of[id.get<std::string>()] = b;
      }
    }
    for (auto& record : records) {
      const auto it = bucket_of.find(record.id);
      if (it == bucket_of.end()) continue;  // ids missing from the file are dropped
      switch (it->second) {
        case 0: split.train.push_back(std::move(record)); break;
        case 1: split.validation.push_back(std::move(record)); break;
        default: split.test.push_back(std::move(record)); break;
      }
    }
    return split;
  }

  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const std::size_t n = records.size();
  const auto n_train = static_cast<std::size_t>(ratios.train * static_cast<double>(n));
  const auto n_val = static_cast<std::size_t>(ratios.validation * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    SolidRecord& record = records[order[i]];
    if (i < n_train) {
      split.train.push_back(std::move(record));
    } else if (i < n_train + n_val) {
      split.validation.push_back(std::move(record));
    } else {
      split.test.push_back(std::move(record));
    }
  }
  return split;
}

}  // namespace brepnet
