#include "yoloo/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "yoloo/errors.hpp"

namespace yoloo {

using nlohmann::json;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& path, std::size_t line_no,
               const char* field) {
  T value{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(path, line_no,
                     std::string("invalid ") + field + " '" + std::string(tok) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw ParseError(path, line_no, std::string("non-finite ") + field);
    }
  }
  return value;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

json box_json(const Box3D& b) { return json::array({b.x, b.y, b.z, b.l, b.w, b.h, b.yaw}); }

Box3D box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 7) throw InvalidArgumentError("box must be 7 numbers");
  Box3D b(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(),
          j[4].get<double>(), j[5].get<double>(), j[6].get<double>());
  return b;
}

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgumentError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json patch_json(const PointPatch& p) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < p.points.rows(); ++i) {
    arr.push_back({p.points(i, 0), p.points(i, 1), p.points(i, 2)});
  }
  return arr;
}

PointPatch patch_from_json(const json& j) {
  PointPatch p;
  p.points.resize(static_cast<Eigen::Index>(j.size()), kPointDim);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 3) throw InvalidArgumentError("points must be [x, y, z]");
    for (int c = 0; c < 3; ++c) p.points(static_cast<Eigen::Index>(i), c) = j[i][c].get<double>();
  }
  p.validate();
  return p;
}

json sim_config_json(const SimConfig& c) {
  return {{"n_objects", c.n_objects},       {"n_frames", c.n_frames},
          {"speed_min", c.speed_min},       {"speed_max", c.speed_max},
          {"turn_noise", c.turn_noise},     {"position_noise", c.position_noise},
          {"p_miss", c.p_miss},             {"clutter_rate", c.clutter_rate},
          {"embedding_noise", c.embedding_noise},
          {"area_half_extent", c.area_half_extent},
          {"categories", c.categories},     {"seed", c.seed}};
}

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  c.n_objects = j.at("n_objects").get<int>();
  c.n_frames = j.at("n_frames").get<int>();
  c.speed_min = j.at("speed_min").get<double>();
  c.speed_max = j.at("speed_max").get<double>();
  c.turn_noise = j.at("turn_noise").get<double>();
  c.position_noise = j.at("position_noise").get<double>();
  c.p_miss = j.at("p_miss").get<double>();
  c.clutter_rate = j.at("clutter_rate").get<double>();
  c.embedding_noise = j.at("embedding_noise").get<double>();
  c.area_half_extent = j.at("area_half_extent").get<double>();
  c.categories = j.at("categories").get<std::vector<std::string>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

template <typename F>
void for_each_line(const std::filesystem::path& path, F&& f) {
  auto in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    f(std::string_view(line), line_no);
  }
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  if (std::abs(value) * scale < 0.5) value = 0.0;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw InvalidArgumentError("cannot format value");
  return std::string(buf, ptr);
}

Box3D kitti_to_box(const KittiTrackRow& r) {
  return Box3D(r.z, -r.x, -r.y + r.h / 2.0, r.l, r.w, r.h, -r.rotation_y - kPi / 2.0);
}

KittiTrackRow box_to_kitti(const Box3D& b) {
  KittiTrackRow r;
  r.h = b.h;
  r.w = b.w;
  r.l = b.l;
  r.x = -b.y;
  r.y = -(b.z - b.h / 2.0);
  r.z = b.x;
  r.rotation_y = normalize_angle(-b.yaw - kPi / 2.0);
  // Observation angle from the values as printed, so a parsed file rewrites identically.
  const auto printed = [](double v) {
    const std::string text = format_fixed(v, 6);
    double out = v;
    std::from_chars(text.data(), text.data() + text.size(), out);
    return out;
  };
  r.alpha = normalize_angle(printed(r.rotation_y) - std::atan2(printed(r.x), printed(r.z)));
  return r;
}

KittiTrackRow parse_kitti_row(std::string_view line, const std::string& path,
                              std::size_t line_no) {
  const auto tok = split_ws(line);
  if (tok.size() != 17 && tok.size() != 18) {
    throw ParseError(path, line_no,
                     "expected 17 or 18 fields, got " + std::to_string(tok.size()));
  }
  KittiTrackRow r;
  r.frame = parse_number<int>(tok[0], path, line_no, "frame");
  if (r.frame < 0) throw ParseError(path, line_no, "negative frame");
  r.track_id = parse_number<int>(tok[1], path, line_no, "track id");
  r.type = std::string(tok[2]);
  r.truncated = static_cast<int>(parse_number<double>(tok[3], path, line_no, "truncated"));
  r.occluded = parse_number<int>(tok[4], path, line_no, "occluded");
  r.alpha = parse_number<double>(tok[5], path, line_no, "alpha");
  for (int k = 0; k < 4; ++k) r.bbox2d[k] = parse_number<double>(tok[6 + k], path, line_no, "bbox");
  r.h = parse_number<double>(tok[10], path, line_no, "height");
  r.w = parse_number<double>(tok[11], path, line_no, "width");
  r.l = parse_number<double>(tok[12], path, line_no, "length");
  r.x = parse_number<double>(tok[13], path, line_no, "x");
  r.y = parse_number<double>(tok[14], path, line_no, "y");
  r.z = parse_number<double>(tok[15], path, line_no, "z");
  r.rotation_y = parse_number<double>(tok[16], path, line_no, "rotation_y");
  if (tok.size() == 18) r.score = parse_number<double>(tok[17], path, line_no, "score");
  return r;
}

std::string format_kitti_row(const KittiTrackRow& r) {
  std::string s = std::to_string(r.frame) + ' ' + std::to_string(r.track_id) + ' ' + r.type +
                  ' ' + std::to_string(r.truncated) + ' ' + std::to_string(r.occluded);
  auto add = [&](double v) {
    s += ' ';
    s += format_fixed(v, 6);
  };
  add(r.alpha);
  for (double v : r.bbox2d) add(v);
  for (double v : {r.h, r.w, r.l, r.x, r.y, r.z, r.rotation_y}) add(v);
  if (r.score) add(*r.score);
  return s;
}

std::vector<KittiTrackRow> read_kitti_rows(const std::filesystem::path& path) {
  std::vector<KittiTrackRow> rows;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    rows.push_back(parse_kitti_row(line, name, no));
  });
  return rows;
}

DetectionStream read_detections(const std::filesystem::path& path) {
  DetectionStream stream;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    const KittiTrackRow r = parse_kitti_row(line, name, no);
    if (r.type == "DontCare") return;
    Detection d;
    try {
      d.box = kitti_to_box(r);
      require_valid(d.box);
    } catch (const InvalidBoxError& e) {
      throw ParseError(name, no, e.what());
    }
    d.score = r.score.value_or(1.0);
    d.category = r.type;
    if (stream.size() <= static_cast<std::size_t>(r.frame)) stream.resize(r.frame + 1);
    stream[r.frame].push_back(std::move(d));
  });
  return stream;
}

std::string format_tracks(const TrajectorySet& tracks) {
  TrajectorySet rows = tracks;
  canonicalize(rows);
  std::string out;
  for (const auto& t : rows) {
    KittiTrackRow r = box_to_kitti(t.box);
    r.frame = t.frame;
    r.track_id = t.track_id;
    r.type = t.category;
    r.score = t.score;
    out += format_kitti_row(r);
    out += '\n';
  }
  return out;
}

void write_tracks(const TrajectorySet& tracks, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << format_tracks(tracks);
  if (!out) throw Error("write failed: " + path.string());
}

TrajectorySet read_tracks(const std::filesystem::path& path) {
  TrajectorySet rows;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    const KittiTrackRow r = parse_kitti_row(line, name, no);
    if (r.type == "DontCare") return;
    TrajectoryRow t;
    t.frame = r.frame;
    t.track_id = r.track_id;
    t.box = kitti_to_box(r);
    t.score = r.score.value_or(1.0);
    t.category = r.type;
    rows.push_back(std::move(t));
  });
  return rows;
}

GroundTruthFrames read_kitti_ground_truth(const std::filesystem::path& path) {
  GroundTruthFrames frames;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    const KittiTrackRow r = parse_kitti_row(line, name, no);
    if (frames.size() <= static_cast<std::size_t>(r.frame)) frames.resize(r.frame + 1);
    if (r.type == "DontCare" || r.track_id < 0) return;
    frames[r.frame].push_back({r.track_id, kitti_to_box(r), r.type});
  });
  return frames;
}

std::string format_text_prompt(std::string_view category, const std::array<Point2, 4>& c) {
  auto pt = [](const Point2& p) { return "(" + format_fixed(p.x, 2) + ", " + format_fixed(p.y, 2) + ")"; };
  std::string s = "The category of the object is ";
  s += category;
  s += ", and its location can be represented by four coordinates: ";
  s += pt(c[0]) + ", " + pt(c[1]) + ", " + pt(c[2]) + ", and " + pt(c[3]) + ".";
  return s;
}

void write_scenario(const Scenario& s, const std::filesystem::path& path,
                    bool include_embeddings) {
  auto out = open_out(path);
  out << json{{"scenario", {{"name", s.name}, {"config", sim_config_json(s.config)}}}}.dump()
      << '\n';
  for (std::size_t t = 0; t < s.frames.size(); ++t) {
    const auto& f = s.frames[t];
    json gt = json::array();
    for (const auto& g : f.ground_truth) {
      gt.push_back({{"id", g.id}, {"category", g.category}, {"box", box_json(g.box)}});
    }
    json dets = json::array();
    for (const auto& sd : f.detections) {
      const Detection& d = sd.detection;
      json jd = {{"box", box_json(d.box)},
                 {"score", d.score},
                 {"category", d.category},
                 {"object_id", sd.object_id ? json(*sd.object_id) : json(nullptr)}};
      if (include_embeddings && d.embedding) jd["embedding"] = vector_json(d.embedding->vector());
      if (d.patch) jd["points"] = patch_json(*d.patch);
      dets.push_back(std::move(jd));
    }
    out << json{{"frame", t}, {"ground_truth", gt}, {"detections", dets}}.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

Scenario read_scenario(const std::filesystem::path& path) {
  Scenario s;
  bool have_header = false;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    try {
      const json j = json::parse(line);
      if (!have_header) {
        const json& h = j.at("scenario");
        s.name = h.at("name").get<std::string>();
        s.config = sim_config_from_json(h.at("config"));
        have_header = true;
        return;
      }
      const std::size_t t = j.at("frame").get<std::size_t>();
      if (t != s.frames.size()) throw InvalidArgumentError("frames must be consecutive from 0");
      ScenarioFrame f;
      for (const auto& g : j.at("ground_truth")) {
        f.ground_truth.push_back(
            {g.at("id").get<int>(), box_from_json(g.at("box")), g.at("category").get<std::string>()});
      }
      for (const auto& jd : j.at("detections")) {
        ScenarioDetection sd;
        sd.detection.box = box_from_json(jd.at("box"));
        require_valid(sd.detection.box);
        sd.detection.score = jd.at("score").get<double>();
        sd.detection.category = jd.at("category").get<std::string>();
        if (!jd.at("object_id").is_null()) sd.object_id = jd.at("object_id").get<int>();
        if (jd.contains("embedding")) {
          sd.detection.embedding = Embedding::from_unit(vector_from_json(jd.at("embedding")));
        }
        if (jd.contains("points")) sd.detection.patch = patch_from_json(jd.at("points"));
        f.detections.push_back(std::move(sd));
      }
      s.frames.push_back(std::move(f));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(name, no, e.what());
    }
  });
  if (!have_header) throw ParseError(name, 1, "missing scenario header");
  return s;
}

std::vector<FixtureRecord> read_fixture_embeddings(const std::filesystem::path& path) {
  std::vector<FixtureRecord> records;
  const std::string name = path.string();
  for_each_line(path, [&](std::string_view line, std::size_t no) {
    try {
      const json j = json::parse(line);
      FixtureRecord r;
      r.sequence_id = j.at("sequence_id").get<int>();
      r.frame = j.at("frame").get<int>();
      r.object_id = j.at("object_id").get<int>();
      r.image = Embedding::from_unit(vector_from_json(j.at("image_embedding")));
      r.text = Embedding::from_unit(vector_from_json(j.at("text_embedding")));
      if (j.contains("dims")) r.dims = j.at("dims").get<std::array<double, 3>>();
      if (j.contains("points")) r.points = patch_from_json(j.at("points"));
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ParseError(name, no, e.what());
    }
  });
  return records;
}

void write_fixture_embeddings(const std::vector<FixtureRecord>& records,
                              const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& r : records) {
    json j = {{"sequence_id", r.sequence_id},
              {"frame", r.frame},
              {"object_id", r.object_id},
              {"image_embedding", vector_json(r.image.vector())},
              {"text_embedding", vector_json(r.text.vector())}};
    if (r.dims) j["dims"] = *r.dims;
    if (r.points) j["points"] = patch_json(*r.points);
    out << j.dump() << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<FixtureRecord> fixtures_from_dataset(const TrackletDataset& ds) {
  std::vector<FixtureRecord> records;
  records.reserve(ds.observations.size());
  for (const auto& o : ds.observations) {
    FixtureRecord r;
    r.sequence_id = o.sequence_id;
    r.frame = o.frame;
    r.object_id = o.object_id;
    r.image = o.image;
    r.text = o.text;
    r.points = o.points;
    records.push_back(std::move(r));
  }
  return records;
}

TrackletDataset tracklets_from_fixtures(const std::vector<FixtureRecord>& records,
                                        int raw_points, std::uint64_t seed) {
  if (raw_points < 1) throw InvalidArgumentError("raw_points must be >= 1");
  TrackletDataset ds;
  std::uint64_t k = 0;
  for (const auto& r : records) {
    TrackletObservation o;
    o.sequence_id = r.sequence_id;
    o.frame = r.frame;
    o.object_id = r.object_id;
    o.image = r.image;
    o.text = r.text;
    if (r.points) {
      o.points = *r.points;
    } else if (r.dims) {
      const auto& d = *r.dims;
      o.points = cuboid_patch(Box3D(0, 0, 0, d[0], d[1], d[2], 0), raw_points,
                              seed * 0x9E3779B97F4A7C15ULL + k);
    } else {
      throw InvalidArgumentError("fixture record for object " + std::to_string(r.object_id) +
                                 " has neither points nor dims");
    }
    ++k;
    ds.observations.push_back(std::move(o));
  }
  return ds;
}

std::string report_to_json(const EvalReport& r) {
  json j = {{"mota", r.mota},         {"fp", r.fp},
            {"fn", r.fn},             {"idsw", r.idsw},
            {"gt_count", r.gt_count}, {"matches", r.matches},
            {"fp_rate", r.fp_rate},   {"miss_rate", r.miss_rate}};
  return j.dump(2);
}

}  // namespace yoloo
