#include "yoloo/simkit.hpp"

#include <algorithm>
#include <cmath>

#include "yoloo/errors.hpp"
#include "yoloo/random.hpp"

namespace yoloo {

namespace {

struct MovingObject {
  int id;
  std::string category;
  Box3D box;
  double heading;
  double speed;
};

std::uint64_t mix(std::uint64_t seed, std::uint64_t v) {
  std::uint64_t h = seed ^ (v + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
  // splitmix64 finalizer
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

Eigen::VectorXd gaussian_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.normal();
  return v;
}

Embedding random_unit(Rng& rng, int dim) { return Embedding::normalized(gaussian_vector(rng, dim)); }

Embedding noisy(const Embedding& anchor, double kappa, Rng& rng) {
  const int dim = static_cast<int>(anchor.dim());
  const Eigen::VectorXd g = gaussian_vector(rng, dim) / std::sqrt(static_cast<double>(dim));
  return Embedding::normalized(anchor.vector() + kappa * g);
}

Embedding identity_anchor(std::uint64_t seed, int id, int dim) {
  Rng rng(mix(seed, static_cast<std::uint64_t>(id) + 1));
  return random_unit(rng, dim);
}

Box3D jittered_dims(std::string_view category, Rng& rng) {
  Box3D t = category_template(category);
  const double s = 0.05;
  return Box3D(0, 0, 0, t.l * std::clamp(1.0 + s * rng.normal(), 0.8, 1.2),
               t.w * std::clamp(1.0 + s * rng.normal(), 0.8, 1.2),
               t.h * std::clamp(1.0 + s * rng.normal(), 0.8, 1.2), 0.0);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace

void SimConfig::validate() const {
  if (n_objects < 0 || n_frames < 0) throw InvalidArgumentError("sim counts must be >= 0");
  if (!(p_miss >= 0.0 && p_miss <= 1.0)) throw InvalidArgumentError("sim.p_miss must be in [0, 1]");
  if (!(clutter_rate >= 0.0)) throw InvalidArgumentError("sim.clutter_rate must be >= 0");
  if (!(position_noise >= 0.0)) throw InvalidArgumentError("sim.position_noise must be >= 0");
  if (!(embedding_noise >= 0.0)) throw InvalidArgumentError("sim.embedding_noise must be >= 0");
  if (!(turn_noise >= 0.0)) throw InvalidArgumentError("sim.turn_noise must be >= 0");
  if (!(speed_min >= 0.0 && speed_max >= speed_min)) {
    throw InvalidArgumentError("sim speed range must satisfy 0 <= speed_min <= speed_max");
  }
  if (!(area_half_extent > 0.0)) throw InvalidArgumentError("sim.area_half_extent must be > 0");
  if (categories.empty()) throw InvalidArgumentError("sim.categories must not be empty");
}

Box3D category_template(std::string_view category) {
  if (category == "Pedestrian") return Box3D(0, 0, 0, 0.8, 0.6, 1.73, 0);
  if (category == "Cyclist") return Box3D(0, 0, 0, 1.76, 0.6, 1.73, 0);
  return Box3D(0, 0, 0, 3.9, 1.6, 1.56, 0);
}

Scenario generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double a = cfg.area_half_extent;

  std::vector<MovingObject> objects;
  for (int k = 0; k < cfg.n_objects; ++k) {
    MovingObject o;
    o.id = k + 1;
    o.category = cfg.categories[rng.index(cfg.categories.size())];
    const Box3D dims = jittered_dims(o.category, rng);
    double x = 0.0;
    double y = 0.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      x = rng.uniform(-a, a);
      y = rng.uniform(-a, a);
      const bool clear = std::none_of(objects.begin(), objects.end(), [&](const MovingObject& other) {
        return std::hypot(other.box.x - x, other.box.y - y) < 6.0;
      });
      if (clear) break;
    }
    o.heading = rng.uniform(-kPi, kPi);
    o.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    o.box = Box3D(x, y, 0.5 * dims.h, dims.l, dims.w, dims.h, o.heading);
    objects.push_back(std::move(o));
  }

  Scenario s;
  s.config = cfg;
  s.frames.resize(static_cast<std::size_t>(cfg.n_frames));
  for (auto& frame : s.frames) {
    for (const MovingObject& o : objects) frame.ground_truth.push_back({o.id, o.box, o.category});
    for (const MovingObject& o : objects) {
      if (rng.uniform() < cfg.p_miss) continue;
      ScenarioDetection d;
      d.object_id = o.id;
      d.detection.category = o.category;
      d.detection.score = rng.uniform(0.6, 1.0);
      d.detection.box = o.box;
      d.detection.box.x += cfg.position_noise * rng.normal();
      d.detection.box.y += cfg.position_noise * rng.normal();
      d.detection.box.z += cfg.position_noise * rng.normal();
      frame.detections.push_back(std::move(d));
    }
    const int clutter = rng.poisson(cfg.clutter_rate);
    for (int c = 0; c < clutter; ++c) {
      ScenarioDetection d;
      const std::string& cat = cfg.categories[rng.index(cfg.categories.size())];
      const Box3D dims = jittered_dims(cat, rng);
      d.detection.category = cat;
      d.detection.score = rng.uniform(0.3, 0.8);
      d.detection.box = Box3D(rng.uniform(-a, a), rng.uniform(-a, a), 0.5 * dims.h, dims.l,
                              dims.w, dims.h, rng.uniform(-kPi, kPi));
      frame.detections.push_back(std::move(d));
    }
    shuffle(frame.detections, rng);

    for (MovingObject& o : objects) {
      o.box.x += o.speed * std::cos(o.heading);
      o.box.y += o.speed * std::sin(o.heading);
      o.heading = normalize_angle(o.heading + cfg.turn_noise * rng.normal());
      o.box.yaw = o.heading;
    }
  }
  return s;
}

std::vector<std::vector<Embedding>> oracle_embeddings(const Scenario& s, double kappa,
                                                      std::uint64_t seed, int dim) {
  if (!(kappa >= 0.0)) throw InvalidArgumentError("kappa must be >= 0");
  std::vector<std::vector<Embedding>> out;
  out.reserve(s.frames.size());
  Rng noise(mix(seed, 0));
  std::vector<std::pair<int, Embedding>> anchors;
  auto anchor_of = [&](int id) -> const Embedding& {
    for (const auto& [k, e] : anchors)
      if (k == id) return e;
    anchors.emplace_back(id, identity_anchor(seed, id, dim));
    return anchors.back().second;
  };
  for (const ScenarioFrame& frame : s.frames) {
    std::vector<Embedding> row;
    row.reserve(frame.detections.size());
    for (const ScenarioDetection& d : frame.detections) {
      if (d.object_id) {
        row.push_back(noisy(anchor_of(*d.object_id), kappa, noise));
      } else {
        row.push_back(random_unit(noise, dim));
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

void attach_oracle_embeddings(Scenario& s, double kappa, std::uint64_t seed) {
  auto embeds = oracle_embeddings(s, kappa, seed);
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    for (std::size_t i = 0; i < s.frames[f].detections.size(); ++i) {
      s.frames[f].detections[i].detection.embedding = std::move(embeds[f][i]);
    }
  }
}

PointPatch cuboid_patch(const Box3D& box, int n_points, std::uint64_t seed) {
  require_valid(box);
  if (n_points < 1) throw InvalidArgumentError("n_points must be >= 1");
  Rng rng(seed);
  const std::array<double, 3> dims{box.l, box.w, box.h};
  // Face pairs by normal axis: x faces are w*h, y faces l*h, z faces l*w.
  const std::array<double, 3> area{box.w * box.h, box.l * box.h, box.l * box.w};
  const double total = area[0] + area[1] + area[2];
  PointPatch p;
  p.points.resize(n_points, kPointDim);
  for (int i = 0; i < n_points; ++i) {
    const double pick = rng.uniform() * total;
    const int axis = pick < area[0] ? 0 : (pick < area[0] + area[1] ? 1 : 2);
    for (int c = 0; c < 3; ++c) {
      double v = (c == axis) ? (rng.uniform() < 0.5 ? -0.5 : 0.5) * dims[static_cast<std::size_t>(c)]
                             : rng.uniform(-0.5, 0.5) * dims[static_cast<std::size_t>(c)];
      const double d = dims[static_cast<std::size_t>(c)];
      v += std::clamp(0.01 * d * rng.normal(), -0.04 * d, 0.04 * d);
      p.points(i, c) = v;
    }
  }
  return p;
}

namespace {

ScenarioDetection observe(const GroundTruthObject& gt, const Embedding& e) {
  ScenarioDetection d;
  d.object_id = gt.id;
  d.detection.box = gt.box;
  d.detection.category = gt.category;
  d.detection.score = 0.9;
  d.detection.embedding = e;
  return d;
}

Box3D car_at(double x, double y) { return Box3D(x, y, 0.75, 4.0, 2.0, 1.5, 0.0); }

Scenario easy_scenario() {
  Scenario s;
  s.name = "easy";
  Rng rng(101);
  const Embedding a = random_unit(rng, kEmbeddingDim);
  const Embedding b = random_unit(rng, kEmbeddingDim);
  for (int t = 0; t < 20; ++t) {
    ScenarioFrame f;
    f.ground_truth.push_back({1, car_at(10.0 + t, -5.0), "Car"});
    f.ground_truth.push_back({2, car_at(30.0 - t, 5.0), "Car"});
    f.ground_truth[1].box.yaw = kPi;
    f.detections.push_back(observe(f.ground_truth[0], noisy(a, 0.1, rng)));
    f.detections.push_back(observe(f.ground_truth[1], noisy(b, 0.1, rng)));
    s.frames.push_back(std::move(f));
  }
  return s;
}

// Two cars side by side swap lanes at frame 15, so each predicted box fully
// overlaps the other car's detection. A third car 30 m away looks the same
// as car 1.
Scenario moderate_scenario() {
  Scenario s;
  s.name = "moderate";
  Rng rng(202);
  const Embedding look_alike = random_unit(rng, kEmbeddingDim);
  const Embedding other = random_unit(rng, kEmbeddingDim);
  for (int t = 0; t < 30; ++t) {
    const bool swapped = t >= 15;
    ScenarioFrame f;
    f.ground_truth.push_back({1, car_at(10.0 + t, swapped ? -1.1 : 1.1), "Car"});
    f.ground_truth.push_back({2, car_at(10.0 + t, swapped ? 1.1 : -1.1), "Car"});
    f.ground_truth.push_back({3, car_at(10.0 + t, 30.0), "Car"});
    f.detections.push_back(observe(f.ground_truth[0], noisy(look_alike, 0.1, rng)));
    f.detections.push_back(observe(f.ground_truth[1], noisy(other, 0.1, rng)));
    f.detections.push_back(observe(f.ground_truth[2], noisy(look_alike, 0.1, rng)));
    s.frames.push_back(std::move(f));
  }
  return s;
}

// A pedestrian moving 0.9 m per frame along its 0.8 m length: consecutive
// boxes never overlap but stay within one footprint diagonal (1.0 m).
Scenario difficult_scenario() {
  Scenario s;
  s.name = "difficult";
  Rng rng(303);
  const Embedding ped = random_unit(rng, kEmbeddingDim);
  const Embedding car = random_unit(rng, kEmbeddingDim);
  for (int t = 0; t < 20; ++t) {
    ScenarioFrame f;
    f.ground_truth.push_back({1, Box3D(5.0 + 0.9 * t, 0.0, 0.85, 0.8, 0.6, 1.7, 0.0), "Pedestrian"});
    f.ground_truth.push_back({2, car_at(10.0 + t, 20.0), "Car"});
    f.detections.push_back(observe(f.ground_truth[0], noisy(ped, 0.1, rng)));
    f.detections.push_back(observe(f.ground_truth[1], noisy(car, 0.1, rng)));
    s.frames.push_back(std::move(f));
  }
  return s;
}

}  // namespace

Scenario crafted_scenario(std::string_view name) {
  if (name == "easy") return easy_scenario();
  if (name == "moderate") return moderate_scenario();
  if (name == "difficult") return difficult_scenario();
  throw InvalidArgumentError("unknown crafted scenario '" + std::string(name) +
                             "' (expected easy, moderate or difficult)");
}

DetectionStream detection_stream(const Scenario& s) {
  DetectionStream stream;
  stream.reserve(s.frames.size());
  for (const ScenarioFrame& f : s.frames) {
    std::vector<Detection> dets;
    dets.reserve(f.detections.size());
    for (const ScenarioDetection& d : f.detections) dets.push_back(d.detection);
    stream.push_back(std::move(dets));
  }
  return stream;
}

GroundTruthFrames ground_truth(const Scenario& s) {
  GroundTruthFrames gt;
  gt.reserve(s.frames.size());
  for (const ScenarioFrame& f : s.frames) gt.push_back(f.ground_truth);
  return gt;
}

std::vector<Box3D> toy_identity_shapes(const ToyDatasetConfig& cfg) {
  Rng rng(mix(cfg.seed, 17));
  const std::array<const char*, 3> cats{"Car", "Pedestrian", "Cyclist"};
  std::vector<Box3D> shapes;
  int attempts = 0;
  while (static_cast<int>(shapes.size()) < cfg.n_identities) {
    const Box3D t = category_template(cats[shapes.size() % cats.size()]);
    const Box3D cand(0, 0, 0, t.l * rng.uniform(0.7, 1.4), t.w * rng.uniform(0.7, 1.4),
                     t.h * rng.uniform(0.7, 1.4), 0);
    // Keep shapes apart: some dimension must differ by at least 15%.
    const bool distinct = ++attempts > 10000 ||
        std::all_of(shapes.begin(), shapes.end(), [&](const Box3D& o) {
          return std::max({std::abs(std::log(cand.l / o.l)), std::abs(std::log(cand.w / o.w)),
                           std::abs(std::log(cand.h / o.h))}) > 0.15;
        });
    if (distinct) shapes.push_back(cand);
  }
  return shapes;
}

TrackletDataset make_toy_dataset(const ToyDatasetConfig& cfg) {
  if (cfg.n_identities < 1 || cfg.n_sequences < 1 || cfg.observations_per_identity < 1) {
    throw InvalidArgumentError("toy dataset sizes must be >= 1");
  }
  const auto shapes = toy_identity_shapes(cfg);
  Rng rng(mix(cfg.seed, 29));
  TrackletDataset ds;
  for (int k = 0; k < cfg.n_identities; ++k) {
    const Embedding image_anchor = identity_anchor(mix(cfg.seed, 1), k, kEmbeddingDim);
    const Embedding text_anchor = identity_anchor(mix(cfg.seed, 2), k, kEmbeddingDim);
    const Box3D& base = shapes[static_cast<std::size_t>(k)];
    for (int f = 0; f < cfg.observations_per_identity; ++f) {
      TrackletObservation o;
      o.sequence_id = k % cfg.n_sequences;
      o.object_id = k;
      o.frame = f;
      o.image = noisy(image_anchor, cfg.embedding_noise, rng);
      o.text = noisy(text_anchor, cfg.embedding_noise, rng);
      const Box3D dims(0, 0, 0, base.l * (1.0 + 0.01 * rng.normal()),
                       base.w * (1.0 + 0.01 * rng.normal()), base.h * (1.0 + 0.01 * rng.normal()), 0);
      o.points = cuboid_patch(dims, cfg.raw_points, rng.fork());
      ds.observations.push_back(std::move(o));
    }
  }
  return ds;
}

}  // namespace yoloo
