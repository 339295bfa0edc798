#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "yoloo/checkpoint.hpp"
#include "yoloo/config.hpp"
#include "yoloo/dataio.hpp"
#include "yoloo/errors.hpp"
#include "yoloo/gradcheck.hpp"
#include "yoloo/moteval.hpp"
#include "yoloo/simkit.hpp"
#include "yoloo/tracker.hpp"
#include "yoloo/utcl.hpp"

namespace yoloo::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed = true) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--set", c.overrides, "Override a config value, e.g. tracker.min_hits=2");
  if (with_seed) cmd->add_option("--seed", c.seed, "Random seed");
}

RunConfig resolve_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) {
    if (!fs::exists(c.config)) throw Error("config file not found: " + c.config);
    cfg = load_run_config(c.config);
  }
  for (const auto& o : c.overrides) apply_override(cfg, o);
  return cfg;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw Error(std::string(what) + " not found: " + path);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Ground truth as KITTI label rows: object id as track id, score omitted.
void write_gt_labels(const GroundTruthFrames& gt, const fs::path& path) {
  TrajectorySet rows;
  for (std::size_t t = 0; t < gt.size(); ++t) {
    for (const auto& g : gt[t]) rows.push_back({static_cast<int>(t), g.id, g.box, 1.0, g.category});
  }
  canonicalize(rows);
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : rows) {
    KittiTrackRow k = box_to_kitti(r.box);
    k.frame = r.frame;
    k.track_id = r.track_id;
    k.type = r.category;
    out << format_kitti_row(k) << '\n';
  }
}

void write_detection_rows(const DetectionStream& stream, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t t = 0; t < stream.size(); ++t) {
    for (const auto& d : stream[t]) {
      KittiTrackRow k = box_to_kitti(d.box);
      k.frame = static_cast<int>(t);
      k.track_id = -1;
      k.type = d.category;
      k.score = d.score;
      out << format_kitti_row(k) << '\n';
    }
  }
}

Scenario load_scenario_arg(const std::string& arg) {
  if (arg == "easy" || arg == "moderate" || arg == "difficult") return crafted_scenario(arg);
  require_file(arg, "scenario file");
  return read_scenario(arg);
}

GroundTruthFrames load_ground_truth(const std::string& path) {
  require_file(path, "ground truth");
  if (fs::path(path).extension() == ".jsonl") return ground_truth(read_scenario(path));
  return read_kitti_ground_truth(path);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string out;
  std::string crafted;
  std::string dataset_out;
};

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  RunConfig cfg = resolve_config(a.common);
  if (a.common.seed) cfg.simkit.seed = *a.common.seed;
  Scenario s;
  if (!a.crafted.empty()) {
    s = crafted_scenario(a.crafted);
  } else {
    s = generate(cfg.simkit);
    attach_oracle_embeddings(s, cfg.simkit.embedding_noise, cfg.simkit.seed);
  }
  const fs::path dir(a.out);
  fs::create_directories(dir);
  write_scenario(s, dir / "scenario.jsonl");
  write_detection_rows(detection_stream(s), dir / "detections.txt");
  write_gt_labels(ground_truth(s), dir / "gt.txt");
  if (!a.dataset_out.empty()) {
    ToyDatasetConfig tc;
    tc.seed = cfg.simkit.seed;
    tc.raw_points = cfg.lgpenc.train_points;
    const fs::path p(a.dataset_out);
    ensure_parent(p);
    write_fixture_embeddings(fixtures_from_dataset(make_toy_dataset(tc)), p);
  }
  out << "scenario '" << s.name << "': " << s.frames.size() << " frames written to "
      << dir.string() << "\n";
  return kExitOk;
}

// ---- track ----------------------------------------------------------------

struct TrackArgs {
  Common common;
  std::string dets;
  std::string scenario;
  std::string embeddings;
  std::string checkpoint;
  std::string fixture;
  std::string out;
};

int do_track(const TrackArgs& a, std::ostream& out) {
  if (a.dets.empty() == a.scenario.empty()) {
    throw UsageError("track needs exactly one of --dets or --scenario");
  }
  RunConfig cfg = resolve_config(a.common);
  const TrackerConfig tcfg = cfg.tracker_config();
  const bool needs_utr = tcfg.association != AssociationMode::kGeomOnly;

  std::string source = a.embeddings;
  if (source.empty()) source = a.scenario.empty() ? "encoder" : "oracle";
  if (source != "encoder" && source != "oracle" && source != "fixture") {
    throw UsageError("--embeddings must be encoder, oracle or fixture");
  }
  if (source == "oracle" && !a.dets.empty()) {
    throw UsageError("--embeddings oracle needs --scenario (KITTI files carry no embeddings)");
  }
  if (source == "fixture" && a.fixture.empty()) throw UsageError("--embeddings fixture needs --fixture");
  if (source != "fixture" && !a.fixture.empty()) throw UsageError("--fixture needs --embeddings fixture");
  if (source != "encoder" && !a.checkpoint.empty()) {
    throw UsageError("--checkpoint needs --embeddings encoder");
  }

  DetectionStream stream;
  if (!a.dets.empty()) {
    require_file(a.dets, "detections");
    stream = read_detections(a.dets);
  } else {
    stream = detection_stream(load_scenario_arg(a.scenario));
  }

  std::shared_ptr<const EncoderParams> encoder;
  if (source == "encoder") {
    for (auto& frame : stream)
      for (auto& d : frame) d.embedding.reset();
    if (needs_utr) {
      if (!a.checkpoint.empty()) {
        require_file(a.checkpoint, "checkpoint");
        encoder = std::make_shared<const EncoderParams>(load_checkpoint(a.checkpoint).params);
      } else {
        encoder = std::make_shared<const EncoderParams>(EncoderParams::random(cfg.lgpenc.init_seed));
      }
      const std::uint64_t seed = a.common.seed.value_or(cfg.lgpenc.init_seed);
      for (std::size_t t = 0; t < stream.size(); ++t) {
        for (std::size_t i = 0; i < stream[t].size(); ++i) {
          Detection& d = stream[t][i];
          if (!d.patch) {
            d.patch = cuboid_patch(d.box, cfg.lgpenc.test_points,
                                   seed ^ ((static_cast<std::uint64_t>(t) << 32) | i));
          }
        }
      }
    }
  } else if (source == "fixture") {
    require_file(a.fixture, "fixture");
    std::map<std::pair<int, int>, Embedding> by_key;
    for (auto& r : read_fixture_embeddings(a.fixture)) by_key[{r.frame, r.object_id}] = r.image;
    for (std::size_t t = 0; t < stream.size(); ++t) {
      for (std::size_t i = 0; i < stream[t].size(); ++i) {
        auto it = by_key.find({static_cast<int>(t), static_cast<int>(i)});
        if (it == by_key.end()) {
          if (!needs_utr) continue;
          throw Error("fixture has no embedding for frame " + std::to_string(t) + ", detection " +
                      std::to_string(i));
        }
        stream[t][i].embedding = it->second;
      }
    }
  }

  const TrajectorySet tracks = run_sequence(stream, tcfg, encoder);
  if (a.out.empty()) {
    out << format_tracks(tracks);
  } else {
    const fs::path p(a.out);
    ensure_parent(p);
    write_tracks(tracks, p);
    out << tracks.size() << " track rows written to " << p.string() << "\n";
  }
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string gt;
  std::string hyp;
  std::optional<double> threshold;
  std::string out;
};

int do_eval(const EvalArgs& a, std::ostream& out) {
  const RunConfig cfg = resolve_config(a.common);
  const GroundTruthFrames gt = load_ground_truth(a.gt);
  require_file(a.hyp, "hypothesis tracks");
  const TrajectorySet hyp = read_tracks(a.hyp);
  const EvalReport r = evaluate(gt, hyp, a.threshold.value_or(cfg.moteval.match_threshold));
  out << format_report_table(r);
  if (!a.out.empty()) {
    const fs::path p(a.out);
    ensure_parent(p);
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    f << report_to_json(r) << '\n';
  }
  return kExitOk;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string dataset;
  bool toy = false;
  std::string out_checkpoint;
  std::string loss_csv;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  if (a.dataset.empty() == !a.toy) throw UsageError("train needs exactly one of --dataset or --toy");
  RunConfig cfg = resolve_config(a.common);
  if (a.common.seed) {
    cfg.utcl.train.seed = *a.common.seed;
    cfg.lgpenc.init_seed = *a.common.seed;
  }
  TrackletDataset ds;
  if (a.toy) {
    ToyDatasetConfig tc;
    tc.seed = cfg.utcl.train.seed;
    tc.raw_points = cfg.lgpenc.train_points;
    ds = make_toy_dataset(tc);
  } else {
    require_file(a.dataset, "dataset");
    ds = tracklets_from_fixtures(read_fixture_embeddings(a.dataset), cfg.lgpenc.train_points,
                                 cfg.utcl.train.seed);
  }
  const fs::path ckpt(a.out_checkpoint);
  const fs::path csv = a.loss_csv.empty() ? fs::path(a.out_checkpoint + ".loss.csv")
                                          : fs::path(a.loss_csv);
  ensure_parent(ckpt);
  ensure_parent(csv);
  std::ofstream trace(csv);
  if (!trace) throw Error("cannot write " + csv.string());
  trace << "epoch,loss\n";

  const TrainResult res =
      train(ds, EncoderParams::random(cfg.lgpenc.init_seed), cfg.utcl.train, cfg.utcl.loss,
            [&](int epoch, double loss) {
              trace << epoch << ',' << fmt("%.9g", loss) << '\n';
              out << "epoch " << epoch << " loss " << fmt("%.6f", loss) << '\n';
            });
  save_checkpoint({res.params, res.tau}, ckpt);
  const RetrievalReport r = evaluate_retrieval(ds, res.params, cfg.lgpenc.test_points,
                                               cfg.utcl.train.seed);
  out << "tau " << fmt("%.6f", res.tau) << "  nn_accuracy " << fmt("%.4f", r.nn_accuracy)
      << "  intra " << fmt("%.6f", r.mean_intra_cost) << "  inter "
      << fmt("%.6f", r.mean_inter_cost) << '\n';
  out << "checkpoint written to " << ckpt.string() << '\n';
  return kExitOk;
}

// ---- gradcheck ------------------------------------------------------------

struct GradcheckArgs {
  int trials = 50;
  std::uint64_t seed = 0;
};

int do_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradcheckOptions o;
  o.trials = a.trials;
  o.seed = a.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const GradcheckReport r = gradcheck(o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "trials " << r.trials << "  checked " << r.checked << "  skipped " << r.skipped << '\n'
      << "max relative error " << fmt("%.3e", r.max_relative_error) << "  (" << r.worst << ")\n"
      << "time " << fmt("%.2f", secs) << " s\n"
      << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? kExitOk : kExitFailure;
}

// ---- ablate ---------------------------------------------------------------

struct AblateArgs {
  Common common;
  std::string scenario;
  std::string modes = "utr,utr+fgc,utr+cgc,geom-only";
  std::string out;
};

int do_ablate(const AblateArgs& a, std::ostream& out) {
  const RunConfig cfg = resolve_config(a.common);
  const Scenario s = load_scenario_arg(a.scenario);
  const DetectionStream stream = detection_stream(s);
  const GroundTruthFrames gt = ground_truth(s);

  std::vector<AssociationMode> modes;
  std::stringstream ss(a.modes);
  for (std::string name; std::getline(ss, name, ',');) {
    try {
      modes.push_back(association_mode_from_string(name));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  if (modes.empty()) throw UsageError("--modes is empty");

  std::string table = "mode        MOTA      IDSW    FP      FN\n";
  std::string csv = "mode,mota,idsw,fp,fn\n";
  for (AssociationMode m : modes) {
    TrackerConfig tcfg = cfg.tracker_config();
    tcfg.association = m;
    const EvalReport r =
        evaluate(gt, run_sequence(stream, tcfg), cfg.moteval.match_threshold);
    char line[128];
    std::snprintf(line, sizeof(line), "%-10s  %-8.4f  %-6ld  %-6ld  %ld\n",
                  std::string(to_string(m)).c_str(), r.mota, r.idsw, r.fp, r.fn);
    table += line;
    csv += std::string(to_string(m)) + ',' + fmt("%.6f", r.mota) + ',' + std::to_string(r.idsw) +
           ',' + std::to_string(r.fp) + ',' + std::to_string(r.fn) + '\n';
  }
  out << "scenario '" << s.name << "'\n" << table;
  if (!a.out.empty()) {
    const fs::path p(a.out);
    ensure_parent(p);
    std::ofstream f(p);
    if (!f) throw Error("cannot write " + p.string());
    f << csv;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"YOLOO 3D multi-object tracking toolkit", "yoloo"};
  app.require_subcommand(1, 1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  add_common(c_sim, sim.common);
  c_sim->add_option("--out", sim.out, "Output directory")->required();
  c_sim->add_option("--crafted", sim.crafted, "Write a crafted scene instead")
      ->check(CLI::IsMember({"easy", "moderate", "difficult"}));
  c_sim->add_option("--dataset-out", sim.dataset_out, "Also write a toy tracklet dataset (JSONL)");

  TrackArgs trk;
  auto* c_trk = app.add_subcommand("track", "Run the tracker");
  add_common(c_trk, trk.common);
  c_trk->add_option("--dets", trk.dets, "KITTI-format detections");
  c_trk->add_option("--scenario", trk.scenario, "Scenario JSONL or crafted scene name");
  c_trk->add_option("--embeddings", trk.embeddings, "encoder | oracle | fixture");
  c_trk->add_option("--checkpoint", trk.checkpoint, "Encoder checkpoint");
  c_trk->add_option("--fixture", trk.fixture, "Embedding fixture (JSONL)");
  c_trk->add_option("--out", trk.out, "Output tracks file (KITTI)");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "CLEAR-MOT evaluation");
  add_common(c_ev, ev.common, false);
  c_ev->add_option("--gt", ev.gt, "Ground truth (KITTI labels or scenario JSONL)")->required();
  c_ev->add_option("--hyp", ev.hyp, "Tracker output (KITTI)")->required();
  c_ev->add_option("--threshold", ev.threshold, "Match distance in meters");
  c_ev->add_option("--out", ev.out, "Report JSON");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Tri-modal contrastive training of the point encoder");
  add_common(c_tr, tr.common);
  c_tr->add_option("--dataset", tr.dataset, "Tracklet fixture (JSONL)");
  c_tr->add_flag("--toy", tr.toy, "Use the built-in synthetic dataset");
  c_tr->add_option("--out-checkpoint", tr.out_checkpoint, "Checkpoint path")->required();
  c_tr->add_option("--loss-csv", tr.loss_csv, "Loss trace (default: <checkpoint>.loss.csv)");

  GradcheckArgs gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  c_gc->add_option("--trials", gc.trials, "Random trials")->check(CLI::PositiveNumber);
  c_gc->add_option("--seed", gc.seed, "Random seed");

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "Compare association modes on one scenario");
  add_common(c_ab, ab.common, false);
  c_ab->add_option("--scenario", ab.scenario, "Scenario JSONL or crafted scene name")->required();
  c_ab->add_option("--modes", ab.modes, "Comma-separated association modes");
  c_ab->add_option("--out", ab.out, "Comparison CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_sim) return do_simulate(sim, out);
    if (*c_trk) return do_track(trk, out);
    if (*c_ev) return do_eval(ev, out);
    if (*c_tr) return do_train(tr, out);
    if (*c_gc) return do_gradcheck(gc, out);
    if (*c_ab) return do_ablate(ab, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace yoloo::cli
