#include "yoloo/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "yoloo/errors.hpp"

namespace yoloo {

using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
  const auto& k = c.kalman;
  const auto& t = c.tracker;
  const auto& l = c.utcl.loss;
  const auto& tr = c.utcl.train;
  const auto& s = c.simkit;
  return {
      {"kalman",
       {{"process_noise_scale", k.process_noise_scale},
        {"measurement_noise_scale", k.measurement_noise_scale},
        {"initial_velocity_cov", k.initial_velocity_cov},
        {"initial_state_cov", k.initial_state_cov}}},
      {"tracker",
       {{"min_hits", t.min_hits},
        {"max_age", t.max_age},
        {"embedding_update_mode", std::string(to_string(t.embedding_update_mode))},
        {"ema_momentum", t.ema_momentum},
        {"backfill_tentative", t.backfill_tentative}}},
      {"assoc", {{"mode", std::string(to_string(c.assoc.mode))}, {"max_cost", c.assoc.max_cost}}},
      {"lgpenc",
       {{"train_points", c.lgpenc.train_points},
        {"test_points", c.lgpenc.test_points},
        {"init_seed", c.lgpenc.init_seed}}},
      {"utcl",
       {{"gamma", l.gamma},
        {"delta", l.delta},
        {"epsilon", l.epsilon},
        {"tau", l.tau},
        {"epochs", tr.epochs},
        {"learning_rate", tr.learning_rate},
        {"beta1", tr.beta1},
        {"beta2", tr.beta2},
        {"weight_decay", tr.weight_decay},
        {"adam_eps", tr.adam_eps},
        {"batch_size", tr.batch_size},
        {"steps_per_epoch", tr.steps_per_epoch},
        {"learn_tau", tr.learn_tau},
        {"seed", tr.seed}}},
      {"simkit",
       {{"n_objects", s.n_objects},
        {"n_frames", s.n_frames},
        {"speed_min", s.speed_min},
        {"speed_max", s.speed_max},
        {"turn_noise", s.turn_noise},
        {"position_noise", s.position_noise},
        {"p_miss", s.p_miss},
        {"clutter_rate", s.clutter_rate},
        {"embedding_noise", s.embedding_noise},
        {"area_half_extent", s.area_half_extent},
        {"categories", s.categories},
        {"seed", s.seed}}},
      {"moteval", {{"match_threshold", c.moteval.match_threshold}}},
  };
}

RunConfig from_json(const json& j) {
  RunConfig c;
  const json& k = j.at("kalman");
  c.kalman.process_noise_scale = k.at("process_noise_scale").get<double>();
  c.kalman.measurement_noise_scale = k.at("measurement_noise_scale").get<double>();
  c.kalman.initial_velocity_cov = k.at("initial_velocity_cov").get<double>();
  c.kalman.initial_state_cov = k.at("initial_state_cov").get<double>();

  const json& t = j.at("tracker");
  c.tracker.min_hits = t.at("min_hits").get<int>();
  c.tracker.max_age = t.at("max_age").get<int>();
  c.tracker.embedding_update_mode =
      embedding_update_from_string(t.at("embedding_update_mode").get<std::string>());
  c.tracker.ema_momentum = t.at("ema_momentum").get<double>();
  c.tracker.backfill_tentative = t.at("backfill_tentative").get<bool>();

  const json& a = j.at("assoc");
  c.assoc.mode = association_mode_from_string(a.at("mode").get<std::string>());
  c.assoc.max_cost = a.at("max_cost").get<double>();

  const json& e = j.at("lgpenc");
  c.lgpenc.train_points = e.at("train_points").get<int>();
  c.lgpenc.test_points = e.at("test_points").get<int>();
  c.lgpenc.init_seed = e.at("init_seed").get<std::uint64_t>();

  const json& u = j.at("utcl");
  c.utcl.loss.gamma = u.at("gamma").get<double>();
  c.utcl.loss.delta = u.at("delta").get<double>();
  c.utcl.loss.epsilon = u.at("epsilon").get<double>();
  c.utcl.loss.tau = u.at("tau").get<double>();
  auto& tr = c.utcl.train;
  tr.epochs = u.at("epochs").get<int>();
  tr.learning_rate = u.at("learning_rate").get<double>();
  tr.beta1 = u.at("beta1").get<double>();
  tr.beta2 = u.at("beta2").get<double>();
  tr.weight_decay = u.at("weight_decay").get<double>();
  tr.adam_eps = u.at("adam_eps").get<double>();
  tr.batch_size = u.at("batch_size").get<int>();
  tr.steps_per_epoch = u.at("steps_per_epoch").get<int>();
  tr.learn_tau = u.at("learn_tau").get<bool>();
  tr.seed = u.at("seed").get<std::uint64_t>();
  tr.train_points = c.lgpenc.train_points;

  const json& s = j.at("simkit");
  c.simkit.n_objects = s.at("n_objects").get<int>();
  c.simkit.n_frames = s.at("n_frames").get<int>();
  c.simkit.speed_min = s.at("speed_min").get<double>();
  c.simkit.speed_max = s.at("speed_max").get<double>();
  c.simkit.turn_noise = s.at("turn_noise").get<double>();
  c.simkit.position_noise = s.at("position_noise").get<double>();
  c.simkit.p_miss = s.at("p_miss").get<double>();
  c.simkit.clutter_rate = s.at("clutter_rate").get<double>();
  c.simkit.embedding_noise = s.at("embedding_noise").get<double>();
  c.simkit.area_half_extent = s.at("area_half_extent").get<double>();
  c.simkit.categories = s.at("categories").get<std::vector<std::string>>();
  c.simkit.seed = s.at("seed").get<std::uint64_t>();

  c.moteval.match_threshold = j.at("moteval").at("match_threshold").get<double>();
  return c;
}

// Overlays `patch` onto `base`, rejecting keys that `base` does not have.
void merge_strict(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) {
    throw InvalidArgumentError("config " + (where.empty() ? std::string("root") : where) +
                               " must be an object");
  }
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) throw InvalidArgumentError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

RunConfig checked(const json& merged) {
  try {
    RunConfig c = from_json(merged);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgumentError(std::string("bad config value: ") + e.what());
  }
}

}  // namespace

TrackerConfig RunConfig::tracker_config() const {
  TrackerConfig t = tracker;
  t.kalman = kalman;
  t.association = assoc.mode;
  t.max_cost = assoc.max_cost;
  t.encoder_points = lgpenc.test_points;
  return t;
}

void RunConfig::validate() const {
  kalman.validate();
  tracker_config().validate();
  utcl.loss.validate();
  utcl.train.validate();
  simkit.validate();
  if (!(assoc.max_cost > 0.0)) throw InvalidArgumentError("assoc.max_cost must be > 0");
  if (lgpenc.train_points < 1 || lgpenc.test_points < 1) {
    throw InvalidArgumentError("lgpenc point counts must be >= 1");
  }
  if (!(moteval.match_threshold > 0.0)) {
    throw InvalidArgumentError("moteval.match_threshold must be > 0");
  }
}

std::string dump_run_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

RunConfig parse_run_config(std::string_view json_text) {
  json patch;
  try {
    patch = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  json base = to_json(RunConfig{});
  merge_strict(base, patch, "");
  return checked(base);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << dump_run_config(cfg);
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw InvalidArgumentError("override must look like section.key=value: '" +
                               std::string(assignment) + "'");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json patch = value;
  std::string rest = path;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos;) {
    parts.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 1);
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  json base = to_json(cfg);
  merge_strict(base, patch, "");
  cfg = checked(base);
}

}  // namespace yoloo
