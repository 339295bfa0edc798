#include "yoloo/moteval.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <string>

#include "yoloo/assoc.hpp"
#include "yoloo/errors.hpp"

namespace yoloo {

void EvalReport::finalize() {
  if (gt_count <= 0) throw UndefinedMotaError("MOTA is undefined without ground-truth objects");
  const double g = static_cast<double>(gt_count);
  mota = 1.0 - static_cast<double>(fp + fn + idsw) / g;
  fp_rate = static_cast<double>(fp) / g;
  miss_rate = static_cast<double>(fn) / g;
}

EvalReport& EvalReport::operator+=(const EvalReport& other) {
  fp += other.fp;
  fn += other.fn;
  idsw += other.idsw;
  gt_count += other.gt_count;
  matches += other.matches;
  return *this;
}

EvalReport evaluate(std::span<const std::vector<GroundTruthObject>> gt, const TrajectorySet& hyp,
                    double match_threshold) {
  const auto n_frames = static_cast<int>(gt.size());
  std::vector<std::vector<const TrajectoryRow*>> hyp_by_frame(gt.size());
  for (const TrajectoryRow& row : hyp) {
    if (row.frame < 0 || row.frame >= n_frames) {
      throw InvalidArgumentError("hypothesis frame " + std::to_string(row.frame) +
                                 " outside ground-truth range [0, " + std::to_string(n_frames) + ")");
    }
    hyp_by_frame[static_cast<std::size_t>(row.frame)].push_back(&row);
  }

  EvalReport report;
  std::map<int, int> previous;      // gt id -> hyp id, previous frame only
  std::map<int, int> last_matched;  // gt id -> hyp id, most recent match
  for (int f = 0; f < n_frames; ++f) {
    const auto& objects = gt[static_cast<std::size_t>(f)];
    const auto& hyps = hyp_by_frame[static_cast<std::size_t>(f)];
    report.gt_count += static_cast<long>(objects.size());

    std::set<int> seen;
    for (const TrajectoryRow* h : hyps) {
      if (!seen.insert(h->track_id).second) {
        throw InvalidArgumentError("hypothesis id " + std::to_string(h->track_id) +
                                   " appears twice in frame " + std::to_string(f));
      }
    }

    std::vector<int> gt_match(objects.size(), -1);
    std::vector<bool> hyp_used(hyps.size(), false);
    for (std::size_t g = 0; g < objects.size(); ++g) {
      const auto it = previous.find(objects[g].id);
      if (it == previous.end()) continue;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        if (!hyp_used[h] && hyps[h]->track_id == it->second &&
            centroid_distance(objects[g].box, hyps[h]->box) <= match_threshold) {
          gt_match[g] = static_cast<int>(h);
          hyp_used[h] = true;
          break;
        }
      }
    }

    std::vector<std::size_t> free_gt;
    std::vector<std::size_t> free_hyp;
    for (std::size_t g = 0; g < objects.size(); ++g)
      if (gt_match[g] < 0) free_gt.push_back(g);
    for (std::size_t h = 0; h < hyps.size(); ++h)
      if (!hyp_used[h]) free_hyp.push_back(h);
    CostMatrix dist(static_cast<Eigen::Index>(free_gt.size()), static_cast<Eigen::Index>(free_hyp.size()));
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      for (std::size_t b = 0; b < free_hyp.size(); ++b) {
        const double d = centroid_distance(objects[free_gt[a]].box, hyps[free_hyp[b]]->box);
        if (d <= match_threshold) {
          dist.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d;
        } else {
          dist.gate(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
      }
    }
    for (const auto& [a, b] : hungarian_assign(dist).matches) {
      gt_match[free_gt[static_cast<std::size_t>(a)]] = static_cast<int>(free_hyp[static_cast<std::size_t>(b)]);
      hyp_used[free_hyp[static_cast<std::size_t>(b)]] = true;
    }

    previous.clear();
    long matched = 0;
    for (std::size_t g = 0; g < objects.size(); ++g) {
      if (gt_match[g] < 0) continue;
      ++matched;
      const int gid = objects[g].id;
      const int hid = hyps[static_cast<std::size_t>(gt_match[g])]->track_id;
      const auto last = last_matched.find(gid);
      if (last != last_matched.end() && last->second != hid) ++report.idsw;
      last_matched[gid] = hid;
      previous[gid] = hid;
    }
    report.matches += matched;
    report.fn += static_cast<long>(objects.size()) - matched;
    report.fp += static_cast<long>(hyps.size()) - matched;
  }
  report.finalize();
  return report;
}

std::string format_report_table(const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%8s %8s %8s %8s %8s\n%8.4f %8ld %8ld %8ld %8ld\n", "MOTA", "FP",
                "Miss", "IDS", "GT", r.mota, r.fp, r.fn, r.idsw, r.gt_count);
  return buf;
}

}  // namespace yoloo
