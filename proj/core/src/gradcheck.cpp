#include "yoloo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "yoloo/random.hpp"
#include "yoloo/utcl.hpp"

namespace yoloo {

namespace {

PointPatch random_patch(int n, Rng& rng) {
  PointPatch p;
  p.points.resize(n, kPointDim);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < kPointDim; ++c) p.points(i, c) = rng.normal();
  return p;
}

Embedding random_unit(Rng& rng) {
  Eigen::VectorXd v(kEmbeddingDim);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return Embedding::normalized(std::move(v));
}

struct Probe {
  double value;
  std::uint64_t sig;
};

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelErrorFloor});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(const GradcheckOptions& opts) {
  GradcheckReport report;
  Rng rng(opts.seed);
  for (int trial = 0; trial < opts.trials; ++trial) {
    const int b = 2 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, opts.max_batch - 1))));
    const int n = 4 + static_cast<int>(rng.index(static_cast<std::size_t>(std::max(1, opts.max_points - 3))));
    TriModalBatch batch;
    for (int i = 0; i < b; ++i) {
      TriModalItem item;
      item.anchor = random_patch(n, rng);
      item.positive = random_patch(n, rng);
      item.negative = random_patch(n, rng);
      item.image = random_unit(rng);
      item.text = random_unit(rng);
      batch.items.push_back(std::move(item));
    }
    EncoderParams params = EncoderParams::random(rng.next());
    for (Eigen::Index j = 0; j < params.alpha.size(); ++j) {
      params.alpha(j) = rng.uniform(0.5, 1.5);
      params.beta(j) = rng.uniform(0.5, 1.5);
    }
    LossConfig cfg;
    cfg.gamma = rng.uniform(0.5, 1.5);
    cfg.delta = rng.uniform(0.5, 1.5);
    cfg.tau = rng.uniform(0.05, 1.0);
    cfg.epsilon = 0.2;

    const TotalLoss analytic = total_loss(batch, params, cfg);
    auto probe = [&](const EncoderParams& p, const LossConfig& c) {
      const LossProbe r = total_loss_probe(batch, p, c);
      return Probe{r.value, r.branch_signature};
    };

    auto check = [&](const std::string& label, double grad, auto&& eval_at) {
      const Probe plus = eval_at(+opts.step);
      const Probe minus = eval_at(-opts.step);
      if (plus.sig != analytic.branch_signature || minus.sig != analytic.branch_signature) {
        ++report.skipped;
        return;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * opts.step);
      const double err = relative_error(grad, numeric);
      ++report.checked;
      if (err >= report.max_relative_error) {
        report.max_relative_error = err;
        std::ostringstream os;
        os.precision(10);
        os << label << " analytic=" << grad << " numeric=" << numeric;
        report.worst = os.str();
      }
    };

    auto views = params.tensors();
    const auto grad_views = analytic.grads.tensors();
    for (std::size_t k = 0; k < views.size(); ++k) {
      for (int c = 0; c < opts.coords_per_tensor; ++c) {
        const auto idx = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(views[k].size())));
        double& slot = views[k].data[idx];
        const double original = slot;
        check(views[k].name + "[" + std::to_string(idx) + "]", grad_views[k].data[idx],
              [&](double h) {
                slot = original + h;
                const Probe r = probe(params, cfg);
                slot = original;
                return r;
              });
      }
    }
    check("tau", analytic.d_tau, [&](double h) {
      LossConfig c = cfg;
      c.tau += h;
      return probe(params, c);
    });
    ++report.trials;
  }
  report.passed = report.checked > 0 && report.max_relative_error < opts.tolerance;
  return report;
}

}  // namespace yoloo
