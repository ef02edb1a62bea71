#include "lesionseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "lesionseg/layers.hpp"
#include "lesionseg/loss.hpp"
#include "lesionseg/network.hpp"
#include "lesionseg/rng.hpp"

namespace lesionseg {

namespace {

using DTensor = Tensor<double>;

double rel_err(double a, double f) {
  const double denom = std::max({std::fabs(a), std::fabs(f), 1e-4});
  return std::fabs(a - f) / denom;
}

void fill_uniform(DTensor& t, RngState& rng, double lo, double hi) {
  for (auto& x : t.v) x = rng.uniform(lo, hi);
}

// |x| in [0.1, 1): keeps relu probes away from the kink at h = 1e-2
void fill_away_from_zero(DTensor& t, RngState& rng) {
  for (auto& x : t.v) {
    const double mag = rng.uniform(0.1, 1.0);
    x = rng.uniform() < 0.5 ? -mag : mag;
  }
}

// distinct values with gaps of 0.1, shuffled: pooling argmax cannot flip
// under a +-1e-2 probe
void fill_distinct(DTensor& t, RngState& rng) {
  for (size_t i = 0; i < t.size(); ++i) t.v[i] = 0.1 * static_cast<double>(i);
  for (size_t i = t.size(); i > 1; --i)
    std::swap(t.v[i - 1], t.v[rng.uniform_below(i)]);
}

double objective(const DTensor& out, const DTensor& w) {
  double s = 0.0;
  for (size_t i = 0; i < out.size(); ++i)
    s += out.v[i] * w.v[i];
  return s;
}

struct Check {
  // Evaluates the scalar objective with the current state of all slots.
  std::function<double()> eval;
  // Flattened (pointer, analytic gradient) pairs to probe.
  std::vector<std::pair<double*, double>> probes;
  double h = 1e-2;
};

double max_fd_error(const Check& c, bool perturb) {
  double worst = 0.0;
  bool first = true;
  for (const auto& [p, analytic_raw] : c.probes) {
    double analytic = analytic_raw;
    if (perturb && first) {
      analytic += 0.5;  // negative control
      first = false;
    }
    const double saved = *p;
    *p = saved + c.h;
    const double lp = c.eval();
    *p = saved - c.h;
    const double lm = c.eval();
    *p = saved;
    const double fd = (lp - lm) / (2.0 * c.h);
    worst = std::max(worst, rel_err(analytic, fd));
  }
  return worst;
}

void add_probes(Check& c, DTensor& values, const DTensor& grads) {
  for (size_t i = 0; i < values.size(); ++i)
    c.probes.emplace_back(&values.v[i], grads.v[i]);
}

GradcheckResult run_one(const std::string& name, double tol, Check c,
                        bool perturb) {
  GradcheckResult r;
  r.layer = name;
  r.tolerance = tol;
  r.max_rel_err = max_fd_error(c, perturb);
  r.pass = r.max_rel_err < tol;
  return r;
}

GradcheckResult check_conv(const std::string& name, int k, uint64_t seed,
                           bool perturb) {
  RngState rng(seed);
  Conv2d<double> conv(2, 3, k);
  conv.init_he_uniform(rng);
  DTensor x(2, 2, 4, 4);
  fill_uniform(x, rng, -1.0, 1.0);
  DTensor w(2, 3, 4, 4);
  fill_uniform(w, rng, -1.0, 1.0);

  conv.forward(x);
  DTensor gin = conv.backward(w);

  Check c;
  c.eval = [&] { return objective(conv.forward(x), w); };
  add_probes(c, x, gin);
  add_probes(c, conv.weight, conv.wgrad);
  add_probes(c, conv.bias, conv.bgrad);
  return run_one(name, 1e-3, std::move(c), perturb);
}

GradcheckResult check_batchnorm(uint64_t seed, bool perturb) {
  RngState rng(seed);
  BatchNorm2d<double> bn(3);
  fill_uniform(bn.gamma, rng, 0.5, 1.5);
  fill_uniform(bn.beta, rng, -0.5, 0.5);
  DTensor x(2, 3, 4, 4);
  fill_uniform(x, rng, -1.0, 1.0);
  DTensor w(2, 3, 4, 4);
  fill_uniform(w, rng, -1.0, 1.0);

  bn.forward(x, Mode::train);
  DTensor gin = bn.backward(w);

  Check c;
  c.eval = [&] { return objective(bn.forward(x, Mode::train), w); };
  add_probes(c, x, gin);
  add_probes(c, bn.gamma, bn.ggrad);
  add_probes(c, bn.beta, bn.bgrad);
  return run_one("batchnorm", 1e-3, std::move(c), perturb);
}

GradcheckResult check_relu(uint64_t seed, bool perturb) {
  RngState rng(seed);
  ReLU<double> relu;
  DTensor x(2, 3, 4, 4);
  fill_away_from_zero(x, rng);
  DTensor w(2, 3, 4, 4);
  fill_uniform(w, rng, -1.0, 1.0);
  relu.forward(x);
  DTensor gin = relu.backward(w);
  Check c;
  c.eval = [&] { return objective(relu.forward(x), w); };
  add_probes(c, x, gin);
  return run_one("relu", 1e-3, std::move(c), perturb);
}

GradcheckResult check_sigmoid(uint64_t seed, bool perturb) {
  RngState rng(seed);
  Sigmoid<double> sig;
  DTensor x(2, 3, 4, 4);
  fill_uniform(x, rng, -2.0, 2.0);  // away from saturation
  DTensor w(2, 3, 4, 4);
  fill_uniform(w, rng, -1.0, 1.0);
  sig.forward(x);
  DTensor gin = sig.backward(w);
  Check c;
  c.eval = [&] { return objective(sig.forward(x), w); };
  add_probes(c, x, gin);
  return run_one("sigmoid", 1e-3, std::move(c), perturb);
}

GradcheckResult check_maxpool(uint64_t seed, bool perturb) {
  RngState rng(seed);
  MaxPool2<double> pool;
  DTensor x(2, 2, 4, 4);
  fill_distinct(x, rng);
  DTensor w(2, 2, 2, 2);
  fill_uniform(w, rng, -1.0, 1.0);
  pool.forward(x);
  DTensor gin = pool.backward(w);
  Check c;
  c.eval = [&] { return objective(pool.forward(x), w); };
  add_probes(c, x, gin);
  return run_one("maxpool2", 1e-3, std::move(c), perturb);
}

GradcheckResult check_upsample(uint64_t seed, bool perturb) {
  RngState rng(seed);
  UpsampleNearest2<double> up;
  DTensor x(2, 2, 3, 3);
  fill_uniform(x, rng, -1.0, 1.0);
  DTensor w(2, 2, 6, 6);
  fill_uniform(w, rng, -1.0, 1.0);
  up.forward(x);
  DTensor gin = up.backward(w);
  Check c;
  c.eval = [&] { return objective(up.forward(x), w); };
  add_probes(c, x, gin);
  return run_one("upsample_nearest2", 1e-3, std::move(c), perturb);
}

GradcheckResult check_dropout(uint64_t seed, bool perturb) {
  RngState rng(seed);
  Dropout<double> drop(0.5);
  drop.freeze_mask(true);
  DTensor x(2, 3, 4, 4);
  fill_uniform(x, rng, -1.0, 1.0);
  DTensor w(2, 3, 4, 4);
  fill_uniform(w, rng, -1.0, 1.0);
  RngState drop_rng(seed ^ 0xdeadULL);
  drop.forward(x, Mode::train, &drop_rng);  // draws and freezes the mask
  DTensor gin = drop.backward(w);
  Check c;
  c.eval = [&] { return objective(drop.forward(x, Mode::train, nullptr), w); };
  add_probes(c, x, gin);
  return run_one("dropout", 1e-3, std::move(c), perturb);
}

GradcheckResult check_loss(const std::string& name, bool jaccard_loss,
                           uint64_t seed, bool perturb) {
  RngState rng(seed);
  DTensor pred(2, 1, 4, 4);
  fill_uniform(pred, rng, 0.05, 0.95);
  DTensor target(2, 1, 4, 4);
  for (auto& t : target.v) t = rng.uniform() < 0.5 ? 0.0 : 1.0;

  const auto loss_of = [&] {
    return jaccard_loss ? soft_jaccard_loss(pred, target).loss
                        : bce_loss(pred, target).loss;
  };
  const LossResult<double> lr =
      jaccard_loss ? soft_jaccard_loss(pred, target) : bce_loss(pred, target);

  Check c;
  c.h = 1e-4;
  c.eval = loss_of;
  DTensor grads = lr.grad;
  add_probes(c, pred, grads);
  return run_one(name, 1e-4, std::move(c), perturb);
}

GradcheckResult check_full_network(uint64_t seed, bool perturb) {
  RngState rng(seed);
  NetworkConfig cfg;
  cfg.in_channels = 3;
  cfg.stage_channels = {4, 6};
  cfg.bottleneck_channels = 8;
  cfg.dropout_prob = 0.5;
  cfg.skip_connections = true;
  Network<double> net(cfg);
  net.init_params(rng);
  net.dropout().freeze_mask(true);

  DTensor x(1, 3, 16, 16);
  fill_uniform(x, rng, 0.0, 1.0);
  DTensor w(1, 1, 16, 16);
  fill_uniform(w, rng, -1.0, 1.0);

  RngState drop_rng(seed ^ 0xf00dULL);
  net.forward(x, Mode::train, &drop_rng);  // freezes the dropout mask
  net.backward(w);

  // snapshot analytic grads, then probe a random parameter subset
  auto params = net.params();
  Check c;
  c.h = 1e-4;
  c.eval = [&] { return objective(net.forward(x, Mode::train, nullptr), w); };
  std::vector<std::pair<double*, double>> all;
  for (auto& p : params)
    for (size_t i = 0; i < p.value->size(); ++i)
      all.emplace_back(&p.value->v[i], p.grad->v[i]);
  for (int pick = 0; pick < 48; ++pick)
    c.probes.push_back(all[rng.uniform_below(all.size())]);
  return run_one("full_network", 1e-2, std::move(c), perturb);
}

} // namespace

std::vector<GradcheckResult> run_gradcheck(uint64_t seed, bool perturb) {
  std::vector<GradcheckResult> out;
  out.push_back(check_conv("conv3x3", 3, seed + 1, perturb));
  out.push_back(check_conv("conv1x1", 1, seed + 2, perturb));
  out.push_back(check_batchnorm(seed + 3, perturb));
  out.push_back(check_relu(seed + 4, perturb));
  out.push_back(check_sigmoid(seed + 5, perturb));
  out.push_back(check_maxpool(seed + 6, perturb));
  out.push_back(check_upsample(seed + 7, perturb));
  out.push_back(check_dropout(seed + 8, perturb));
  out.push_back(check_loss("bce_loss", false, seed + 9, perturb));
  out.push_back(check_loss("soft_jaccard_loss", true, seed + 10, perturb));
  out.push_back(check_full_network(seed + 11, perturb));
  return out;
}

bool gradcheck_all_passed(const std::vector<GradcheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

} // namespace lesionseg
