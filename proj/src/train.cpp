#include "lesionseg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "lesionseg/errors.hpp"
#include "lesionseg/loss.hpp"
#include "lesionseg/optimizer.hpp"

namespace lesionseg {

namespace {

// Stream salts: keep shuffle / dropout / init draws out of the per-sample
// augmentation streams, which are pinned to (master_seed, epoch, index).
constexpr uint64_t kInitSalt = 0x696e6974ULL;     // "init"
constexpr uint64_t kShuffleSalt = 0x7368666cULL;  // "shfl"
constexpr uint64_t kDropoutSalt = 0x64726f70ULL;  // "drop"

struct Sample {
  ImageU8 image;
  BinaryMask mask;
};

double sample_jaccard(const Tensor4& pred, const Tensor4& target, int b) {
  // intersection/union of the thresholded prediction against the target
  long long inter = 0, uni = 0;
  const float* p = pred.plane(b, 0);
  const float* t = target.plane(b, 0);
  for (size_t i = 0; i < pred.plane_size(); ++i) {
    const int pi = p[i] >= 0.5f ? 1 : 0;
    const int ti = t[i] >= 0.5f ? 1 : 0;
    inter += pi & ti;
    uni += pi | ti;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
  if (input_w < 8 || input_h < 8)
    throw ConfigError("train: input size must be >= 8x8");
  augment.validate();
}

TrainResult train(const Manifest& manifest, const TrainConfig& tc,
                  const NetworkConfig& nc) {
  tc.validate();
  nc.validate();
  if (manifest.entries.empty()) throw DataError("train: manifest is empty");
  if (!manifest.all_have_masks())
    throw DataError("train: every training row needs a mask");

  // Originals stay in memory; augmented views are regenerated from them for
  // every mini-batch.
  std::vector<Sample> originals;
  originals.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    try {
      Sample s;
      s.image = load_image(e.image_path);
      s.mask = load_mask(e.mask_path);
      if (s.image.channels != 3)
        throw DataError(e.image_path + ": training images must be 3-channel");
      if (s.image.width != s.mask.width || s.image.height != s.mask.height)
        throw DataError(e.image_path + ": image/mask dimensions differ");
      originals.push_back(std::move(s));
    } catch (const DataError& err) {
      throw DataError("train: unreadable sample " + e.image_path + ": " +
                      err.what());
    }
  }

  Network<float> net(nc);
  RngState init_rng = derive_rng(tc.master_seed ^ kInitSalt, 0, 0);
  net.init_params(init_rng);
  SgdOptimizer<float> opt(tc.learning_rate, tc.momentum, tc.weight_decay);
  auto params = net.params();

  const int n = static_cast<int>(originals.size());
  const int W = tc.input_w, H = tc.input_h;
  TrainResult result;

  std::vector<int> order(n);
  for (int e = 0; e < tc.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    RngState shuffle_rng = derive_rng(tc.master_seed ^ kShuffleSalt, e, 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    double loss_sum = 0.0;
    double jaccard_sum = 0.0;
    int batch_index = 0;
    for (int start = 0; start < n; start += tc.batch_size, ++batch_index) {
      const int bs = std::min(tc.batch_size, n - start);
      Tensor4 x(bs, 3, H, W);
      Tensor4 y(bs, 1, H, W);
      for (int b = 0; b < bs; ++b) {
        const int idx = order[start + b];
        RngState rng = derive_rng(tc.master_seed, e, static_cast<uint64_t>(idx));
        auto [img, msk] = augment_sample(originals[idx].image,
                                         originals[idx].mask, tc.augment, rng);
        const ImageU8 ri = resize_bilinear(img, W, H);
        const BinaryMask rm = resize_mask_nearest(msk, W, H);
        for (int yy = 0; yy < H; ++yy)
          for (int xx = 0; xx < W; ++xx) {
            for (int c = 0; c < 3; ++c)
              x.at(b, c, yy, xx) = static_cast<float>(ri.at(xx, yy, c)) / 255.0f;
            y.at(b, 0, yy, xx) = static_cast<float>(rm.at(xx, yy));
          }
      }

      RngState drop_rng = derive_rng(tc.master_seed ^ kDropoutSalt, e,
                                     static_cast<uint64_t>(batch_index));
      const Tensor4 pred = net.forward(x, Mode::train, &drop_rng);
      const LossResult<float> lr = tc.loss == LossKind::bce
                                       ? bce_loss(pred, y)
                                       : soft_jaccard_loss(pred, y);
      if (!std::isfinite(lr.loss))
        throw NumericError("train: loss diverged (not finite) at epoch " +
                           std::to_string(e + 1) + " batch " +
                           std::to_string(batch_index));
      loss_sum += lr.loss * bs;
      for (int b = 0; b < bs; ++b) jaccard_sum += sample_jaccard(pred, y, b);
      net.backward(lr.grad);
      opt.step(params);
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = e + 1;
    rec.mean_loss = loss_sum / n;
    rec.mean_jaccard = jaccard_sum / n;
    rec.seconds = std::chrono::duration<double>(t1 - t0).count();
    result.log.epochs.push_back(rec);
    if (tc.verbose) {
      std::printf("epoch %d/%d  loss %.6f  jaccard %.4f  (%.1fs)\n", e + 1,
                  tc.epochs, rec.mean_loss, rec.mean_jaccard, rec.seconds);
      std::fflush(stdout);
    }
    if (tc.checkpoint_every > 0 && (e + 1) % tc.checkpoint_every == 0 &&
        !tc.checkpoint_dir.empty()) {
      ModelCheckpoint c =
          checkpoint_from_network(net, W, H, e + 1, tc.master_seed);
      save_checkpoint(c, tc.checkpoint_dir + "/epoch_" + std::to_string(e + 1) +
                             ".ckpt");
    }
  }

  result.checkpoint =
      checkpoint_from_network(net, W, H, tc.epochs, tc.master_seed);
  return result;
}

void write_train_log_csv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open log for writing");
  out << "epoch,loss,jaccard,seconds\n";
  char buf[128];
  for (const auto& r : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.3f", r.epoch, r.mean_loss,
                  r.mean_jaccard, r.seconds);
    out << buf << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

} // namespace lesionseg
