#include "lesionseg/ensemble.hpp"

#include <cstdio>
#include <fstream>

#include "lesionseg/errors.hpp"
#include "lesionseg/metrics.hpp"
#include "lesionseg/morphology.hpp"
#include "lesionseg/parallel.hpp"

namespace lesionseg {

void EnsembleConfig::validate() const {
  if (members.empty())
    throw ConfigError("ensemble: at least one member required");
  for (const auto& m : members) {
    if (m.input_w < 1 || m.input_h < 1)
      throw ConfigError("ensemble: member input size must be >= 1");
    if (m.checkpoint_path.empty())
      throw ConfigError("ensemble: member checkpoint path missing");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError("ensemble: threshold must be in [0,1]");
  if (erosion_kw < 1 || erosion_kh < 1)
    throw ConfigError("ensemble: erosion kernel must be >= 1");
}

void EvalReport::finalize() {
  double s = 0.0;
  for (const auto& r : rows) s += r.jaccard;
  mean_jaccard = rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

BinaryMask predict_single(const ModelCheckpoint& ckpt, const ImageU8& image,
                          int input_w, int input_h, double threshold) {
  if (image.channels != 3)
    throw DataError("predict_single: image must have 3 channels");
  Network<float> net = network_from_checkpoint(ckpt);

  const ImageU8 gray = to_grayscale3(image);
  const ImageU8 small = resize_bilinear(gray, input_w, input_h);
  Tensor4 x(1, 3, input_h, input_w);
  for (int y = 0; y < input_h; ++y)
    for (int xx = 0; xx < input_w; ++xx)
      for (int c = 0; c < 3; ++c)
        x.at(0, c, y, xx) = static_cast<float>(small.at(xx, y, c)) / 255.0f;

  const Tensor4 prob = net.forward(x, Mode::eval, nullptr);
  BinaryMask small_mask(input_w, input_h);
  for (int y = 0; y < input_h; ++y)
    for (int xx = 0; xx < input_w; ++xx)
      small_mask.at(xx, y) =
          prob.at(0, 0, y, xx) >= static_cast<float>(threshold) ? 1 : 0;
  return resize_mask_nearest(small_mask, image.width, image.height);
}

size_t select_oracle(const std::vector<BinaryMask>& predictions,
                     const BinaryMask& ground_truth) {
  if (predictions.empty()) throw DataError("select_oracle: no predictions");
  size_t best = 0;
  double best_j = -1.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double j = jaccard(predictions[i], ground_truth);
    if (j > best_j) {
      best_j = j;
      best = i;
    }
  }
  return best;
}

size_t select_consensus(const std::vector<BinaryMask>& predictions) {
  if (predictions.empty()) throw DataError("select_consensus: no predictions");
  if (predictions.size() == 1) return 0;
  size_t best = 0;
  double best_score = -1.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    double s = 0.0;
    for (size_t j = 0; j < predictions.size(); ++j)
      if (j != i) s += jaccard(predictions[i], predictions[j]);
    s /= static_cast<double>(predictions.size() - 1);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

BinaryMask postprocess(const BinaryMask& mask, const EnsembleConfig& config) {
  BinaryMask out = mask;
  if (config.closing_enabled)
    out = close_holes(out, config.erosion_kw, config.erosion_kh);
  if (config.erosion_enabled)
    out = erode(out, config.erosion_kw, config.erosion_kh);
  return out;
}

EnsemblePrediction ensemble_predict(const EnsembleConfig& config,
                                    const std::vector<ModelCheckpoint>& members,
                                    const ImageU8& image,
                                    const BinaryMask* ground_truth) {
  config.validate();
  if (members.size() != config.members.size())
    throw DataError("ensemble_predict: loaded members do not match config");
  if (config.selection == Selection::oracle && ground_truth == nullptr)
    throw DataError("ensemble_predict: oracle selection requires ground truth");

  std::vector<BinaryMask> preds(members.size());
  for (size_t i = 0; i < members.size(); ++i)
    preds[i] = predict_single(members[i], image, config.members[i].input_w,
                              config.members[i].input_h, config.threshold);

  size_t pick = 0;
  switch (config.selection) {
    case Selection::oracle: pick = select_oracle(preds, *ground_truth); break;
    case Selection::consensus: pick = select_consensus(preds); break;
    case Selection::single: pick = 0; break;
  }
  EnsemblePrediction out;
  out.member = pick;
  out.raw_mask = preds[pick];
  out.mask = postprocess(preds[pick], config);
  return out;
}

EvalReport evaluate_ensemble_with(const MemberPredictFn& predict,
                                  size_t member_count,
                                  const EnsembleConfig& config,
                                  const Manifest& manifest) {
  if (manifest.entries.empty())
    throw DataError("evaluate: manifest is empty");
  if (!manifest.all_have_masks())
    throw DataError("evaluate: every manifest row needs a ground-truth mask");

  EvalReport report;
  report.rows.resize(manifest.entries.size());
  parallel_for(manifest.entries.size(), [&](size_t idx) {
    const auto& e = manifest.entries[idx];
    const ImageU8 image = load_image(e.image_path);
    const BinaryMask gt = load_mask(e.mask_path);

    std::vector<BinaryMask> preds(member_count);
    for (size_t m = 0; m < member_count; ++m) preds[m] = predict(m, image);

    size_t pick = 0;
    switch (config.selection) {
      case Selection::oracle: pick = select_oracle(preds, gt); break;
      case Selection::consensus: pick = select_consensus(preds); break;
      case Selection::single: pick = 0; break;
    }
    const BinaryMask final_mask = postprocess(preds[pick], config);
    report.rows[idx] = {e.id, jaccard(final_mask, gt), static_cast<int>(pick)};
  });
  report.finalize();
  return report;
}

EvalReport evaluate_ensemble(const EnsembleConfig& config,
                             const Manifest& manifest) {
  config.validate();
  std::vector<ModelCheckpoint> members;
  members.reserve(config.members.size());
  for (const auto& m : config.members)
    members.push_back(load_checkpoint(m.checkpoint_path));
  auto predict = [&](size_t m, const ImageU8& image) {
    return predict_single(members[m], image, config.members[m].input_w,
                          config.members[m].input_h, config.threshold);
  };
  return evaluate_ensemble_with(predict, members.size(), config, manifest);
}

EvalReport evaluate_model(const ModelCheckpoint& ckpt, const Manifest& manifest,
                          double threshold) {
  EnsembleConfig cfg;
  cfg.members = {{"<in-memory>", ckpt.input_w, ckpt.input_h}};
  cfg.selection = Selection::single;
  cfg.threshold = threshold;
  cfg.erosion_enabled = false;
  auto predict = [&](size_t, const ImageU8& image) {
    return predict_single(ckpt, image, ckpt.input_w, ckpt.input_h, threshold);
  };
  return evaluate_ensemble_with(predict, 1, cfg, manifest);
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open report for writing");
  out << "id,jaccard,member\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.9f", r.jaccard);
    out << r.id << "," << buf << "," << r.member << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

void write_report_summary(const EvalReport& report,
                          const EnsembleConfig& config,
                          const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open summary for writing");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", report.mean_jaccard);
  out << "mean_jaccard = " << buf << "\n";
  out << "images = " << report.rows.size() << "\n";
  const char* sel = config.selection == Selection::oracle      ? "oracle"
                    : config.selection == Selection::consensus ? "consensus"
                                                               : "single";
  out << "selection = " << sel << "\n";
  std::snprintf(buf, sizeof(buf), "%g", config.threshold);
  out << "threshold = " << buf << "\n";
  out << "erosion_enabled = " << (config.erosion_enabled ? "true" : "false")
      << "\n";
  out << "erosion_kernel = " << config.erosion_kw << "x" << config.erosion_kh
      << "\n";
  out << "closing_enabled = " << (config.closing_enabled ? "true" : "false")
      << "\n";
  out << "members = " << config.members.size() << "\n";
  for (size_t i = 0; i < config.members.size(); ++i)
    out << "member" << i << " = " << config.members[i].checkpoint_path << " "
        << config.members[i].input_w << "x" << config.members[i].input_h
        << "\n";
  if (!out) throw DataError(path + ": write failed");
}

} // namespace lesionseg
