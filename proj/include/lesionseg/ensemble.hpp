#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lesionseg/checkpoint.hpp"
#include "lesionseg/image.hpp"
#include "lesionseg/manifest.hpp"

namespace lesionseg {

enum class Selection { oracle, consensus, single };

struct EnsembleMember {
  std::string checkpoint_path;
  int input_w = 0;
  int input_h = 0;
};

struct EnsembleConfig {
  std::vector<EnsembleMember> members;
  Selection selection = Selection::oracle;
  double threshold = 0.5;
  int erosion_kw = 10;
  int erosion_kh = 10;
  bool erosion_enabled = true;
  bool closing_enabled = false;

  void validate() const;
};

struct EvalRow {
  std::string id;
  double jaccard = 0.0;
  int member = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_jaccard = 0.0;

  void finalize();  // recomputes the mean from rows
};

// Single-model inference: grayscale-3ch, bilinear resize to the member input
// size, /255 normalization, eval forward, threshold, nearest resize back to
// the source dimensions.
BinaryMask predict_single(const ModelCheckpoint& ckpt, const ImageU8& image,
                          int input_w, int input_h, double threshold);

// Index of the prediction with the highest Jaccard against ground truth;
// ties break to the lowest index.
size_t select_oracle(const std::vector<BinaryMask>& predictions,
                     const BinaryMask& ground_truth);

// Label-free surrogate: index maximizing the mean pairwise Jaccard with the
// other predictions; ties break to the lowest index.
size_t select_consensus(const std::vector<BinaryMask>& predictions);

// Post-processing applied to the selected mask (optional closing, then
// erosion), per the ensemble configuration.
BinaryMask postprocess(const BinaryMask& mask, const EnsembleConfig& config);

struct EnsemblePrediction {
  BinaryMask mask;      // post-processed
  size_t member = 0;    // selected member index
  BinaryMask raw_mask;  // selected mask before post-processing
};

EnsemblePrediction ensemble_predict(const EnsembleConfig& config,
                                    const std::vector<ModelCheckpoint>& members,
                                    const ImageU8& image,
                                    const BinaryMask* ground_truth);

// Evaluation harness over a manifest with ground truth. `predict` maps
// (member index, image) to a raw mask; the production entry point below wires
// checkpoints into it.
using MemberPredictFn = std::function<BinaryMask(size_t, const ImageU8&)>;

EvalReport evaluate_ensemble_with(const MemberPredictFn& predict,
                                  size_t member_count,
                                  const EnsembleConfig& config,
                                  const Manifest& manifest);

EvalReport evaluate_ensemble(const EnsembleConfig& config,
                             const Manifest& manifest);

// Single-model evaluation: predict_single per manifest row, Jaccard against
// ground truth, no post-processing. Member column is always 0.
EvalReport evaluate_model(const ModelCheckpoint& ckpt, const Manifest& manifest,
                          double threshold = 0.5);

void write_report_csv(const EvalReport& report, const std::string& path);
void write_report_summary(const EvalReport& report,
                          const EnsembleConfig& config,
                          const std::string& path);

} // namespace lesionseg
