#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lesionseg/augment.hpp"
#include "lesionseg/config.hpp"
#include "lesionseg/ensemble.hpp"
#include "lesionseg/errors.hpp"
#include "lesionseg/gradcheck.hpp"
#include "lesionseg/kernels.hpp"
#include "lesionseg/manifest.hpp"
#include "lesionseg/metrics.hpp"
#include "lesionseg/parallel.hpp"
#include "lesionseg/synth.hpp"
#include "lesionseg/train.hpp"

namespace fs = std::filesystem;
using namespace lesionseg;

namespace {

std::pair<int, int> parse_size_arg(const std::string& v) {
  const size_t x = v.find('x');
  if (x == std::string::npos)
    throw ConfigError("--size expects WxH, got '" + v + "'");
  try {
    return {std::stoi(v.substr(0, x)), std::stoi(v.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--size expects WxH, got '" + v + "'");
  }
}

std::string mask_name_for(const std::string& id) {
  // challenge-style ids keep the challenge suffix
  if (id.rfind("ISIC_", 0) == 0) return id + "_segmentation.pgm";
  return id + "_mask.pgm";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(dir + ": cannot create directory");
}

int cmd_synth(const std::string& out_dir, int count, const std::string& size,
              uint64_t seed) {
  const auto [w, h] = parse_size_arg(size);
  ensure_dir(out_dir);
  const Manifest m = generate_synth_dataset(out_dir, count, w, h, seed);
  std::printf("wrote %zu samples to %s\n", m.entries.size(), out_dir.c_str());
  return 0;
}

int cmd_augment(const std::string& config_path, const std::string& manifest_path,
                const std::string& out_dir, int variants) {
  const PipelineConfig cfg = load_config(config_path);
  const Manifest manifest = load_manifest(manifest_path);
  if (manifest.entries.empty()) throw DataError("augment: manifest is empty");
  if (!manifest.all_have_masks())
    throw DataError("augment: every manifest row needs a mask");
  if (variants < 1) throw ConfigError("augment: --variants must be >= 1");
  ensure_dir(out_dir);

  for (size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    const ImageU8 image = load_image(e.image_path);
    const BinaryMask mask = load_mask(e.mask_path);
    for (int v = 0; v < variants; ++v) {
      RngState rng = derive_rng(cfg.master_seed, static_cast<uint64_t>(v), i);
      auto [ai, am] = augment_sample(image, mask, cfg.augment, rng);
      const std::string stem = e.id + "_v" + std::to_string(v);
      save_image(ai, (fs::path(out_dir) / (stem + ".ppm")).string());
      save_mask(am, (fs::path(out_dir) / (stem + "_mask.pgm")).string());
      const ImageU8 ov = overlay(ai, am, {255, 0, 0}, 0.35);
      save_image(ov, (fs::path(out_dir) / (stem + "_overlay.ppm")).string());
    }
  }
  std::printf("wrote %d variants for %zu inputs to %s\n", variants,
              manifest.entries.size(), out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& out_dir, const std::string& size_override,
              bool have_seed, uint64_t seed_override, bool verbose) {
  PipelineConfig cfg = load_config(config_path);
  if (have_seed) {
    cfg.master_seed = seed_override;
    cfg.train.master_seed = seed_override;
  }
  if (!size_override.empty()) {
    const auto [w, h] = parse_size_arg(size_override);
    cfg.train.input_w = w;
    cfg.train.input_h = h;
  }
  ensure_dir(out_dir);
  if (cfg.train.checkpoint_every > 0) cfg.train.checkpoint_dir = out_dir;
  cfg.train.verbose = verbose;

  const Manifest manifest = load_manifest(manifest_path);
  const TrainResult result = train(manifest, cfg.train, cfg.network);
  save_checkpoint(result.checkpoint,
                  (fs::path(out_dir) / "checkpoint.ckpt").string());
  write_train_log_csv(result.log,
                      (fs::path(out_dir) / "train_log.csv").string());
  std::printf("checkpoint: %s\n",
              (fs::path(out_dir) / "checkpoint.ckpt").string().c_str());
  if (!result.log.epochs.empty()) {
    const auto& last = result.log.epochs.back();
    std::printf("final epoch %d  loss %.6f  train jaccard %.4f\n", last.epoch,
                last.mean_loss, last.mean_jaccard);
  }
  return 0;
}

int cmd_predict(const std::string& config_path, const std::string& manifest_path,
                const std::string& image_path, const std::string& out_dir,
                bool overlays) {
  const PipelineConfig cfg = load_config(config_path);
  cfg.ensemble.validate();
  ensure_dir(out_dir);

  std::vector<ModelCheckpoint> members;
  for (const auto& m : cfg.ensemble.members)
    members.push_back(load_checkpoint(m.checkpoint_path));

  struct Item {
    std::string id;
    std::string image_path;
    std::string mask_path;
  };
  std::vector<Item> items;
  if (!image_path.empty()) {
    items.push_back({fs::path(image_path).stem().string(), image_path, ""});
  } else {
    const Manifest manifest = load_manifest(manifest_path);
    if (manifest.entries.empty()) throw DataError("predict: manifest is empty");
    for (const auto& e : manifest.entries)
      items.push_back({e.id, e.image_path, e.mask_path});
  }
  if (cfg.ensemble.selection == Selection::oracle)
    for (const auto& it : items)
      if (it.mask_path.empty())
        throw DataError("predict: oracle selection requires a ground-truth "
                        "mask for every input (missing for " +
                        it.id + ")");

  parallel_for(items.size(), [&](size_t i) {
    const auto& it = items[i];
    const ImageU8 image = load_image(it.image_path);
    BinaryMask gt;
    const bool has_gt = !it.mask_path.empty();
    if (has_gt) gt = load_mask(it.mask_path);
    const EnsemblePrediction p = ensemble_predict(
        cfg.ensemble, members, image, has_gt ? &gt : nullptr);
    save_mask(p.mask, (fs::path(out_dir) / mask_name_for(it.id)).string());
    if (overlays) {
      const ImageU8 ov = overlay(image, p.mask, {0, 255, 0}, 0.35);
      save_image(ov, (fs::path(out_dir) / (it.id + "_overlay.ppm")).string());
    }
  });
  std::printf("wrote %zu masks to %s\n", items.size(), out_dir.c_str());
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& manifest_path,
                 const std::string& out_dir) {
  const PipelineConfig cfg = load_config(config_path);
  const Manifest manifest = load_manifest(manifest_path);
  ensure_dir(out_dir);
  const EvalReport report = evaluate_ensemble(cfg.ensemble, manifest);
  write_report_csv(report, (fs::path(out_dir) / "report.csv").string());
  write_report_summary(report, cfg.ensemble,
                       (fs::path(out_dir) / "summary.txt").string());
  std::printf("mean jaccard: %.6f over %zu images\n", report.mean_jaccard,
              report.rows.size());
  return 0;
}

int cmd_gradcheck(uint64_t seed, bool perturb) {
  const auto results = run_gradcheck(seed, perturb);
  std::printf("kernel backend: %s\n", kernels::backend_name());
  for (const auto& r : results)
    std::printf("%-20s max_rel_err %.3e  tol %.0e  %s\n", r.layer.c_str(),
                r.max_rel_err, r.tolerance, r.pass ? "PASS" : "FAIL");
  if (!gradcheck_all_passed(results)) {
    std::printf("gradcheck: FAILED\n");
    return 3;
  }
  std::printf("gradcheck: all layers pass\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"lesionseg: skin-lesion segmentation pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  int jobs = 1;
  bool deterministic = false;
  app.add_option("--jobs", jobs, "worker threads (results are identical)");
  app.add_flag("--deterministic", deterministic,
               "force fully sequential execution");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out = "synth";
  int synth_count = 16;
  std::string synth_size = "128x96";
  uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--count", synth_count, "number of samples");
  synth->add_option("--size", synth_size, "image size WxH");
  synth->add_option("--seed", synth_seed, "generator seed");

  // augment
  auto* augment = app.add_subcommand("augment", "emit augmented previews");
  std::string aug_config, aug_manifest, aug_out = "augmented";
  int aug_variants = 4;
  augment->add_option("--config", aug_config, "pipeline config")->required();
  augment->add_option("--manifest", aug_manifest, "dataset manifest")->required();
  augment->add_option("--out", aug_out, "output directory")->required();
  augment->add_option("--variants", aug_variants, "variants per input");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string tr_config, tr_manifest, tr_out = "run", tr_size;
  uint64_t tr_seed = 0;
  bool tr_verbose = false;
  train_cmd->add_option("--config", tr_config, "pipeline config")->required();
  train_cmd->add_option("--manifest", tr_manifest, "training manifest")->required();
  train_cmd->add_option("--out", tr_out, "output directory")->required();
  train_cmd->add_option("--size", tr_size, "override [train] input_size (WxH)");
  auto* tr_seed_opt =
      train_cmd->add_option("--seed", tr_seed, "override master seed");
  train_cmd->add_flag("--verbose", tr_verbose, "per-epoch progress lines");

  // predict
  auto* predict = app.add_subcommand("predict", "write challenge-form masks");
  std::string pr_config, pr_manifest, pr_image, pr_out = "predictions";
  bool pr_overlays = false;
  predict->add_option("--config", pr_config, "pipeline config")->required();
  predict->add_option("--manifest", pr_manifest, "inputs manifest");
  predict->add_option("--image", pr_image, "single input image");
  predict->add_option("--out", pr_out, "output directory")->required();
  predict->add_flag("--overlays", pr_overlays, "also write overlay previews");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score against ground truth");
  std::string ev_config, ev_manifest, ev_out = "evaluation";
  evaluate->add_option("--config", ev_config, "pipeline config")->required();
  evaluate->add_option("--manifest", ev_manifest, "manifest with masks")->required();
  evaluate->add_option("--out", ev_out, "report directory")->required();

  // gradcheck
  auto* gradcheck = app.add_subcommand("gradcheck", "verify analytic gradients");
  uint64_t gc_seed = 20170001ULL;
  bool gc_perturb = false;
  gradcheck->add_option("--seed", gc_seed, "probe seed");
  gradcheck
      ->add_flag("--self-test-perturb", gc_perturb,
                 "negative control: corrupt gradients, expect failure")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (deterministic) jobs = 1;
    ThreadPool::instance().set_workers(jobs);

    if (synth->parsed())
      return cmd_synth(synth_out, synth_count, synth_size, synth_seed);
    if (augment->parsed())
      return cmd_augment(aug_config, aug_manifest, aug_out, aug_variants);
    if (train_cmd->parsed())
      return cmd_train(tr_config, tr_manifest, tr_out, tr_size,
                       tr_seed_opt->count() > 0, tr_seed, tr_verbose);
    if (predict->parsed()) {
      if (pr_manifest.empty() == pr_image.empty())
        throw ConfigError("predict: pass exactly one of --manifest / --image");
      return cmd_predict(pr_config, pr_manifest, pr_image, pr_out, pr_overlays);
    }
    if (evaluate->parsed())
      return cmd_evaluate(ev_config, ev_manifest, ev_out);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, gc_perturb);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
