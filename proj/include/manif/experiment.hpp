#ifndef MANIF_EXPERIMENT_HPP
#define MANIF_EXPERIMENT_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/metrics.hpp"
#include "manif/serialize.hpp"
#include "manif/split.hpp"
#include "manif/train.hpp"
#include "manif/unlearn.hpp"

namespace manif {

enum class Method { manif_smc, manif_fixed, ga, retrain, finetune_after };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::manif_smc: return "manif_smc";
    case Method::manif_fixed: return "manif_fixed";
    case Method::ga: return "ga";
    case Method::retrain: return "retrain";
    case Method::finetune_after: return "finetune-after";
  }
  return "manif_smc";
}

inline Method method_from_string(const std::string& s) {
  if (s == "manif_smc") return Method::manif_smc;
  if (s == "manif_fixed") return Method::manif_fixed;
  if (s == "ga") return Method::ga;
  if (s == "retrain") return Method::retrain;
  if (s == "finetune-after") return Method::finetune_after;
  throw ConfigError("unknown method: " + s);
}

// Synthetic-or-file dataset description.
struct DatasetConfig {
  std::string type = "synthetic";  // "synthetic" | "idx"
  // synthetic
  int classes = 3;
  int per_class = 100;
  int dim = 2;
  double spread = 0.15;
  int test_per_class = 50;
  // idx
  std::string train_images, train_labels, test_images, test_labels;
  bool balanced_erase = false;
};

struct FinetuneConfig {
  int epochs = 10;
  double lr = 0.02;
  int batch_size = 16;
};

// Everything one experiment needs; the CLI reads this from a JSON file.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
  DatasetConfig dataset;
  EncoderSpec encoder;
  TrainConfig train;
  UnlearnConfig unlearn;
  GaConfig ga;
  FinetuneConfig finetune;
  std::vector<int> uss = {30};
};

inline ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("dataset")) {
      const json& d = j.at("dataset");
      c.dataset.type = d.value("type", c.dataset.type);
      c.dataset.classes = d.value("classes", c.dataset.classes);
      c.dataset.per_class = d.value("per_class", c.dataset.per_class);
      c.dataset.dim = d.value("dim", c.dataset.dim);
      c.dataset.spread = d.value("spread", c.dataset.spread);
      c.dataset.test_per_class = d.value("test_per_class", c.dataset.test_per_class);
      c.dataset.train_images = d.value("train_images", std::string());
      c.dataset.train_labels = d.value("train_labels", std::string());
      c.dataset.test_images = d.value("test_images", std::string());
      c.dataset.test_labels = d.value("test_labels", std::string());
      c.dataset.balanced_erase = d.value("balanced_erase", false);
      if (c.dataset.type != "synthetic" && c.dataset.type != "idx")
        throw ConfigError("dataset.type must be synthetic or idx");
    }
    c.encoder = encoder_from_json(j.at("encoder"));
    if (j.contains("train")) {
      const json& t = j.at("train");
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.lr = t.value("lr", c.train.lr);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      if (t.contains("loss"))
        c.train.loss = loss_kind_from_string(t.at("loss").get<std::string>());
      c.train.mmcr_lambda = t.value("mmcr_lambda", c.train.mmcr_lambda);
    }
    if (j.contains("unlearn")) c.unlearn = unlearn_config_from_json(j.at("unlearn"));
    if (j.contains("baselines")) {
      const json& b = j.at("baselines");
      if (b.contains("ga")) {
        const json& g = b.at("ga");
        c.ga.steps = g.value("steps", c.ga.steps);
        c.ga.lr = g.value("lr", c.ga.lr);
        c.ga.early_stop = g.value("early_stop", c.ga.early_stop);
      }
      if (b.contains("finetune")) {
        const json& f = b.at("finetune");
        c.finetune.epochs = f.value("epochs", c.finetune.epochs);
        c.finetune.lr = f.value("lr", c.finetune.lr);
        c.finetune.batch_size = f.value("batch_size", c.finetune.batch_size);
      }
    }
    if (j.contains("uss")) c.uss = j.at("uss").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw FormatError(FormatError::Code::bad_value,
                      std::string("experiment config: ") + e.what());
  }
  c.ga.loss = c.train.loss;
  c.train.validate();
  c.unlearn.validate();
  c.ga.validate();
  if (c.uss.empty()) throw ConfigError("experiment config: empty uss list");
  return c;
}

// Train/test pair per the dataset section; sub-seeded off the global seed.
inline Dataset build_train_dataset(const ExperimentConfig& c) {
  if (c.dataset.type == "idx")
    return load_idx(c.dataset.train_images, c.dataset.train_labels);
  return gen_gaussian_clusters(c.dataset.classes, c.dataset.per_class,
                               c.dataset.dim, c.dataset.spread,
                               derive_seed(c.seed, "data/train"));
}

inline Dataset build_test_dataset(const ExperimentConfig& c) {
  if (c.dataset.type == "idx")
    return load_idx(c.dataset.test_images, c.dataset.test_labels);
  return gen_gaussian_clusters(c.dataset.classes, c.dataset.test_per_class,
                               c.dataset.dim, c.dataset.spread,
                               derive_seed(c.seed, "data/test"));
}

inline ParamVector run_train(const ExperimentConfig& c, const Dataset& data,
                             std::vector<double>* loss_trace = nullptr) {
  TrainConfig cfg = c.train;
  cfg.seed = derive_seed(c.seed, "train");
  return manif::train(c.encoder, data, cfg, loss_trace);
}

inline UnlearnSplit build_split(const ExperimentConfig& c, const Dataset& data,
                                const ParamVector& theta_o, int uss) {
  return make_split(data, uss, c.unlearn.k, c.encoder, theta_o,
                    derive_seed(c.seed, "split/uss=" + std::to_string(uss)),
                    c.dataset.balanced_erase);
}

struct MethodResult {
  ParamVector theta;
  MetricsRecord metrics;
  std::optional<UnlearnReport> report;  // set for the manif methods
};

// Runs one unlearning method against a prepared split and evaluates it.
inline MethodResult run_unlearn_method(const ExperimentConfig& c, Method m,
                                       const Dataset& data,
                                       const Dataset& test_data,
                                       const ParamVector& theta_o, int uss,
                                       const UnlearnSplit& split) {
  MethodResult res;
  std::string tag = std::string("method/") + to_string(m) + "/uss=" +
                    std::to_string(uss);
  double rt = 0.0;
  switch (m) {
    case Method::manif_smc:
    case Method::manif_fixed: {
      UnlearnConfig u = c.unlearn;
      u.margin_mode =
          m == Method::manif_smc ? MarginMode::adaptive : MarginMode::fixed;
      u.seed = derive_seed(c.seed, tag);
      UnlearnReport rep = manif_smc_unlearn(c.encoder, theta_o, data, split, u);
      rt = rep.rt_seconds;
      res.theta = rep.theta_u;
      res.report = std::move(rep);
      break;
    }
    case Method::ga: {
      auto t0 = std::chrono::steady_clock::now();
      res.theta = gradient_ascent_unlearn(c.encoder, theta_o, data,
                                          split.erased, c.ga);
      rt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
               .count();
      break;
    }
    case Method::retrain: {
      TrainConfig cfg = c.train;
      cfg.seed = derive_seed(c.seed, tag);
      auto t0 = std::chrono::steady_clock::now();
      res.theta = retrain_from_scratch(c.encoder, data, split, cfg);
      rt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
               .count();
      break;
    }
    case Method::finetune_after: {
      UnlearnConfig u = c.unlearn;
      u.margin_mode = MarginMode::adaptive;
      u.seed = derive_seed(c.seed, tag);
      auto t0 = std::chrono::steady_clock::now();
      UnlearnReport rep = manif_smc_unlearn(c.encoder, theta_o, data, split, u);
      res.theta = fine_tune(c.encoder, rep.theta_u, data, split.retained,
                            c.finetune.epochs, c.finetune.lr,
                            c.finetune.batch_size,
                            derive_seed(c.seed, tag + "/finetune"));
      rt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
               .count();
      res.report = std::move(rep);
      break;
    }
  }
  res.metrics = evaluate(c.encoder, res.theta, data, split, test_data,
                         c.train.loss, rt);
  return res;
}

}  // namespace manif

#endif
