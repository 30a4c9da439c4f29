#ifndef MANIF_METRICS_HPP
#define MANIF_METRICS_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "manif/dataset.hpp"
#include "manif/encoder.hpp"
#include "manif/errors.hpp"
#include "manif/losses.hpp"
#include "manif/split.hpp"

namespace manif {

// One evaluation row: membership-inference success on the erased set,
// retained accuracy, test accuracy, and the unlearning wall-clock time
// passed through from the method. The reconstruction fields are only
// meaningful for representation_mse-trained models and are NaN otherwise.
struct MetricsRecord {
  double mia = 0.0;         // erased flagged as non-members, in [0,1]
  double ra = 0.0;          // retained accuracy
  double ta = 0.0;          // test accuracy
  double rt_seconds = 0.0;  // unlearning wall-clock time
  double r_mse = std::numeric_limits<double>::quiet_NaN();
  double t_mse = std::numeric_limits<double>::quiet_NaN();
};

inline int argmax_class(const Vec& logits) {
  int arg = 0;
  for (std::size_t j = 1; j < logits.size(); ++j)
    if (logits[j] > logits[arg]) arg = static_cast<int>(j);  // ties: lowest index
  return arg;
}

// Mean argmax accuracy over the given indices (whole dataset when empty
// indices are not supplied). Requires a class head.
inline double accuracy(const EncoderSpec& spec, const ParamVector& params,
                       const Dataset& data, const std::vector<int>& indices) {
  if (!spec.head) throw ConfigError("accuracy: spec has no class head");
  if (indices.empty()) throw DimensionError("accuracy: empty index set");
  int correct = 0;
  for (int i : indices) {
    const Vec logits = forward(spec, params, data.inputs[i]).logits;
    if (argmax_class(logits) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / indices.size();
}

inline double accuracy(const EncoderSpec& spec, const ParamVector& params,
                       const Dataset& data) {
  std::vector<int> all(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) all[i] = static_cast<int>(i);
  return accuracy(spec, params, data, all);
}

// Loss-threshold membership attack. The attacker's threshold is the mean
// per-sample training loss over the retained set; an erased sample is
// flagged as a non-member when its loss exceeds the threshold. Returns the
// flagged fraction (the attack's success rate at identifying erasure).
inline double mia_success_rate(const EncoderSpec& spec,
                               const ParamVector& params, const Dataset& data,
                               const std::vector<int>& erased,
                               const std::vector<int>& retained,
                               LossKind kind) {
  if (erased.empty() || retained.empty())
    throw DimensionError("mia: empty erased or retained set");
  double tau = 0.0;
  for (int i : retained)
    tau += sample_training_loss(spec, params, data.inputs[i], data.labels[i],
                                kind);
  tau /= retained.size();
  int flagged = 0;
  for (int i : erased)
    if (sample_training_loss(spec, params, data.inputs[i], data.labels[i],
                             kind) > tau)
      ++flagged;
  return static_cast<double>(flagged) / erased.size();
}

inline double mean_reconstruction_error(const EncoderSpec& spec,
                                        const ParamVector& params,
                                        const Dataset& data,
                                        const std::vector<int>& indices) {
  double s = 0.0;
  for (int i : indices)
    s += sample_training_loss(spec, params, data.inputs[i], data.labels[i],
                              LossKind::representation_mse);
  return s / indices.size();
}

// Full evaluation of an unlearned (or original) model against a split and
// a held-out test set. `rt_seconds` is passed through untouched.
inline MetricsRecord evaluate(const EncoderSpec& spec,
                              const ParamVector& params, const Dataset& data,
                              const UnlearnSplit& split,
                              const Dataset& test_data, LossKind kind,
                              double rt_seconds) {
  split.validate(data.size());
  MetricsRecord rec;
  rec.mia = mia_success_rate(spec, params, data, split.erased, split.retained,
                             kind);
  if (spec.head) {
    rec.ra = accuracy(spec, params, data, split.retained);
    rec.ta = accuracy(spec, params, test_data);
  } else {
    rec.ra = std::numeric_limits<double>::quiet_NaN();
    rec.ta = std::numeric_limits<double>::quiet_NaN();
  }
  if (kind == LossKind::representation_mse) {
    std::vector<int> all_test(test_data.size());
    for (std::size_t i = 0; i < test_data.size(); ++i)
      all_test[i] = static_cast<int>(i);
    rec.r_mse = mean_reconstruction_error(spec, params, data, split.retained);
    rec.t_mse = mean_reconstruction_error(spec, params, test_data, all_test);
  }
  rec.rt_seconds = rt_seconds;
  return rec;
}

}  // namespace manif

#endif
