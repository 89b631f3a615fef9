// Copyright 2026 The neuroprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "neuroprune/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neuroprune/error.hpp"
#include "neuroprune/rng.hpp"

namespace neuroprune {

double cross_entropy(double p) { return -std::log(std::max(p, kProbabilityClamp)); }

void TrainConfig::validate() const {
  require(std::isfinite(learning_rate) && learning_rate >= 0.0, ErrorKind::kInvalidArgument,
          "learning rate must be finite and non-negative");
  require(batch_size >= 1, ErrorKind::kInvalidArgument, "batch size must be at least 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid training config: ") + e.what());
  }
  c.validate();
  return c;
}

MetricsAccumulator::MetricsAccumulator(std::size_t num_classes)
    : loss_(num_classes, 0.0), correct_(num_classes, 0), count_(num_classes, 0) {}

void MetricsAccumulator::add(std::span<const float> probabilities, std::size_t label) {
  require(label < count_.size(), ErrorKind::kInvalidArgument,
          "label " + std::to_string(label) + " out of range");
  const auto best = static_cast<std::size_t>(
      std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin());
  loss_[label] += cross_entropy(probabilities[label]);
  correct_[label] += best == label ? 1 : 0;
  ++count_[label];
}

EvalMetrics MetricsAccumulator::finish() const {
  EvalMetrics m;
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < count_.size(); ++k) {
    loss += loss_[k];
    correct += correct_[k];
    m.count += count_[k];
    const double n = static_cast<double>(count_[k]);
    m.class_count.push_back(count_[k]);
    m.class_loss.push_back(count_[k] ? loss_[k] / n : 0.0);
    m.class_accuracy.push_back(count_[k] ? static_cast<double>(correct_[k]) / n : 0.0);
  }
  if (m.count > 0) {
    m.loss = loss / static_cast<double>(m.count);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.count);
  }
  return m;
}

nlohmann::json to_json(const EvalMetrics& m) {
  return {{"loss", m.loss},
          {"accuracy", m.accuracy},
          {"count", m.count},
          {"class_loss", m.class_loss},
          {"class_accuracy", m.class_accuracy},
          {"class_count", m.class_count}};
}

EvalMetrics evaluate(const Network& net, const Dataset& data, const PruneMask* masks) {
  net.architecture().validate(/*require_softmax_terminal=*/true);
  MetricsAccumulator acc(std::max(data.num_classes(), net.output_size()));
  ForwardOptions opts;
  opts.masks = masks;
  for (std::size_t i = 0; i < data.size(); ++i) {
    acc.add(forward(net, data.image(i), opts), data.labels[i]);
  }
  EvalMetrics m = acc.finish();
  m.class_loss.resize(data.num_classes());
  m.class_accuracy.resize(data.num_classes());
  m.class_count.resize(data.num_classes());
  return m;
}

bool TrainingLog::operator==(const TrainingLog& other) const {
  if (epochs.size() != other.epochs.size()) return false;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const EpochRecord& a = epochs[i];
    const EpochRecord& b = other.epochs[i];
    if (a.epoch != b.epoch || a.train_loss != b.train_loss ||
        a.train_accuracy != b.train_accuracy || a.val_loss != b.val_loss ||
        a.val_accuracy != b.val_accuracy) {
      return false;
    }
  }
  return true;
}

nlohmann::json to_json(const TrainingLog& log) {
  nlohmann::json out = nlohmann::json::array();
  for (const EpochRecord& e : log.epochs) {
    nlohmann::json r = {{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"train_accuracy", e.train_accuracy}};
    if (e.val_loss) r["val_loss"] = *e.val_loss;
    if (e.val_accuracy) r["val_accuracy"] = *e.val_accuracy;
    out.push_back(std::move(r));
  }
  return out;
}

TrainingLog train_sgd(Network& net, const Dataset& train, const Dataset* validation,
                      const TrainConfig& config, const PruneMask* masks) {
  config.validate();
  net.architecture().validate(/*require_softmax_terminal=*/true);
  require(train.size() > 0, ErrorKind::kInvalidArgument, "training set is empty");
  require(train.image_size() == net.input_size(), ErrorKind::kShapeMismatch,
          "training images have " + std::to_string(train.image_size()) +
              " values, network expects " + std::to_string(net.input_size()));
  if (masks) masks->validate(net.architecture());

  TrainingLog log;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Gradients<float> grads = Gradients<float>::zeros_like(net);
  ForwardCache<float> cache;
  std::vector<float> grad_out(net.output_size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = mix_seed(config.seed, epoch);
    Rng(epoch_seed).shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, batch = 0; start < order.size();
         start += config.batch_size, ++batch) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (auto& g : grads.layers) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0f);
        std::fill(g.bias.begin(), g.bias.end(), 0.0f);
      }
      double batch_loss = 0.0;
      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        const std::size_t label = train.labels[idx];
        ForwardOptions opts;
        opts.training = true;
        opts.dropout_seed = mix_seed(epoch_seed, pos + 1);
        opts.masks = masks;
        const std::vector<float> p = forward(net, train.image(idx), opts, &cache);
        batch_loss += cross_entropy(p[label]);
        const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        correct += best == label ? 1 : 0;

        std::fill(grad_out.begin(), grad_out.end(), 0.0f);
        // d(-log p_y)/dp_y; zero where the clamp is active.
        if (static_cast<double>(p[label]) > kProbabilityClamp) grad_out[label] = -1.0f / p[label];
        accumulate_param_gradients(net, cache, std::span<const float>(grad_out), grads);
      }
      require(std::isfinite(batch_loss), ErrorKind::kNumerical,
              "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                  std::to_string(batch));
      loss_sum += batch_loss;

      const float step = static_cast<float>(config.learning_rate /
                                            static_cast<double>(stop - start));
      if (step == 0.0f) continue;
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& p = net.params(l);
        const auto& g = grads.layers[l];
        for (std::size_t k = 0; k < p.weights.size(); ++k) p.weights[k] -= step * g.weights[k];
        for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= step * g.bias[k];
      }
      for (std::size_t l = 0; l < net.num_layers(); ++l) {
        for (float w : net.params(l).weights) {
          require(std::isfinite(w), ErrorKind::kNumerical,
                  "non-finite weight after epoch " + std::to_string(epoch) + ", batch " +
                      std::to_string(batch));
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    if (validation && validation->size() > 0) {
      const EvalMetrics m = evaluate(net, *validation, masks);
      rec.val_loss = m.loss;
      rec.val_accuracy = m.accuracy;
    }
    log.epochs.push_back(rec);
  }
  return log;
}

}  // namespace neuroprune
