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

#include "neuroprune/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "neuroprune/error.hpp"
#include "neuroprune/io.hpp"
#include "neuroprune/training.hpp"

namespace neuroprune {

std::string_view quadrature_rule_name(QuadratureRule rule) {
  return rule == QuadratureRule::kMidpoint ? "midpoint" : "left";
}

QuadratureRule parse_quadrature_rule(std::string_view name) {
  if (name == "midpoint") return QuadratureRule::kMidpoint;
  if (name == "left") return QuadratureRule::kLeft;
  fail(ErrorKind::kInvalidArgument,
       "unknown quadrature rule '" + std::string(name) + "' (expected midpoint or left)");
}

std::string_view target_mode_name(TargetMode mode) {
  return mode == TargetMode::kSoftmax ? "softmax" : "logit";
}

TargetMode parse_target_mode(std::string_view name) {
  if (name == "softmax") return TargetMode::kSoftmax;
  if (name == "logit") return TargetMode::kLogit;
  fail(ErrorKind::kInvalidArgument,
       "unknown target mode '" + std::string(name) + "' (expected softmax or logit)");
}

void IgSettings::validate() const {
  require(steps >= 1, ErrorKind::kInvalidArgument, "integration steps must be at least 1");
  require(gap_threshold > 0.0, ErrorKind::kInvalidArgument, "gap threshold must be positive");
}

std::vector<double> IgSettings::alphas() const {
  validate();
  std::vector<double> a(steps);
  const double n = static_cast<double>(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    a[s] = rule == QuadratureRule::kMidpoint ? (static_cast<double>(s) + 0.5) / n
                                             : static_cast<double>(s) / n;
  }
  return a;
}

nlohmann::json to_json(const IgSettings& s) {
  return {{"steps", s.steps},
          {"rule", quadrature_rule_name(s.rule)},
          {"target", target_mode_name(s.target)},
          {"gap_threshold", s.gap_threshold}};
}

IgSettings ig_settings_from_json(const nlohmann::json& j) {
  IgSettings s;
  try {
    s.steps = j.value("steps", s.steps);
    if (j.contains("rule")) s.rule = parse_quadrature_rule(j.at("rule").get<std::string>());
    if (j.contains("target")) s.target = parse_target_mode(j.at("target").get<std::string>());
    s.gap_threshold = j.value("gap_threshold", s.gap_threshold);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("invalid attribution settings: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<double> AttributionMatrix::column(std::size_t j) const {
  require(j < outputs, ErrorKind::kInvalidArgument, "output index out of range");
  std::vector<double> c(neurons);
  for (std::size_t i = 0; i < neurons; ++i) c[i] = at(i, j);
  return c;
}

std::vector<double> ig_input(const BasicNetwork<double>& net, std::span<const double> x,
                             const BaselineSpec& baseline, std::size_t j,
                             const IgSettings& settings) {
  settings.validate();
  require(x.size() == net.input_size(), ErrorKind::kShapeMismatch,
          "input has " + std::to_string(x.size()) + " values, network expects " +
              std::to_string(net.input_size()));
  std::vector<double> base(x.size(), 0.0);
  if (baseline.kind == BaselineSpec::Kind::kCustom) {
    require(baseline.values.size() == x.size(), ErrorKind::kShapeMismatch,
            "baseline has " + std::to_string(baseline.values.size()) +
                " values, input has " + std::to_string(x.size()));
    base = baseline.values;
  }
  const std::size_t end = settings.target == TargetMode::kSoftmax ? net.num_layers()
                                                                   : net.num_layers() - 1;
  require(j < shape_size(net.shape(end)), ErrorKind::kInvalidArgument,
          "output index " + std::to_string(j) + " out of range");

  std::vector<double> sum(x.size(), 0.0);
  std::vector<double> point(x.size());
  std::vector<double> seed(shape_size(net.shape(end)), 0.0);
  seed[j] = 1.0;
  ForwardCache<double> cache;
  for (double a : settings.alphas()) {
    for (std::size_t i = 0; i < x.size(); ++i) point[i] = base[i] + a * (x[i] - base[i]);
    forward_range(net, 0, end, std::span<const double>(point), {}, &cache);
    const auto g = backward_to(net, cache, std::span<const double>(seed), 0, nullptr);
    for (std::size_t i = 0; i < x.size(); ++i) sum[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(settings.steps);
  for (std::size_t i = 0; i < x.size(); ++i) sum[i] = (x[i] - base[i]) * (sum[i] * inv);
  return sum;
}

InternalAttributor::InternalAttributor(const Network& net, std::size_t layer_index,
                                       IgSettings settings)
    : split_(split_at(net, layer_index)),
      tail64_(split_.tail.cast<double>()),
      settings_(settings) {
  settings_.validate();
  const std::size_t n_layers = tail64_.num_layers();
  require(tail64_.layer(0).kind == LayerKind::kDense &&
              tail64_.layer(n_layers - 1).kind == LayerKind::kSoftmax,
          ErrorKind::kInternal, "split tail must start dense and end in softmax");
  neurons_ = tail64_.input_size();
  outputs_ = tail64_.output_size();
  const std::vector<double> zero(neurons_, 0.0);
  tail_at_zero_ = tail(zero);
  probs_at_zero_ = tail_probabilities(zero);
}

std::vector<double> InternalAttributor::head(std::span<const float> x) const {
  const std::vector<float> h = forward(split_.head, x);
  return {h.begin(), h.end()};
}

std::vector<double> InternalAttributor::tail(std::span<const double> h) const {
  const std::size_t end = settings_.target == TargetMode::kSoftmax ? tail64_.num_layers()
                                                                    : tail64_.num_layers() - 1;
  return forward_range(tail64_, 0, end, h);
}

std::vector<double> InternalAttributor::tail_probabilities(std::span<const double> h) const {
  return forward(tail64_, h);
}

void InternalAttributor::integrate(std::span<const double> h, std::size_t label, bool with_loss,
                                   AttributionMatrix* matrix, LossAttributionVector* loss) const {
  require(h.size() == neurons_, ErrorKind::kShapeMismatch,
          "activation vector has " + std::to_string(h.size()) + " entries, layer has " +
              std::to_string(neurons_));
  const LayerSpec& first = tail64_.layer(0);
  const std::size_t width = first.out;
  const std::vector<double>& w1 = tail64_.params(0).weights;
  const std::vector<double>& b1 = tail64_.params(0).bias;
  const std::size_t logits_end = tail64_.num_layers() - 1;
  const std::size_t n = outputs_;

  std::vector<double> u(width, 0.0);
  for (std::size_t k = 0; k < width; ++k) {
    const double* row = w1.data() + k * neurons_;
    double acc = 0.0;
    for (std::size_t i = 0; i < neurons_; ++i) acc += row[i] * h[i];
    u[k] = acc;
  }

  // rows 0..n-1: output targets; row n: loss.
  const std::size_t rows = n + (with_loss ? 1 : 0);
  std::vector<double> K(rows * width, 0.0);
  std::vector<double> jac(n * width);
  std::vector<double> z(width), mean(width), seed(n, 0.0);
  ForwardCache<double> cache;
  for (double a : settings_.alphas()) {
    for (std::size_t k = 0; k < width; ++k) z[k] = a * u[k] + b1[k];
    std::vector<double> p = forward_range(tail64_, 1, logits_end, std::span<const double>(z),
                                          {}, &cache);
    for (std::size_t j = 0; j < n; ++j) {
      seed[j] = 1.0;
      const auto g = backward_to(tail64_, cache, std::span<const double>(seed), 1, nullptr);
      seed[j] = 0.0;
      std::copy(g.begin(), g.end(), jac.begin() + static_cast<std::ptrdiff_t>(j * width));
    }
    softmax_inplace(std::span<double>(p));

    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < width; ++k) mean[k] += p[j] * jac[j * width + k];
    }
    for (std::size_t j = 0; j < n; ++j) {
      double* dst = K.data() + j * width;
      const double* src = jac.data() + j * width;
      if (settings_.target == TargetMode::kLogit) {
        for (std::size_t k = 0; k < width; ++k) dst[k] += src[k];
      } else {
        for (std::size_t k = 0; k < width; ++k) dst[k] += p[j] * (src[k] - mean[k]);
      }
    }
    if (with_loss && p[label] > kProbabilityClamp) {
      double* dst = K.data() + n * width;
      const double* src = jac.data() + label * width;
      for (std::size_t k = 0; k < width; ++k) dst[k] += mean[k] - src[k];
    }
  }

  // Project back through W1: v_r = K_r W1, A_ir = h_i v_r[i] / steps.
  const double inv = 1.0 / static_cast<double>(settings_.steps);
  std::vector<double> v(rows * neurons_, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* vr = v.data() + r * neurons_;
    for (std::size_t k = 0; k < width; ++k) {
      const double kr = K[r * width + k];
      if (kr == 0.0) continue;
      const double* row = w1.data() + k * neurons_;
      for (std::size_t i = 0; i < neurons_; ++i) vr[i] += kr * row[i];
    }
  }
  if (matrix) {
    matrix->neurons = neurons_;
    matrix->outputs = n;
    matrix->values.assign(neurons_ * n, 0.0);
    for (std::size_t i = 0; i < neurons_; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        matrix->values[i * n + j] = h[i] * (v[j * neurons_ + i] * inv);
      }
    }
  }
  if (loss) {
    loss->values.assign(neurons_, 0.0);
    if (with_loss) {
      for (std::size_t i = 0; i < neurons_; ++i) {
        loss->values[i] = h[i] * (v[n * neurons_ + i] * inv);
      }
    }
  }
}

AttributionMatrix InternalAttributor::attribute(std::span<const float> x,
                                                std::uint32_t sample_id) const {
  AttributionMatrix m;
  m.activations = head(x);
  integrate(m.activations, 0, false, &m, nullptr);
  m.sample_id = sample_id;
  m.split_index = split_.split_index;
  m.steps = settings_.steps;
  m.gaps = completeness_gap(m);
  return m;
}

void InternalAttributor::attribute_with_loss(std::span<const float> x, std::size_t label,
                                             std::uint32_t sample_id, AttributionMatrix& matrix,
                                             LossAttributionVector& loss) const {
  require(label < outputs_, ErrorKind::kInvalidArgument,
          "label " + std::to_string(label) + " out of range for " + std::to_string(outputs_) +
              " outputs");
  matrix.activations = head(x);
  integrate(matrix.activations, label, true, &matrix, &loss);
  matrix.sample_id = sample_id;
  matrix.split_index = split_.split_index;
  matrix.steps = settings_.steps;
  matrix.gaps = completeness_gap(matrix);

  loss.sample_id = sample_id;
  loss.true_label = label;
  const std::vector<double> p = tail_probabilities(matrix.activations);
  const double delta = cross_entropy(p[label]) - cross_entropy(probs_at_zero_[label]);
  double sum = 0.0;
  for (double v : loss.values) sum += v;
  loss.gap = std::abs(sum - delta);
}

LossAttributionVector InternalAttributor::attribute_loss(std::span<const float> x,
                                                         std::size_t label,
                                                         std::uint32_t sample_id) const {
  AttributionMatrix m;
  LossAttributionVector l;
  attribute_with_loss(x, label, sample_id, m, l);
  return l;
}

std::vector<double> InternalAttributor::completeness_gap(const AttributionMatrix& matrix) const {
  const std::vector<double> g = tail(matrix.activations);
  std::vector<double> gaps(matrix.outputs);
  for (std::size_t j = 0; j < matrix.outputs; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < matrix.neurons; ++i) sum += matrix.at(i, j);
    gaps[j] = std::abs(sum - (g[j] - tail_at_zero_[j]));
  }
  return gaps;
}

std::vector<double> ig_internal(const Network& net, std::size_t layer_index,
                                std::span<const float> x, std::size_t j,
                                const IgSettings& settings) {
  const InternalAttributor attributor(net, layer_index, settings);
  require(j < attributor.outputs(), ErrorKind::kInvalidArgument,
          "output index " + std::to_string(j) + " out of range");
  return attributor.attribute(x).column(j);
}

LossAttributionVector ig_loss(const Network& net, std::size_t layer_index,
                              std::span<const float> x, std::size_t true_label,
                              const IgSettings& settings) {
  return InternalAttributor(net, layer_index, settings).attribute_loss(x, true_label);
}

AttributionMatrix AttributionSet::matrix(std::size_t s) const {
  require(s < size(), ErrorKind::kInvalidArgument, "sample index out of range");
  AttributionMatrix m;
  m.neurons = neurons;
  m.outputs = outputs;
  const auto v = sample_values(s);
  m.values.assign(v.begin(), v.end());
  const auto a = sample_activations(s);
  m.activations.assign(a.begin(), a.end());
  m.gaps.assign(gaps.begin() + static_cast<std::ptrdiff_t>(s * outputs),
                gaps.begin() + static_cast<std::ptrdiff_t>((s + 1) * outputs));
  m.sample_id = sample_ids[s];
  m.split_index = split_index;
  m.steps = settings.steps;
  return m;
}

double AttributionSet::max_gap() const {
  return gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
}

double AttributionSet::max_loss_gap() const {
  return loss_gaps.empty() ? 0.0 : *std::max_element(loss_gaps.begin(), loss_gaps.end());
}

AttributionSet attribute_dataset(const Network& net, std::size_t layer_index,
                                 const Dataset& data, const IgSettings& settings,
                                 const ProgressFn& progress) {
  const InternalAttributor attributor(net, layer_index, settings);
  require(data.size() > 0, ErrorKind::kInvalidArgument, "cannot attribute an empty dataset");
  require(data.num_classes() <= attributor.outputs(), ErrorKind::kShapeMismatch,
          "dataset has " + std::to_string(data.num_classes()) + " classes, network outputs " +
              std::to_string(attributor.outputs()));

  AttributionSet set;
  set.split_index = attributor.split().split_index;
  set.neurons = attributor.neurons();
  set.outputs = attributor.outputs();
  set.num_classes = data.num_classes();
  set.settings = settings;
  set.sample_ids = data.ids;
  set.labels = data.labels;
  set.activations.reserve(data.size() * set.neurons);
  set.values.reserve(data.size() * set.neurons * set.outputs);
  set.loss.reserve(data.size() * set.neurons);

  AttributionMatrix m;
  LossAttributionVector l;
  for (std::size_t s = 0; s < data.size(); ++s) {
    attributor.attribute_with_loss(data.image(s), data.labels[s], data.ids[s], m, l);
    for (double v : m.values) {
      require(std::isfinite(v), ErrorKind::kNumerical,
              "non-finite attribution for sample " + std::to_string(data.ids[s]));
    }
    const double worst = *std::max_element(m.gaps.begin(), m.gaps.end());
    require(worst <= settings.gap_threshold && l.gap <= settings.gap_threshold,
            ErrorKind::kNumerical,
            "completeness gap " + format_double(std::max(worst, l.gap)) + " for sample " +
                std::to_string(data.ids[s]) + " exceeds threshold " +
                format_double(settings.gap_threshold) + " at " +
                std::to_string(settings.steps) + " steps");
    set.activations.insert(set.activations.end(), m.activations.begin(), m.activations.end());
    set.values.insert(set.values.end(), m.values.begin(), m.values.end());
    set.loss.insert(set.loss.end(), l.values.begin(), l.values.end());
    set.gaps.insert(set.gaps.end(), m.gaps.begin(), m.gaps.end());
    set.loss_gaps.push_back(l.gap);
    if (progress) progress(s + 1, data.size());
  }
  return set;
}

std::string serialize_attributions(const AttributionSet& set) {
  std::string blob;
  append_f64(blob, set.activations);
  append_f64(blob, set.values);
  append_f64(blob, set.loss);
  append_f64(blob, set.gaps);
  append_f64(blob, set.loss_gaps);
  append_u32(blob, set.sample_ids);
  blob.append(reinterpret_cast<const char*>(set.labels.data()), set.labels.size());
  nlohmann::json header = {
      {"format", "neuroprune-attributions"},
      {"dtype", "f64"},
      {"endianness", "little"},
      {"split_index", set.split_index},
      {"neurons", set.neurons},
      {"outputs", set.outputs},
      {"num_classes", set.num_classes},
      {"samples", set.size()},
      {"settings", to_json(set.settings)},
      {"blob_bytes", blob.size()},
  };
  return pack_container(kAttributionMagic, header, blob);
}

AttributionSet deserialize_attributions(std::string_view bytes) {
  const Container c = unpack_container(bytes, kAttributionMagic);
  const nlohmann::json& h = c.header;
  AttributionSet set;
  std::size_t samples = 0, blob_bytes = 0;
  try {
    require(h.at("format") == "neuroprune-attributions", ErrorKind::kCorruptHeader,
            "corrupt header: not an attribution file");
    require(h.at("dtype") == "f64", ErrorKind::kDtypeMismatch, "dtype mismatch: expected f64");
    require(h.at("endianness") == "little", ErrorKind::kEndiannessMismatch,
            "endianness mismatch: expected little");
    set.split_index = h.at("split_index").get<std::size_t>();
    set.neurons = h.at("neurons").get<std::size_t>();
    set.outputs = h.at("outputs").get<std::size_t>();
    set.num_classes = h.at("num_classes").get<std::size_t>();
    samples = h.at("samples").get<std::size_t>();
    set.settings = ig_settings_from_json(h.at("settings"));
    blob_bytes = h.at("blob_bytes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kCorruptHeader, std::string("corrupt header: ") + e.what());
  }
  const std::size_t m = set.neurons, n = set.outputs;
  const std::size_t f64_count = samples * (m + m * n + m + n + 1);
  const std::size_t expected = f64_count * 8 + samples * 4 + samples;
  require(expected == blob_bytes, ErrorKind::kSizeMismatch,
          "size mismatch: header dimensions need " + std::to_string(expected) +
              " bytes, header declares " + std::to_string(blob_bytes));
  require(c.payload.size() >= blob_bytes, ErrorKind::kTruncatedBlob,
          "truncated blob: expected " + std::to_string(blob_bytes) + " bytes, found " +
              std::to_string(c.payload.size()));
  require(c.payload.size() == blob_bytes, ErrorKind::kSizeMismatch,
          "size mismatch: trailing bytes after attribution blob");

  std::string_view rest = c.payload;
  auto take = [&](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    read_f64(rest, v);
    rest.remove_prefix(count * 8);
  };
  take(set.activations, samples * m);
  take(set.values, samples * m * n);
  take(set.loss, samples * m);
  take(set.gaps, samples * n);
  take(set.loss_gaps, samples);
  set.sample_ids.resize(samples);
  read_u32(rest, set.sample_ids);
  rest.remove_prefix(samples * 4);
  set.labels.assign(rest.begin(), rest.end());
  for (std::uint8_t l : set.labels) {
    require(l < set.num_classes, ErrorKind::kCorruptHeader,
            "label " + std::to_string(l) + " outside header class range");
  }
  return set;
}

std::string attribution_csv(const AttributionSet& set, std::size_t max_samples) {
  std::string out = "sample_id,true_label,neuron,output_class,attribution\n";
  const std::size_t count = std::min(max_samples, set.size());
  for (std::size_t s = 0; s < count; ++s) {
    const auto values = set.sample_values(s);
    const std::string prefix =
        std::to_string(set.sample_ids[s]) + "," + std::to_string(set.labels[s]) + ",";
    for (std::size_t i = 0; i < set.neurons; ++i) {
      for (std::size_t j = 0; j < set.outputs; ++j) {
        out += prefix + std::to_string(i) + "," + std::to_string(j) + "," +
               format_double(values[i * set.outputs + j]) + "\n";
      }
    }
  }
  return out;
}

nlohmann::json attribution_sidecar(const AttributionSet& set) {
  nlohmann::json gaps = nlohmann::json::array();
  double sum = 0.0;
  for (std::size_t s = 0; s < set.size(); ++s) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < set.outputs; ++j) {
      row.push_back(set.gaps[s * set.outputs + j]);
      sum += set.gaps[s * set.outputs + j];
    }
    gaps.push_back({{"sample_id", set.sample_ids[s]},
                    {"output_gaps", row},
                    {"loss_gap", set.loss_gaps[s]}});
  }
  return {{"split_index", set.split_index},
          {"neurons", set.neurons},
          {"outputs", set.outputs},
          {"samples", set.size()},
          {"steps", set.settings.steps},
          {"rule", quadrature_rule_name(set.settings.rule)},
          {"target", target_mode_name(set.settings.target)},
          {"gap_threshold", set.settings.gap_threshold},
          {"max_gap", set.max_gap()},
          {"mean_gap", set.gaps.empty() ? 0.0 : sum / static_cast<double>(set.gaps.size())},
          {"max_loss_gap", set.max_loss_gap()},
          {"completeness_gaps", gaps}};
}

}  // namespace neuroprune
