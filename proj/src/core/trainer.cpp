/* Copyright 2026 The tinykws Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tinykws/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "tinykws/error.hpp"
#include "tinykws/rng.hpp"
#include "tinykws/serialize.hpp"

namespace tinykws {

SgdState SgdState::zeros_like(std::span<const ParamRef> params, double lr, double momentum) {
  SgdState s;
  s.lr = lr;
  s.momentum = momentum;
  s.velocity.reserve(params.size());
  for (const auto& p : params) s.velocity.emplace_back(p.tensor->shape());
  return s;
}

SgdState::SgdState(const Model& model, double lr_, double momentum_) : lr(lr_), momentum(momentum_) {
  for (const auto& p : model.parameters()) velocity.emplace_back(p.tensor->shape());
}

void sgd_momentum_step(std::span<const ParamRef> params, const Gradients& grads, SgdState& state) {
  if (params.size() != grads.size() || params.size() != state.velocity.size()) {
    throw InvalidArgument("sgd step: " + std::to_string(params.size()) + " parameters, " +
                          std::to_string(grads.size()) + " gradients, " +
                          std::to_string(state.velocity.size()) + " velocities");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& w = *params[i].tensor;
    Tensor& v = state.velocity[i];
    if (grads[i].shape() != w.shape() || v.shape() != w.shape()) {
      throw ShapeError("sgd step: " + params[i].name + " has shape " + w.shape().str() +
                       ", gradient " + grads[i].shape().str() + ", velocity " + v.shape().str());
    }
    auto wd = w.data();
    auto vd = v.data();
    auto gd = grads[i].data();
    for (std::size_t j = 0; j < wd.size(); ++j) {
      vd[j] = state.momentum * vd[j] + gd[j];
      wd[j] -= state.lr * vd[j];
    }
  }
}

namespace {

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

void check_compatible(const Model& model, const FeatureSet& set, const char* what) {
  const Shape& in = model.config().input_shape;
  const Shape& s = set.sample_shape;
  if (s.c != in.c || s.h != in.h || s.w != in.w) {
    throw ShapeError(std::string(what) + " samples have shape " + s.str() +
                     " but the model expects " + in.str());
  }
  const auto k = static_cast<int>(model.config().n_classes);
  for (int label : set.labels) {
    if (label < 0 || label >= k) {
      throw InvalidArgument(std::string(what) + " label " + std::to_string(label) +
                            " is outside [0, " + std::to_string(k) + ")");
    }
  }
}

struct Snapshot {
  std::vector<Tensor> params;
  std::vector<Tensor> buffers;
};

Snapshot take_snapshot(const Model& model) {
  Snapshot s;
  for (const auto& p : model.parameters()) s.params.push_back(*p.tensor);
  for (const auto& b : model.buffers()) s.buffers.push_back(*b.tensor);
  return s;
}

void restore_snapshot(Model& model, const Snapshot& s) {
  auto params = model.parameters();
  auto buffers = model.buffers();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].tensor = s.params[i];
  for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i].tensor = s.buffers[i];
}

constexpr std::size_t kEvalBatch = 128;

}  // namespace

std::vector<int> predict_labels(const Model& model, const FeatureSet& set, Precision precision) {
  check_compatible(model, set, "evaluation");
  std::vector<int> out;
  out.reserve(set.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < set.size(); start += kEvalBatch) {
    const std::size_t end = std::min(set.size(), start + kEvalBatch);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor probs = model.predict(set.batch(idx), precision);
    const std::size_t k = probs.shape().c;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      out.push_back(static_cast<int>(argmax_row(probs.data().subspan(i * k, k))));
    }
  }
  return out;
}

double evaluate(const Model& model, const FeatureSet& set, Precision precision) {
  if (set.size() == 0) throw InvalidArgument("evaluate: split is empty");
  const auto pred = predict_labels(model, set, precision);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == set.labels[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

TrainReport train(Model& model, const FeatureSplits& splits, const TrainOptions& options) {
  TrainReport report;
  if (options.epochs == 0) return report;
  if (options.batch_size == 0) throw InvalidArgument("train: batch size must be positive");
  if (!(options.lr > 0.0) || !std::isfinite(options.lr)) {
    throw InvalidArgument("train: learning rate must be positive");
  }
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw InvalidArgument("train: momentum must be in [0, 1)");
  }
  if (splits.train.size() == 0) throw InvalidArgument("train: training split is empty");
  if (splits.val.size() == 0) throw InvalidArgument("train: validation split is empty");
  check_compatible(model, splits.train, "training");
  check_compatible(model, splits.val, "validation");
  if (!options.checkpoint_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.checkpoint_dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory " + options.checkpoint_dir);
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto params = model.parameters();
  SgdState state = SgdState::zeros_like(params, options.lr, options.momentum);
  Rng rng(options.seed);
  const FeatureSet& data = splits.train;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> labels;
  Snapshot best;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      labels.clear();
      for (std::size_t i : idx) labels.push_back(data.labels[i]);

      ForwardPass pass = model.forward(data.batch(idx), Mode::kTrain);
      const double loss = Model::mean_loss(pass.probs, labels);
      if (!std::isfinite(loss)) {
        throw TrainingError("loss became non-finite at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step) + " (lr " +
                            std::to_string(options.lr) + ")");
      }
      const std::size_t k = pass.probs.shape().c;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto row = pass.probs.data().subspan(i * k, k);
        correct += static_cast<int>(argmax_row(row)) == labels[i];
      }
      loss_sum += loss * static_cast<double>(idx.size());
      const Gradients grads = model.backward(pass, labels);
      sgd_momentum_step(params, grads, state);
    }

    EpochMetrics row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(data.size());
    row.train_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    row.val_accuracy = evaluate(model, splits.val);
    report.epochs.push_back(row);
    if (report.best_epoch == 0 || row.val_accuracy > report.best_val_accuracy) {
      report.best_epoch = epoch;
      report.best_val_accuracy = row.val_accuracy;
      best = take_snapshot(model);
    }
    if (!options.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03zu.tspn", epoch);
      save_model(model, (std::filesystem::path(options.checkpoint_dir) / name).string());
    }
    if (options.on_epoch) options.on_epoch(row);
  }

  restore_snapshot(model, best);
  if (splits.test.size() > 0) {
    check_compatible(model, splits.test, "test");
    report.test_accuracy = evaluate(model, splits.test);
  }
  ConstraintSpec spec;
  spec.micro_ops_only = model.config().micro_ops_only;
  report.constraints =
      check_constraints(analyze(model.config()), report.best_val_accuracy, spec, model.config());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string TrainReport::to_json(bool include_wall_time, int indent) const {
  nlohmann::json j;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"train_acc", e.train_accuracy},
                    {"val_acc", e.val_accuracy}});
  }
  j["epochs"] = std::move(rows);
  j["best_epoch"] = best_epoch;
  j["best_val_acc"] = best_val_accuracy;
  j["test_acc"] = test_accuracy ? nlohmann::json(*test_accuracy) : nlohmann::json(nullptr);
  if (constraints) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : constraints->checks) {
      checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    j["constraints"] = {{"pass", constraints->pass}, {"checks", std::move(checks)}};
  }
  if (include_wall_time) j["wall_seconds"] = wall_seconds;
  return j.dump(indent);
}

std::string TrainReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.val_accuracy
       << '\n';
  }
  return os.str();
}

}  // namespace tinykws
