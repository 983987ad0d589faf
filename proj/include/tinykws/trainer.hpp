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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tinykws/complexity.hpp"
#include "tinykws/dataset.hpp"
#include "tinykws/model.hpp"

namespace tinykws {

// Classical (heavy-ball) momentum: v <- momentum * v + g, w <- w - lr * v.
struct SgdState {
  double lr = 0.01;
  double momentum = 0.9;
  std::vector<Tensor> velocity;  // one per parameter, same shapes

  SgdState() = default;
  SgdState(const Model& model, double lr, double momentum);
  static SgdState zeros_like(std::span<const ParamRef> params, double lr, double momentum);
};

void sgd_momentum_step(std::span<const ParamRef> params, const Gradients& grads, SgdState& state);

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

struct TrainOptions {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  double lr = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;  // shuffle order
  std::string checkpoint_dir;  // empty: no checkpoints
  // Called after each epoch with the row just recorded.
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainReport {
  std::vector<EpochMetrics> epochs;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_val_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double wall_seconds = 0.0;
  std::optional<ConstraintVerdict> constraints;

  // Wall time is left out unless asked for, so reports of identical runs
  // compare equal byte for byte.
  std::string to_json(bool include_wall_time = false, int indent = 2) const;
  // epoch,train_loss,train_acc,val_acc
  std::string to_csv() const;
};

// Trains on splits.train and, after the last epoch, restores the weights of
// the epoch with the highest validation accuracy (earliest on ties). Test
// accuracy is measured on the restored weights when a test split exists.
TrainReport train(Model& model, const FeatureSplits& splits, const TrainOptions& options = {});

// Fraction of samples whose argmax class matches the label; ties pick the
// lowest class index.
double evaluate(const Model& model, const FeatureSet& set, Precision precision = Precision::kF64);
std::vector<int> predict_labels(const Model& model, const FeatureSet& set,
                                Precision precision = Precision::kF64);

}  // namespace tinykws
