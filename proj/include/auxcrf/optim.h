// Copyright 2026 The auxcrf Authors.
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

#ifndef AUXCRF_OPTIM_H_
#define AUXCRF_OPTIM_H_

#include <cstddef>
#include <span>
#include <vector>

namespace auxcrf {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-2;
};

// Adaptive-moment descent with decoupled weight decay. Each step first
// shrinks every parameter by (1 - lr * weight_decay), then applies the
// bias-corrected moment update.
class AdamW {
 public:
  AdamW(std::size_t num_parameters, AdamWOptions options = {});

  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::size_t steps_taken() const { return step_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamWOptions options_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t step_ = 0;
};

}  // namespace auxcrf

#endif  // AUXCRF_OPTIM_H_
