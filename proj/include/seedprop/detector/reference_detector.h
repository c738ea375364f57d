// Copyright 2026 The seedprop Authors
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

#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "seedprop/dataset/dataset.h"
#include "seedprop/detector/detector.h"

namespace seedprop {

// Memorizing detector. train() remembers the dataset's labels per frame;
// infer() answers with the labels of the nearest trained frame (ties go to
// the earlier frame) at confidence decay^distance.
class ReferenceDetector final : public DetectorBackend {
 public:
  explicit ReferenceDetector(ImageGeometry geometry, double decay = 0.98);

  BackendInfo info() override;
  TrainResponse train(const TrainRequest& request) override;
  InferResponse infer(const InferRequest& request) override;

  static constexpr char kTokenPrefix[] = "reference:";

 private:
  // The token names the dataset, so it stays valid across processes.
  std::shared_ptr<const std::map<int, std::vector<NormBox>>> memory_for(
      const std::string& token);

  ImageGeometry geometry_;
  double decay_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const std::map<int, std::vector<NormBox>>>> cache_;
};

}  // namespace seedprop
