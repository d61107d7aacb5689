#pragma once

#include <cstddef>
#include <cstdint>

#include "axisforge/repstore/hsd.hpp"
#include "axisforge/toymodel/corpus.hpp"
#include "axisforge/toymodel/model.hpp"

namespace axisforge::toymodel {

struct TrainOptions {
  std::size_t steps = 2000;
  std::size_t batch_size = 8;
  double lr = 3e-3;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// AdamW on mean next-token cross-entropy. Batches walk a seeded permutation
// of the corpus, reshuffled each pass. Parameters are rounded to f32 at the
// end. Throws DataError when steps == 0 and NumericalError on a non-finite
// loss.
ToyModel train_toy(const ToyConfig& cfg, const RegisterCorpus& corpus, const TrainOptions& opts = {});

// Block outputs at the last context position (the one that predicts the
// target) for every sequence, as an f32 dump. Concrete sequences are labelled
// high with static score 4.5, abstract ones low with 1.5.
repstore::HiddenStateDump export_register_dump(const ToyModel& model, const RegisterCorpus& corpus);

}  // namespace axisforge::toymodel
