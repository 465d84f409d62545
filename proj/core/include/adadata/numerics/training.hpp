#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "adadata/numerics/adam.hpp"
#include "adadata/numerics/rng.hpp"
#include "adadata/numerics/tensor.hpp"
#include "adadata/textio/corpus.hpp"

namespace adadata::num {

struct EpochLog {
    std::size_t epoch = 0;
    std::uint64_t step = 0; // optimizer updates so far
    double loss = 0.0;      // target-token weighted mean over the epoch
    std::size_t examples = 0;
};

using EpochCallback = std::function<void(const EpochLog &)>;

// Loss of one padded batch; must be recorded on the active tape.
using BatchLossFn = std::function<Tensor(const text::PaddedBatch &, Rng &)>;

// Training items for a given 1-based epoch.
using EpochDataFn = std::function<std::vector<text::SentencePair>(std::size_t epoch)>;

struct LoopOptions {
    std::size_t epochs = 1;
    std::size_t max_tokens = 1024;
    std::uint64_t seed = 1;
    std::size_t first_epoch = 1;
};

/// Teacher-forced mini-batch training with Adam. Throws TrainingError naming
/// the update step when a batch loss is not finite.
void run_training(std::span<Tensor> params, AdamState &optimizer, const BatchLossFn &loss_fn,
                  const EpochDataFn &data, const LoopOptions &options, const EpochCallback &on_epoch = {});

} // namespace adadata::num
