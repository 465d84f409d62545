#include "adadata/numerics/training.hpp"

#include <cmath>

#include "adadata/error.hpp"

namespace adadata::num {

void run_training(std::span<Tensor> params, AdamState &optimizer, const BatchLossFn &loss_fn,
                  const EpochDataFn &data, const LoopOptions &options, const EpochCallback &on_epoch) {
    Rng dropout_rng(options.seed, 0xD409);
    for (std::size_t e = 0; e < options.epochs; ++e) {
        const std::size_t epoch = options.first_epoch + e;
        const auto items = data(epoch);
        if (items.empty()) throw TrainingError("epoch " + std::to_string(epoch) + " has no training data");
        const auto batches = text::batch_iterator(items, options.max_tokens, options.seed * 1000003ULL + epoch);
        double weighted = 0.0;
        std::size_t tokens = 0;
        for (const auto &indices : batches) {
            const auto batch = text::make_batch(items, indices);
            for (auto &p : params) p.zero_grad();
            Tape tape;
            Tensor loss = loss_fn(batch, dropout_rng);
            const double value = loss.item();
            if (!std::isfinite(value))
                throw TrainingError("non-finite loss at step " + std::to_string(optimizer.step + 1) + " (epoch " +
                                    std::to_string(epoch) + ")");
            tape.backward(loss);
            adam_step(params, optimizer);
            weighted += value * static_cast<double>(batch.target_tokens());
            tokens += batch.target_tokens();
        }
        if (on_epoch) on_epoch({epoch, optimizer.step, tokens ? weighted / static_cast<double>(tokens) : 0.0, items.size()});
    }
}

} // namespace adadata::num
