#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2t/dataset.hpp"
#include "g2t/evaluation.hpp"
#include "g2t/model.hpp"

namespace g2t {

// Adam moments, one pair per model parameter, addressed by position in the
// model's named tensor list.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t t = 0;
};

AdamState make_adam_state(const std::vector<NamedTensor>& params);

double global_grad_norm(const std::vector<NamedTensor>& params);

// Rescales all gradients so their global norm is at most max_norm.
void clip_gradients(const std::vector<NamedTensor>& params, double max_norm);

// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias correction) from
// the gradients currently on the parameters; a parameter without a gradient
// counts as zero-gradient. Writing the new values clears the gradients, so
// consecutive batches never mix. A non-finite gradient aborts the run,
// naming the offending tensor.
void adam_step(const std::vector<NamedTensor>& params, AdamState& state, double learning_rate);

// Greedy-decode evaluation of one example.
ExampleResult evaluate_example(const Model& m, const Example& ex, TaskKind task);
std::vector<ExampleResult> evaluate_split(const Model& m, const std::vector<Example>& split);
MetricSummary summarize(const std::vector<ExampleResult>& rows);

struct EpochStats {
    int epoch = 0;          // 1-based
    double train_loss = 0;  // mean per-example loss over the epoch's batches
    double train_exact = 0; // greedy exact-match on the training split
    double dev_exact = 0;   // greedy exact-match on the dev split; 0 when none
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_dev_exact = 0;
    std::vector<std::uint8_t> best_checkpoint; // serialized at the best epoch
};

// Owns the entire optimization state, so a run can stop, serialize, resume
// and continue bitwise-identically.
class Trainer {
public:
    Trainer(Model model, std::vector<Example> train_set, std::vector<Example> dev_set, Rng rng);

    Model& model() { return model_; }
    const Model& model() const { return model_; }
    const AdamState& adam() const { return adam_; }
    Rng& rng() { return rng_; }
    int completed_epochs() const { return epoch_; }

    // Resumes from checkpointed optimizer state; the model itself is the one
    // this trainer was constructed with.
    void restore(const AdamState& adam, const std::string& rng_state, int completed_epochs);

    // One pass: shuffle, batch, update, then measure both splits.
    EpochStats run_epoch();

    // Runs until config.epochs epochs have completed, tracking the best
    // checkpoint by dev exact-match (train exact-match when no dev split).
    // Ties keep the earlier epoch. Honors stop_at_full_train_match.
    TrainResult run();

private:
    Model model_;
    std::vector<Example> train_;
    std::vector<Example> dev_;
    Rng rng_;
    std::vector<NamedTensor> params_;
    AdamState adam_;
    int epoch_ = 0;
};

} // namespace g2t
