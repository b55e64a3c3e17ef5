#include "g2t/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "g2t/checkpoint.hpp"
#include "g2t/errors.hpp"

namespace g2t {

AdamState make_adam_state(const std::vector<NamedTensor>& params) {
    AdamState st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const auto& nt : params) {
        st.m.push_back(Tensor::zeros(nt.tensor.shape()));
        st.v.push_back(Tensor::zeros(nt.tensor.shape()));
    }
    return st;
}

double global_grad_norm(const std::vector<NamedTensor>& params) {
    double sq = 0.0;
    for (const auto& nt : params) {
        if (!nt.tensor.has_grad()) continue;
        for (double g : nt.tensor.grad()) sq += g * g;
    }
    return std::sqrt(sq);
}

void clip_gradients(const std::vector<NamedTensor>& params, double max_norm) {
    if (max_norm <= 0.0) return;
    double norm = global_grad_norm(params);
    if (norm <= max_norm) return;
    double factor = max_norm / norm;
    for (const auto& nt : params) nt.tensor.scale_grad(factor);
}

void adam_step(const std::vector<NamedTensor>& params, AdamState& state, double learning_rate) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;

    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ContractError("adam_step: optimizer state does not match the parameter list");
    }
    state.t += 1;
    const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));

    static const std::vector<double> kNoGrad;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& p = params[i].tensor;
        const std::vector<double>& g = p.has_grad() ? p.grad() : kNoGrad;

        std::vector<double> m = state.m[i].values();
        std::vector<double> v = state.v[i].values();
        std::vector<double> w = p.values();
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double gj = j < g.size() ? g[j] : 0.0;
            if (!std::isfinite(gj)) {
                throw TrainingAbort("non-finite gradient in " + params[i].name + "[" +
                                    std::to_string(j) + "]");
            }
            m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * gj;
            v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * gj * gj;
            const double m_hat = m[j] / corr1;
            const double v_hat = v[j] / corr2;
            w[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + kEps);
        }
        state.m[i].set_values(m);
        state.v[i].set_values(v);
        p.set_values(w); // also clears the gradient for the next batch
    }
}

ExampleResult evaluate_example(const Model& m, const Example& ex, TaskKind task) {
    OutputTree pred = greedy_prediction(m, ex.graph);
    ExampleResult row;
    row.id = ex.id;
    row.prediction = linearize(pred);
    row.gold = linearize(ex.target);
    row.exact = exact_match(pred, ex.target);
    if (task == TaskKind::MathWordProblem && ex.answer.has_value()) {
        row.solved = solution_accuracy(pred, ex.numbers, *ex.answer);
    }
    return row;
}

std::vector<ExampleResult> evaluate_split(const Model& m, const std::vector<Example>& split) {
    std::vector<ExampleResult> rows;
    rows.reserve(split.size());
    for (const Example& ex : split) rows.push_back(evaluate_example(m, ex, m.config.task));
    return rows;
}

MetricSummary summarize(const std::vector<ExampleResult>& rows) {
    MetricSummary s;
    s.count = rows.size();
    for (const auto& r : rows) {
        s.exact += r.exact ? 1 : 0;
        s.solved += r.solved ? 1 : 0;
    }
    return s;
}

Trainer::Trainer(Model model, std::vector<Example> train_set, std::vector<Example> dev_set,
                 Rng rng)
    : model_(std::move(model)),
      train_(std::move(train_set)),
      dev_(std::move(dev_set)),
      rng_(rng),
      params_(named_tensors(model_)),
      adam_(make_adam_state(params_)) {
    if (train_.empty()) throw EmptyInputError("Trainer: empty training split");
}

void Trainer::restore(const AdamState& adam, const std::string& rng_state, int completed_epochs) {
    if (adam.m.size() != params_.size() || adam.v.size() != params_.size()) {
        throw ContractError("restore: optimizer state does not match the parameter list");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (adam.m[i].shape() != params_[i].tensor.shape() ||
            adam.v[i].shape() != params_[i].tensor.shape()) {
            throw ContractError("restore: moment shape mismatch at " + params_[i].name);
        }
    }
    adam_ = adam;
    rng_.set_state(rng_state);
    epoch_ = completed_epochs;
}

EpochStats Trainer::run_epoch() {
    ++epoch_;
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng_.shuffle(order);

    const std::size_t batch_size = static_cast<std::size_t>(std::max(1, model_.config.batch_size));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t count = std::min(batch_size, order.size() - start);
        Tape tape;
        TapeScope scope(tape);
        Tensor total;
        for (std::size_t i = 0; i < count; ++i) {
            const Example& ex = train_[order[start + i]];
            EncodeOptions opts;
            opts.dropout = model_.config.dropout;
            opts.rng = &rng_;
            Tensor loss = model_loss(model_, ex.graph, ex.target, opts);
            total = total.defined() ? add(total, loss) : loss;
        }
        Tensor mean = scale(total, 1.0 / static_cast<double>(count));
        if (!std::isfinite(mean.value())) {
            throw TrainingAbort("non-finite loss in epoch " + std::to_string(epoch_));
        }
        loss_sum += total.value();
        tape.backward(mean);
        clip_gradients(params_, model_.config.clip_norm);
        adam_step(params_, adam_, model_.config.learning_rate);
    }

    EpochStats st;
    st.epoch = epoch_;
    st.train_loss = loss_sum / static_cast<double>(train_.size());
    st.train_exact = summarize(evaluate_split(model_, train_)).exact_rate();
    st.dev_exact = dev_.empty() ? 0.0 : summarize(evaluate_split(model_, dev_)).exact_rate();
    return st;
}

TrainResult Trainer::run() {
    TrainResult res;
    double best_metric = -1.0;
    while (epoch_ < model_.config.epochs) {
        EpochStats st = run_epoch();
        res.history.push_back(st);
        const double metric = dev_.empty() ? st.train_exact : st.dev_exact;
        if (metric > best_metric) {
            best_metric = metric;
            res.best_epoch = st.epoch;
            res.best_dev_exact = st.dev_exact;
            res.best_checkpoint = checkpoint_bytes(model_, adam_, rng_.state(), epoch_);
        }
        if (model_.config.stop_at_full_train_match && st.train_exact == 1.0) break;
    }
    return res;
}

} // namespace g2t
