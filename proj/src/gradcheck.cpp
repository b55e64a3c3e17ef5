#include "g2t/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "g2t/errors.hpp"

namespace g2t {

double grad_rel_error(double numeric, double analytic) {
    double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1.0});
    return std::fabs(numeric - analytic) / denom;
}

double finite_difference(const std::function<double()>& forward, Tensor param, std::size_t index,
                         double epsilon) {
    if (index >= param.size()) throw ContractError("finite_difference: index out of range");
    std::vector<double> saved = param.values();
    std::vector<double> bumped = saved;

    bumped[index] = saved[index] + epsilon;
    param.set_values(bumped);
    double up = forward();

    bumped[index] = saved[index] - epsilon;
    param.set_values(bumped);
    double down = forward();

    param.set_values(saved);
    return (up - down) / (2.0 * epsilon);
}

GradCheckReport check_gradients(const std::function<Tensor()>& forward,
                                const std::vector<NamedTensor>& params,
                                std::size_t samples_per_tensor, double epsilon, Rng* rng) {
    for (const auto& p : params) p.tensor.ensure_zero_grad();
    Tape tape;
    {
        TapeScope scope(tape);
        Tensor loss = forward();
        tape.backward(loss);
    }

    auto value_of = [&forward]() {
        Tensor out = forward(); // no active tape: forward-only
        return out.value();
    };

    // set_values() wipes a tensor's gradient, and the finite-difference loop
    // nudges values, so copy the analytic gradients out first.
    std::vector<std::vector<double>> analytic_grads;
    analytic_grads.reserve(params.size());
    for (const auto& p : params) analytic_grads.push_back(p.tensor.grad());

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        std::size_t n = p.tensor.size();
        std::vector<std::size_t> coords;
        if (samples_per_tensor == 0 || samples_per_tensor >= n) {
            coords.resize(n);
            for (std::size_t i = 0; i < n; ++i) coords[i] = i;
        } else {
            if (rng == nullptr) {
                throw ContractError("check_gradients: sampling requested without an rng");
            }
            for (std::size_t k = 0; k < samples_per_tensor; ++k) coords.push_back(rng->index(n));
            std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
        }
        const auto& analytic = analytic_grads[pi];
        for (std::size_t i : coords) {
            double fd = finite_difference(value_of, p.tensor, i, epsilon);
            double rel = grad_rel_error(fd, analytic[i]);
            ++report.checked;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_tensor = p.name;
                report.worst_index = i;
                report.analytic = analytic[i];
                report.numeric = fd;
            }
        }
    }
    return report;
}

} // namespace g2t
