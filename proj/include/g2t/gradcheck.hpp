#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "g2t/rng.hpp"
#include "g2t/tensor.hpp"

namespace g2t {

// Worst coordinate found by a finite-difference comparison.
struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;

    bool ok(double threshold) const { return max_rel_error <= threshold; }
};

// |fd - an| / max(|fd|, |an|, 1) so tiny gradients don't blow up the ratio.
double grad_rel_error(double numeric, double analytic);

// Central finite difference of a forward-only scalar function w.r.t. one
// coordinate of `param`. The function must rebuild its graph on every call.
double finite_difference(const std::function<double()>& forward, Tensor param, std::size_t index,
                         double epsilon = 1e-5);

// Runs `forward` once under a fresh tape to get analytic gradients, then
// compares against central differences. `samples_per_tensor` == 0 checks
// every coordinate; otherwise that many coordinates are drawn per tensor.
GradCheckReport check_gradients(const std::function<Tensor()>& forward,
                                const std::vector<NamedTensor>& params,
                                std::size_t samples_per_tensor = 0, double epsilon = 1e-5,
                                Rng* rng = nullptr);

} // namespace g2t
