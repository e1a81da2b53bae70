#pragma once

#include "coae/nn/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace coae::nn {

struct GradientCheckOptions {
    double relative_step = 1e-5;  // h = relative_step * max(1, |p|)
    double abs_floor = 1e-6;      // denominator floor for near-zero gradients
    // The central difference carries roundoff of about eps * |loss| / h. The denominator
    // floor is raised to noise_floor_factor times that, so an exactly-zero gradient whose
    // numeric estimate is pure roundoff scores at most 1 / noise_floor_factor.
    double noise_floor_factor = 1e5;
    int max_step_halvings = 6;    // retries when a probe crosses a ReLU kink
};

struct GradientCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    std::size_t kink_retries = 0;
};

// Compares each slot's analytic gradient against central differences of `loss` with
// respect to the slot's values. `loss` re-evaluates the scalar objective from the
// current parameter contents.
// If `signature` is given, it should fingerprint the non-smooth state of the model
// (e.g. the ReLU activation masks) after the latest `loss` call; a probe pair whose
// fingerprint differs from the unperturbed one straddles a kink and is retried with a
// smaller step. Parameters are restored on return.
GradientCheckReport gradient_check(const std::function<double()>& loss,
                                   std::span<const ParamSlot> slots,
                                   const GradientCheckOptions& options = {},
                                   const std::function<std::uint64_t()>& signature = {});

// Relative error measure used by gradient_check.
double relative_error(double analytic, double numeric, double abs_floor);

} // namespace coae::nn
