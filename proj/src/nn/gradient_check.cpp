#include "coae/nn/gradient_check.hpp"

#include "coae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coae::nn {

double relative_error(double analytic, double numeric, double abs_floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
    return std::abs(analytic - numeric) / denom;
}

GradientCheckReport gradient_check(const std::function<double()>& loss,
                                   std::span<const ParamSlot> slots,
                                   const GradientCheckOptions& options,
                                   const std::function<std::uint64_t()>& signature) {
    GradientCheckReport report;
    std::size_t flat = 0;
    for (const auto& slot : slots) {
        if (slot.grad.size() != slot.value.size())
            throw DimensionError("gradient_check: gradient size does not match parameter size");
        for (std::size_t k = 0; k < slot.value.size(); ++k, ++flat) {
            double& p = slot.value[k];
            const double original = p;
            std::uint64_t base_sig = 0;
            if (signature) {
                loss();
                base_sig = signature();
            }
            double h = options.relative_step * std::max(1.0, std::abs(original));
            double numeric = 0.0;
            double floor = options.abs_floor;
            for (int attempt = 0;; ++attempt) {
                p = original + h;
                const double plus = loss();
                const bool plus_smooth = !signature || signature() == base_sig;
                p = original - h;
                const double minus = loss();
                const bool minus_smooth = !signature || signature() == base_sig;
                p = original;
                numeric = (plus - minus) / (2.0 * h);
                const double roundoff =
                    std::numeric_limits<double>::epsilon() * std::max(std::abs(plus), std::abs(minus)) / h;
                floor = std::max(options.abs_floor, options.noise_floor_factor * roundoff);
                if ((plus_smooth && minus_smooth) || attempt >= options.max_step_halvings) break;
                ++report.kink_retries;
                h *= 0.5;
            }
            const double err = relative_error(slot.grad[k], numeric, floor);
            if (report.checked == 0 || err > report.max_rel_error) {
                report.max_rel_error = err;
                report.worst_index = flat;
            }
            ++report.checked;
        }
    }
    return report;
}

} // namespace coae::nn
