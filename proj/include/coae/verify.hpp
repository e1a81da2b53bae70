#pragma once

#include "coae/nn/gradient_check.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace coae {

struct CheckResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    // Test fixture: perturbs one analytic gradient entry so the gradient suite must fail.
    bool corrupt_gradient = false;
};

// Central-difference check of the full encoder -> channel -> decoder gradient with a fixed
// channel realization (strong phase noise, OFDM transforms on, no AWGN).
nn::GradientCheckReport end_to_end_gradient_check(std::size_t block_size, std::uint64_t seed,
                                                  bool corrupt_gradient = false);

std::vector<CheckResult> verify_gradients(const VerifyOptions& options);
std::vector<CheckResult> verify_fft();
std::vector<CheckResult> verify_phase_statistics(const VerifyOptions& options);
std::vector<CheckResult> verify_qam_awgn_baseline(const VerifyOptions& options);

// All suites in order: gradient, fft, phase statistics, QAM/AWGN baseline.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

// {"passed": bool, "checks": [{name, passed, measured, tolerance, detail}...]}
std::string verification_report_json(const std::vector<CheckResult>& results);

// Gray 16-QAM bit error rate approximation (3/8) erfc(sqrt(Es / (10 N0))).
double qam16_ber_approximation(double es_n0_db);

} // namespace coae
