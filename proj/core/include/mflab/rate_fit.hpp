#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "mflab/modulated_energy.hpp"

namespace mflab {

struct RateFit
{
    double beta_hat = 0;
    double C1_hat = 0;
    double C2_hat = 0;
    double residual = 0;   // RMS residual of the log-log fit
    double r_squared = 0;  // of the log-log fit
    double c2_residual = 0;
    double T = 0;          // time at which the N-scaling was fitted
    std::size_t N_c2 = 0;  // N used for the time fit
    bool shifted = false;  // F_N replaced by F_N + (TE_r - F_N) before taking logs
    double max_shift = 0;
    std::vector<std::size_t> N;
    std::vector<double> median_F;  // median over seeds at T, after any shift
};

void to_json(nlohmann::json& j, const RateFit& fit);

struct LineFit
{
    double slope = 0;
    double intercept = 0;
    double rms = 0;
    double r_squared = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

// Medians over seeds of `field` at time t for each N, sorted by N.
struct MedianByN
{
    std::vector<std::size_t> N;
    std::vector<double> value;
};
MedianByN median_by_N(const std::vector<DiagnosticsRecord>& records, double t,
                      double DiagnosticsRecord::*field = &DiagnosticsRecord::F_N);

/*
 * beta_hat from OLS of log median F_N(T) against log N (T = latest time shared
 * by every N); C2_hat from a through-origin fit of log(F(t)/F(0)) against t at
 * the largest N. Needs at least four distinct N. When a median is not
 * positive all values are shifted by the lower bound TE_r - F_N.
 */
RateFit fit_rate(const std::vector<DiagnosticsRecord>& records);

} // namespace mflab
