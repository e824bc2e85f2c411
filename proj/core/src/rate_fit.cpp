#include "mflab/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mflab/errors.hpp"

namespace mflab {

void to_json(nlohmann::json& j, const RateFit& fit)
{
    j = nlohmann::json{{"beta_hat", fit.beta_hat},       {"C1_hat", fit.C1_hat},     {"C2_hat", fit.C2_hat},
                       {"residual", fit.residual},       {"r_squared", fit.r_squared},
                       {"c2_residual", fit.c2_residual}, {"T", fit.T},               {"N_c2", fit.N_c2},
                       {"shifted", fit.shifted},         {"max_shift", fit.max_shift}, {"N", fit.N},
                       {"median_F", fit.median_F}};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw RegimeError("a line fit needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0)
        throw RegimeError("a line fit needs distinct abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        double r = y[k] - f.intercept - f.slope * x[k];
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    f.r_squared = syy > 0 ? 1 - ss / syy : 1;
    return f;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw RegimeError("median of an empty set");
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {
bool same_time(double a, double b)
{
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}
} // namespace

MedianByN median_by_N(const std::vector<DiagnosticsRecord>& records, double t, double DiagnosticsRecord::*field)
{
    std::map<std::size_t, std::vector<double>> groups;
    for (const auto& r : records)
        if (same_time(r.t, t))
            groups[r.N].push_back(r.*field);
    MedianByN out;
    for (auto& [n, v] : groups)
    {
        out.N.push_back(n);
        out.value.push_back(median(v));
    }
    return out;
}

RateFit fit_rate(const std::vector<DiagnosticsRecord>& records)
{
    std::map<std::size_t, std::set<double>> times;
    for (const auto& r : records)
        times[r.N].insert(r.t);
    if (times.size() < 4)
        throw RegimeError("fit_rate needs at least 4 distinct values of N, got " + std::to_string(times.size()));

    // latest time present for every N
    double T = -1;
    for (double t : times.begin()->second)
    {
        bool everywhere = std::all_of(times.begin(), times.end(), [&](const auto& kv) {
            return std::any_of(kv.second.begin(), kv.second.end(), [&](double s) { return same_time(s, t); });
        });
        if (everywhere)
            T = std::max(T, t);
    }
    if (T < 0)
        throw RegimeError("fit_rate needs a time grid shared by all N");

    RateFit fit;
    fit.T = T;
    fit.N_c2 = times.rbegin()->first;
    std::vector<double> ts(times.rbegin()->second.begin(), times.rbegin()->second.end());
    auto series = [&](const std::vector<DiagnosticsRecord>& recs) {
        std::vector<double> out;
        for (double t : ts)
        {
            std::vector<double> v;
            for (const auto& r : recs)
                if (r.N == fit.N_c2 && same_time(r.t, t))
                    v.push_back(r.F_N);
            out.push_back(median(v));
        }
        return out;
    };
    auto all_positive = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x > 0; });
    };

    std::vector<DiagnosticsRecord> work = records;
    auto scaling = median_by_N(work, T);
    auto Ft = series(work);
    if (!all_positive(scaling.value) || !all_positive(Ft))
    {
        fit.shifted = true;
        for (auto& r : work)
        {
            double shift = r.TE_r - r.F_N;
            fit.max_shift = std::max(fit.max_shift, shift);
            r.F_N += shift;
        }
        scaling = median_by_N(work, T);
        Ft = series(work);
        if (!all_positive(scaling.value) || !all_positive(Ft))
            throw RegimeError("F_N is not positive even after the lower-bound shift; was TE_r recorded?");
    }
    fit.N = scaling.N;
    fit.median_F = scaling.value;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < scaling.N.size(); ++k)
    {
        lx.push_back(std::log(double(scaling.N[k])));
        ly.push_back(std::log(scaling.value[k]));
    }
    auto line = fit_line(lx, ly);
    fit.beta_hat = line.slope;
    fit.C1_hat = std::exp(line.intercept);
    fit.residual = line.rms;
    fit.r_squared = line.r_squared;

    double F0 = Ft.front();
    double sty = 0, stt = 0;
    std::vector<double> y(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k)
    {
        y[k] = std::log(Ft[k] / F0);
        double dt = ts[k] - ts.front();
        sty += dt * y[k];
        stt += dt * dt;
    }
    fit.C2_hat = stt > 0 ? sty / stt : 0;
    double ss = 0;
    for (std::size_t k = 0; k < ts.size(); ++k)
    {
        double r = y[k] - fit.C2_hat * (ts[k] - ts.front());
        ss += r * r;
    }
    fit.c2_residual = std::sqrt(ss / ts.size());
    return fit;
}

} // namespace mflab
