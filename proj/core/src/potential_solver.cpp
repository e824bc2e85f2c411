#include "mflab/potential_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "mflab/errors.hpp"
#include "quadrature.hpp"

namespace mflab {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree
{
    void operator()(void* p) const { fftw_free(p); }
};
template<class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template<class T>
FftwBuffer<T> fftw_buffer(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)));
    if (!p)
        throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

struct PlanDeleter
{
    void operator()(fftw_plan_s* p) const
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

// Small sizes with factors 2, 3, 5 transform fastest.
int fast_size(int m)
{
    for (int k = m;; ++k)
    {
        int r = k;
        for (int p : {2, 3, 5})
            while (r % p == 0)
                r /= p;
        if (r == 1)
            return k;
    }
}

// Integral over the unit face [-1/2, 1/2]^{d-1} of phi(1/4 + |w|^2).
template<class F>
double face_integral(int d, F phi)
{
    if (d == 1)
        return phi(0.25);
    static const quad::Rule rule = quad::gauss_legendre_unit(40);
    double total = 0;
    const std::size_t q = rule.x.size();
    if (d == 2)
    {
        for (std::size_t i = 0; i < q; ++i)
            total += rule.w[i] * phi(0.25 + rule.x[i] * rule.x[i]);
        return total;
    }
    for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j)
            total += rule.w[i] * rule.w[j] * phi(0.25 + rule.x[i] * rule.x[i] + rule.x[j] * rule.x[j]);
    return total;
}

// Mean of g over the cube [-h/2, h/2]^d, splitting the cube into 2d pyramids
// with apex at the origin.
double origin_cell_average(const KernelSpec& spec, double h)
{
    const int d = spec.dim();
    if (spec.mode() == KernelMode::log)
    {
        double J = face_integral(d, [](double q) { return 0.5 * std::log(q); });
        double mean_log = J - 1.0 / d;  // mean of log|y| over the unit cube
        return -std::log(h) - mean_log;
    }
    const double s = spec.s();
    double I = face_integral(d, [s](double q) { return std::pow(q, -s / 2); });
    return std::pow(h, -s) * d / (d - s) * I;
}

double tensor_average(const KernelSpec& spec, std::span<const int> m, double h, const quad::Rule& rule)
{
    const int d = spec.dim();
    const std::size_t q = rule.x.size();
    double total = 0;
    std::size_t count = 1;
    for (int a = 0; a < d; ++a)
        count *= q;
    for (std::size_t k = 0; k < count; ++k)
    {
        std::size_t rem = k;
        double r2 = 0;
        double w = 1;
        for (int a = 0; a < d; ++a)
        {
            std::size_t i = rem % q;
            rem /= q;
            double y = (m[a] + rule.x[i]) * h;
            r2 += y * y;
            w *= rule.w[i];
        }
        total += w * spec.g_r2(r2);
    }
    return total;
}

} // namespace

double cell_average_kernel(const KernelSpec& spec, std::span<const int> offset, double h)
{
    int far = 0;
    for (int v : offset)
        far = std::max(far, std::abs(v));
    if (far == 0)
        return origin_cell_average(spec, h);
    static const quad::Rule r16 = quad::gauss_legendre_unit(16);
    static const quad::Rule r6 = quad::gauss_legendre_unit(6);
    static const quad::Rule r3 = quad::gauss_legendre_unit(3);
    static const quad::Rule r1 = quad::gauss_legendre_unit(1);
    const quad::Rule& rule = far == 1 ? r16 : far <= 3 ? r6 : far <= 12 ? r3 : r1;
    return tensor_average(spec, offset, h, rule);
}

struct PotentialSolver::Impl
{
    GridGeometry src;
    GridGeometry out;
    KernelSpec spec;
    int pad = 0;
    int M = 0;  // transform length per axis
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    std::vector<std::complex<double>> kernel_hat;
    Plan forward;
    Plan backward;

    Impl(const GridGeometry& g, const KernelSpec& k, int p) : src(g), spec(k), pad(p) {}
};

PotentialSolver::PotentialSolver(const GridGeometry& source, const KernelSpec& spec, int pad)
{
    if (source.d != spec.dim())
        throw RegimeError("grid dimension does not match kernel dimension");
    if (pad < 0)
        throw RegimeError("padding must be non-negative");
    auto impl = std::make_shared<Impl>(source, spec, pad);
    const int d = source.d;
    const int n = source.n;
    impl->out = {d, n + 2 * pad, source.lo - pad * source.h, source.h};
    impl->M = fast_size(2 * (n + pad));
    const int M = impl->M;
    impl->real_size = 1;
    for (int a = 0; a < d; ++a)
        impl->real_size *= M;
    impl->complex_size = impl->real_size / M * (M / 2 + 1);

    auto in = fftw_buffer<double>(impl->real_size);
    auto spectrum = fftw_buffer<fftw_complex>(impl->complex_size);
    std::vector<int> dims(d, M);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        impl->forward.reset(fftw_plan_dft_r2c(d, dims.data(), in.get(), spectrum.get(), FFTW_ESTIMATE));
        impl->backward.reset(fftw_plan_dft_c2r(d, dims.data(), spectrum.get(), in.get(), FFTW_ESTIMATE));
    }
    if (!impl->forward || !impl->backward)
        throw Error("FFTW planning failed");

    // Kernel cell averages at every offset the convolution can reach.
    const int reach = n - 1 + pad;
    std::fill(in.get(), in.get() + impl->real_size, 0.0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(impl->real_size); ++kk)
    {
        std::size_t rem = kk;
        int m[3];
        bool used = true;
        for (int a = d - 1; a >= 0; --a)
        {
            int i = int(rem % M);
            rem /= M;
            m[a] = i <= M / 2 ? i : i - M;
            used = used && std::abs(m[a]) <= reach;
        }
        if (used)
            in[kk] = cell_average_kernel(spec, {m, std::size_t(d)}, source.h);
    }
    fftw_execute_dft_r2c(impl->forward.get(), in.get(), spectrum.get());
    impl->kernel_hat.resize(impl->complex_size);
    for (std::size_t k = 0; k < impl->complex_size; ++k)
        impl->kernel_hat[k] = {spectrum[k][0], spectrum[k][1]};
    impl_ = std::move(impl);
}

const GridGeometry& PotentialSolver::source() const
{
    return impl_->src;
}

const GridGeometry& PotentialSolver::output() const
{
    return impl_->out;
}

const KernelSpec& PotentialSolver::kernel() const
{
    return impl_->spec;
}

ScalarField PotentialSolver::solve(std::span<const double> density) const
{
    const Impl& I = *impl_;
    if (density.size() != I.src.size())
        throw RegimeError("density does not match the solver grid");
    const int d = I.src.d;
    const int M = I.M;
    const double vol = I.src.cell_volume();

    auto buf = fftw_buffer<double>(I.real_size);
    auto spec = fftw_buffer<fftw_complex>(I.complex_size);
    std::fill(buf.get(), buf.get() + I.real_size, 0.0);
    std::vector<int> ijk(d);
    for (std::size_t c = 0; c < density.size(); ++c)
    {
        I.src.unflatten(c, ijk);
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a)
            idx = idx * M + ijk[a];
        buf[idx] = density[c] * vol;
    }
    fftw_execute_dft_r2c(I.forward.get(), buf.get(), spec.get());
    const double norm = 1.0 / double(I.real_size);
    for (std::size_t k = 0; k < I.complex_size; ++k)
    {
        std::complex<double> z(spec[k][0], spec[k][1]);
        z *= I.kernel_hat[k] * norm;
        spec[k][0] = z.real();
        spec[k][1] = z.imag();
    }
    fftw_execute_dft_c2r(I.backward.get(), spec.get(), buf.get());

    // Output cell o sees source offsets o - pad - c, i.e. circular index (o - pad) mod M.
    std::vector<double> values(I.out.size());
    std::vector<int> o(d);
    for (std::size_t k = 0; k < values.size(); ++k)
    {
        I.out.unflatten(k, o);
        std::size_t idx = 0;
        for (int a = 0; a < d; ++a)
            idx = idx * M + std::size_t(((o[a] - I.pad) % M + M) % M);
        values[k] = buf[idx];
    }
    return ScalarField(I.out, std::move(values));
}

double PotentialSolver::energy(std::span<const double> density) const
{
    const Impl& I = *impl_;
    auto h = solve(density);
    const int d = I.src.d;
    std::vector<int> ijk(d);
    double total = 0;
    for (std::size_t c = 0; c < density.size(); ++c)
    {
        if (density[c] == 0)
            continue;
        I.src.unflatten(c, ijk);
        std::size_t k = 0;
        for (int a = 0; a < d; ++a)
            k = k * I.out.n + (ijk[a] + I.pad);
        total += density[c] * h.values()[k];
    }
    return total * I.src.cell_volume();
}

} // namespace mflab
