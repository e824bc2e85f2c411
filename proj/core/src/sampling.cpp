#include "mflab/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"
#include "mflab/kernel.hpp"

namespace mflab {

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key)
{
    constexpr std::uint32_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
    constexpr std::uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round)
    {
        std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        Counter next{std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                     std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        ctr = next;
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t N, std::uint64_t particle, std::uint32_t purpose)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}
    , ctr_{0, std::uint32_t(particle), std::uint32_t(particle >> 32) ^ (purpose << 24), std::uint32_t(N)}
{
}

double UniformStream::next()
{
    if (used_ >= 4)
    {
        buffer_ = Philox4x32::block(ctr_, key_);
        ++ctr_[0];
        used_ = 0;
    }
    std::uint64_t hi = buffer_[used_] >> 5;      // 27 bits
    std::uint64_t lo = buffer_[used_ + 1] >> 6;  // 26 bits
    used_ += 2;
    return double((hi << 26) | lo) * 0x1.0p-53;
}

SamplingMode parse_sampling_mode(const std::string& name)
{
    if (name == "iid")
        return SamplingMode::iid;
    if (name == "quantized")
        return SamplingMode::quantized;
    throw ConfigError("init.sampling", "expected 'iid' or 'quantized', got '" + name + "'");
}

std::string to_string(SamplingMode mode)
{
    return mode == SamplingMode::iid ? "iid" : "quantized";
}

std::vector<double> sample_iid(const Reference& mu, std::size_t N, std::uint64_t seed)
{
    const int d = mu.dim();
    std::vector<double> x(N * d);
    std::vector<double> u(d);
    for (std::size_t i = 0; i < N; ++i)
    {
        UniformStream rng(seed, N, i);
        for (int a = 0; a < d; ++a)
            u[a] = rng.next();
        mu.transform_uniform(u, std::span<double>(x).subspan(i * d, d));
    }
    return x;
}

namespace {
double radical_inverse(std::size_t i, unsigned base)
{
    double inv = 1.0 / base, f = inv, r = 0;
    while (i > 0)
    {
        r += f * double(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}
} // namespace

std::vector<double> sample_quantized(const Reference& mu, std::size_t N, std::uint64_t seed, double jitter)
{
    const int d = mu.dim();
    // fractional part of the golden ratio conjugate: Vogel spiral angles
    const double golden = 0.5 * (3 - std::sqrt(5.0));
    static const unsigned primes[] = {2, 3, 5, 7, 11, 13};
    if (d > 7)
        throw RegimeError("quantized sampling is implemented for d <= 7");
    std::vector<double> x(N * d);
    std::vector<double> u(d);
    // spacing at the mean density over the support ball; bounds the jitter
    // where a smooth profile thins out towards its edge
    const double max_spacing = mu.extent() * std::pow(unit_ball_volume(d) / double(N), 1.0 / d);
    for (std::size_t i = 0; i < N; ++i)
    {
        u[0] = (i + 0.5) / N;
        if (d == 2)
            u[1] = std::fmod(i * golden, 1.0);
        else
            for (int a = 1; a < d; ++a)
                u[a] = radical_inverse(i + 1, primes[a - 1]);
        auto xi = std::span<double>(x).subspan(i * d, d);
        mu.transform_uniform(u, xi);
        if (jitter <= 0)
            continue;
        double rho = mu.density(xi);
        if (!(rho > 0))
            continue;
        double spacing = std::min(std::pow(N * rho, -1.0 / d), max_spacing);
        UniformStream rng(seed, N, i, 1);
        for (int a = 0; a < d; ++a)
            xi[a] += jitter * spacing * (2 * rng.next() - 1);
    }
    return x;
}

ParticleSystem initial_particles(const Reference& mu, std::size_t N, std::uint64_t seed, SamplingMode mode)
{
    auto x = mode == SamplingMode::iid ? sample_iid(mu, N, seed) : sample_quantized(mu, N, seed);
    return ParticleSystem(mu.dim(), std::move(x));
}

} // namespace mflab
