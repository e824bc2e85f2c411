#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mflab/particles.hpp"
#include "mflab/reference.hpp"

namespace mflab {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter block(Counter ctr, Key key);
};

// Independent uniform stream for one (N, seed, particle) cell; the draw index is the counter.
class UniformStream
{
  public:
    UniformStream(std::uint64_t seed, std::uint64_t N, std::uint64_t particle, std::uint32_t purpose = 0);
    // uniform on [0, 1) with 53 random bits
    double next();

  private:
    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
};

enum class SamplingMode
{
    iid,
    quantized
};

SamplingMode parse_sampling_mode(const std::string& name);
std::string to_string(SamplingMode mode);

// N i.i.d. draws from mu, flat point-major.
std::vector<double> sample_iid(const Reference& mu, std::size_t N, std::uint64_t seed);
// Equal-mass low-discrepancy placement pushed through mu's inverse CDF, then a
// deterministic jitter of `jitter` times the local spacing (N mu(x))^{-1/d}.
std::vector<double> sample_quantized(const Reference& mu, std::size_t N, std::uint64_t seed, double jitter = 0.1);

ParticleSystem initial_particles(const Reference& mu, std::size_t N, std::uint64_t seed, SamplingMode mode);

} // namespace mflab
