#pragma once

#include <span>

namespace mflab {

enum class KernelMode
{
    riesz,
    log
};

/*
 * Interaction kernel g(x) = |x|^{-s} or -log|x| in R^d, plus the constants
 * of its Caffarelli-Silvestre extension: k (number of extra dimensions),
 * gamma (weight exponent) and c_ds (so that -div(|z|^gamma grad g) = c_ds delta).
 */
class KernelSpec
{
  public:
    // max(d-2,0) <= s < d, with s > 0 when d <= 2
    static KernelSpec riesz(int d, double s);
    // d in {1, 2}
    static KernelSpec logarithmic(int d);

    int dim() const { return d_; }
    KernelMode mode() const { return mode_; }
    // Riesz exponent; 0 for the log kernel.
    double s() const { return s_; }
    int k() const { return k_; }
    double gamma() const { return gamma_; }
    double c_ds() const { return c_ds_; }
    bool is_coulomb() const { return k_ == 0; }
    // s - d + 2 in [0, 2): exponent of the Barenblatt profile, times 2
    double excess() const { return s_ - d_ + 2; }

    // Radial profile g(r), r > 0.
    double g(double r) const;
    // g'(r)
    double dg(double r) const;
    // g as a function of r^2, for pair loops
    double g_r2(double r2) const;
    // g'(r)/r as a function of r^2, so grad g(x) = x * dg_over_r_r2(|x|^2)
    double dg_over_r_r2(double r2) const;

    bool operator==(const KernelSpec&) const = default;

  private:
    KernelSpec() = default;
    int d_ = 0;
    KernelMode mode_ = KernelMode::riesz;
    double s_ = 0;
    int k_ = 0;
    double gamma_ = 0;
    double c_ds_ = 0;
};

// Surface area of the unit sphere S^{d-1} in R^d.
double sphere_area(int d);
double unit_ball_volume(int d);

// g(x); throws SingularityError at x = 0
double eval_g(const KernelSpec& spec, std::span<const double> x);
void eval_grad_g(const KernelSpec& spec, std::span<const double> x, std::span<double> out);

// min(g, g(eta))
double g_truncated(const KernelSpec& spec, double r, double eta);
// g - g_eta, zero for r >= eta
double f_eta(const KernelSpec& spec, double r, double eta);
// g_eta - g_alpha; has the sign of alpha - eta
double f_alpha_eta(const KernelSpec& spec, double r, double alpha, double eta);
double eval_g_eta(const KernelSpec& spec, std::span<const double> x, double eta);
double eval_f_alpha_eta(const KernelSpec& spec, std::span<const double> x, double alpha, double eta);
// integral of f_eta over R^d
double integral_f_eta(const KernelSpec& spec, double eta);

} // namespace mflab
