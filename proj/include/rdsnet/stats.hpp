#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rdsnet {

// ---------------------------------------------------------------------------
// Special functions and distribution tails
// ---------------------------------------------------------------------------

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
/// Series for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_q(double a, double x);

/// P(X >= x) for X ~ chi-square with `dof` degrees of freedom.
/// Throws std::invalid_argument for dof == 0 or x < 0.
double chi_square_sf(double x, unsigned dof);

double normal_cdf(double z);

/// Inverse standard normal CDF. Throws std::invalid_argument unless 0 < p < 1.
double normal_quantile(double p);

double logit(double p);
double expit(double x);

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

/// Linear-interpolation sample quantile (R type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

// ---------------------------------------------------------------------------
// Dense symmetric positive-definite algebra
// ---------------------------------------------------------------------------

/// Dense symmetric matrix. `set` writes both triangles, so symmetry is exact.
class SpdMatrix {
public:
    SpdMatrix() = default;
    explicit SpdMatrix(std::size_t n) : n_(n), v_(n * n, 0.0) {}

    static SpdMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return v_[i * n_ + j]; }

    void set(std::size_t i, std::size_t j, double value) noexcept {
        v_[i * n_ + j] = value;
        v_[j * n_ + i] = value;
    }
    void add(std::size_t i, std::size_t j, double value) noexcept {
        v_[i * n_ + j] += value;
        if (i != j) v_[j * n_ + i] += value;
    }

    std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<double> v_;
};

/// Lower-triangular L with L Lᵀ equal to the factored matrix.
class CholeskyFactor {
public:
    CholeskyFactor() = default;
    explicit CholeskyFactor(std::size_t n) : n_(n), v_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return v_[i * n_ + j]; }
    double& at(std::size_t i, std::size_t j) noexcept { return v_[i * n_ + j]; }

    /// Solves L x = b.
    std::vector<double> solve_lower(std::span<const double> b) const;
    /// Solves Lᵀ x = b.
    std::vector<double> solve_upper(std::span<const double> b) const;
    /// Solves (L Lᵀ) x = b.
    std::vector<double> solve(std::span<const double> b) const;

    /// log det(L Lᵀ).
    double log_determinant() const;

private:
    std::size_t n_ = 0;
    std::vector<double> v_;
};

/// Throws NotPositiveDefinite if any pivot is <= 0.
CholeskyFactor cholesky(const SpdMatrix& m);

}  // namespace rdsnet
