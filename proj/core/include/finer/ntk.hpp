#pragma once

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include "finer/activation.hpp"
#include "finer/linalg.hpp"
#include "finer/mlp.hpp"

namespace finer {

enum class KernelProvenance { kEmpirical, kAnalyticMonteCarlo };

/// Which parameters enter ⟨∇_θ f(x_i), ∇_θ f(x_j)⟩.
enum class NtkScope {
  kAllParameters,
  /// First-layer weights and biases only: the (w_k, b_k) terms of the
  /// closed-form one-hidden-layer kernel.
  kFirstLayer,
};

struct KernelMatrix {
  Matrix k;                  ///< N × N, exactly symmetric
  Matrix coords;             ///< N × d_in
  KernelProvenance provenance = KernelProvenance::kEmpirical;
  std::size_t ensemble_size = 0;  ///< Monte-Carlo members (analytic only)
  Matrix standard_error;     ///< per-entry MC standard error (analytic, ensemble ≥ 2)

  std::size_t size() const noexcept { return k.rows(); }
  void validate() const;
};

/// Per-sample parameter gradients, one row per coordinate.
Matrix parameter_jacobian(const Mlp& mlp, const Matrix& coords, NtkScope scope = NtkScope::kAllParameters);

/// Single-θ kernel G·Gᵀ of the parameter Jacobian. Requires a scalar-output
/// network and N ≤ 2048. The upper triangle is mirrored, so the result is
/// exactly symmetric.
KernelMatrix empirical_ntk(const Mlp& mlp, const Matrix& coords, NtkScope scope = NtkScope::kAllParameters);

/// Seed used for ensemble member `member` of a Monte-Carlo kernel.
inline std::uint64_t ensemble_member_seed(std::uint64_t base_seed, std::size_t member) {
  return base_seed + member;
}

/// Closed-form kernel of a 1 → n → 1 FINER network,
///   K(x_i,x_j) = (x_i x_j + 1) Σ_k c_k² ω₀² (2|g_k(x_i)|+1)(2|g_k(x_j)|+1)
///                · cos(ω₀(|g_k(x_i)|+1) g_k(x_i)) · cos(ω₀(|g_k(x_j)|+1) g_k(x_j)),
/// g_k(x) = w_k x + b_k, averaged over `ensemble_size` networks drawn with
/// init_mlp using seeds ensemble_member_seed(scheme.seed, e).
KernelMatrix analytic_ntk_mc(const std::vector<std::size_t>& dims, const Activation& activation,
                             const InitScheme& scheme, const Matrix& coords, std::size_t ensemble_size);

/// The summand above for one fixed network (no averaging).
Matrix analytic_ntk_single(const Mlp& mlp, const Matrix& coords);

/// Returned by diagonal_energy when the off-diagonal mean is zero.
inline constexpr double kDiagonalEnergyCap = 1e12;

/// mean(diag K) / mean(|offdiag K|), capped at kDiagonalEnergyCap.
double diagonal_energy(const Matrix& k);

struct SpectrumReport {
  std::vector<double> eigenvalues;                      ///< descending
  std::vector<std::pair<double, std::size_t>> counts;   ///< (threshold, #eigenvalues > threshold)
  double diagonal_energy = 0.0;

  std::size_t count_above(double threshold) const;
};

inline const std::vector<double> kDefaultSpectrumThresholds{1e-2, 1e-1, 1e0, 1e1};

SpectrumReport spectrum(const KernelMatrix& kernel,
                        const std::vector<double>& thresholds = kDefaultSpectrumThresholds);

void write_kernel_csv(const KernelMatrix& kernel, std::ostream& out);

}  // namespace finer
