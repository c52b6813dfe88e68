#pragma once

#include <span>
#include <string>
#include <string_view>

namespace finer {

enum class ActivationKind {
  kFiner,     ///< sin(ω₀ (|x|+1) x)
  kSine,      ///< sin(ω₀ x)
  kGaussian,  ///< exp(-x² / 2σ²)
  kIdentity,  ///< x
  kRelu,      ///< max(x, 0); hidden activation of the positional-encoding baseline
};

struct Activation {
  ActivationKind kind = ActivationKind::kFiner;
  double omega0 = 30.0;
  double sigma = 0.05;

  static Activation finer(double omega0 = 30.0) { return {ActivationKind::kFiner, omega0, 0.05}; }
  static Activation sine(double omega0 = 30.0) { return {ActivationKind::kSine, omega0, 0.05}; }
  static Activation gaussian(double sigma = 0.05) { return {ActivationKind::kGaussian, 1.0, sigma}; }
  static Activation identity() { return {ActivationKind::kIdentity, 1.0, 0.05}; }
  static Activation relu() { return {ActivationKind::kRelu, 1.0, 0.05}; }

  /// True for the families whose pre-activation is multiplied by ω₀.
  bool periodic() const noexcept { return kind == ActivationKind::kFiner || kind == ActivationKind::kSine; }

  /// Throws ContractViolation unless ω₀ > 0 and σ > 0.
  void validate() const;

  bool operator==(const Activation&) const = default;
};

std::string_view to_string(ActivationKind kind);
/// Accepts "finer", "sine", "gauss"/"gaussian", "identity", "relu".
ActivationKind parse_activation_kind(std::string_view name);

double activate(const Activation& act, double x);
double activate_grad(const Activation& act, double x);

/// out[i] = activate(pre[i]).
void activate(const Activation& act, std::span<const double> pre, std::span<double> out);
/// grad[i] *= activate_grad(pre[i]); turns dL/dz into dL/dg in place.
void scale_by_activation_grad(const Activation& act, std::span<const double> pre, std::span<double> grad);

/// Local angular frequency of FINER around pre-activation g: ω₀(2|g|+1).
double finer_instantaneous_frequency(double omega0, double g);

}  // namespace finer
