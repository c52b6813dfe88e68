#include "finer/activation.hpp"

#include <algorithm>
#include <cmath>

#include "finer/errors.hpp"

#if defined(FINER_HAVE_LIBMVEC) && (defined(__AVX512F__) || defined(__AVX2__))
#include <immintrin.h>
#define FINER_VECTOR_TRIG 1
extern "C" {
#if defined(__AVX512F__)
__m512d _ZGVeN8v_sin(__m512d);
__m512d _ZGVeN8v_cos(__m512d);
#else
__m256d _ZGVdN4v_sin(__m256d);
__m256d _ZGVdN4v_cos(__m256d);
#endif
}
#endif

namespace finer {
namespace {

// Applies sin or cos in place over a whole buffer. With glibc's vector math
// library every element (tail included) goes through the same SIMD kernel, so
// a value's result does not depend on where it sits in the buffer.
enum class Trig { kSin, kCos };

void trig_inplace(Trig fn, double* x, std::size_t n) {
#ifdef FINER_VECTOR_TRIG
#if defined(__AVX512F__)
  constexpr std::size_t kLanes = 8;
  auto apply = [fn](const double* in, double* out) {
    const __m512d v = _mm512_loadu_pd(in);
    _mm512_storeu_pd(out, fn == Trig::kSin ? _ZGVeN8v_sin(v) : _ZGVeN8v_cos(v));
  };
#else
  constexpr std::size_t kLanes = 4;
  auto apply = [fn](const double* in, double* out) {
    const __m256d v = _mm256_loadu_pd(in);
    _mm256_storeu_pd(out, fn == Trig::kSin ? _ZGVdN4v_sin(v) : _ZGVdN4v_cos(v));
  };
#endif
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) apply(x + i, x + i);
  if (i < n) {
    double tail[kLanes] = {};
    std::copy(x + i, x + n, tail);
    apply(tail, tail);
    std::copy(tail, tail + (n - i), x + i);
  }
#else
  for (std::size_t i = 0; i < n; ++i) x[i] = fn == Trig::kSin ? std::sin(x[i]) : std::cos(x[i]);
#endif
}

double sin1(double x) {
  trig_inplace(Trig::kSin, &x, 1);
  return x;
}

double cos1(double x) {
  trig_inplace(Trig::kCos, &x, 1);
  return x;
}

constexpr std::size_t kBlock = 256;

}  // namespace

void Activation::validate() const {
  FINER_REQUIRE(omega0 > 0.0 && std::isfinite(omega0), "activation: omega0 must be positive");
  FINER_REQUIRE(sigma > 0.0 && std::isfinite(sigma), "activation: sigma must be positive");
}

std::string_view to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kFiner: return "finer";
    case ActivationKind::kSine: return "sine";
    case ActivationKind::kGaussian: return "gauss";
    case ActivationKind::kIdentity: return "identity";
    case ActivationKind::kRelu: return "relu";
  }
  return "unknown";
}

ActivationKind parse_activation_kind(std::string_view name) {
  if (name == "finer") return ActivationKind::kFiner;
  if (name == "sine" || name == "siren") return ActivationKind::kSine;
  if (name == "gauss" || name == "gaussian") return ActivationKind::kGaussian;
  if (name == "identity") return ActivationKind::kIdentity;
  if (name == "relu") return ActivationKind::kRelu;
  throw ContractViolation("unknown activation '" + std::string(name) + "'");
}

double activate(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::kFiner: return sin1(act.omega0 * (std::abs(x) + 1.0) * x);
    case ActivationKind::kSine: return sin1(act.omega0 * x);
    case ActivationKind::kGaussian: return std::exp(-x * x / (2.0 * act.sigma * act.sigma));
    case ActivationKind::kIdentity: return x;
    case ActivationKind::kRelu: return x > 0.0 ? x : 0.0;
  }
  return x;
}

// d/dx (|x|+1)x = 2|x|+1, including x = 0.
double activate_grad(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::kFiner: {
      const double ax = std::abs(x);
      return act.omega0 * (2.0 * ax + 1.0) * cos1(act.omega0 * (ax + 1.0) * x);
    }
    case ActivationKind::kSine: return act.omega0 * cos1(act.omega0 * x);
    case ActivationKind::kGaussian: {
      const double s2 = act.sigma * act.sigma;
      return -x / s2 * std::exp(-x * x / (2.0 * s2));
    }
    case ActivationKind::kIdentity: return 1.0;
    case ActivationKind::kRelu: return x > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

void activate(const Activation& act, std::span<const double> pre, std::span<double> out) {
  FINER_REQUIRE(pre.size() == out.size(), "activate: length mismatch");
  const double w0 = act.omega0;
  switch (act.kind) {
    case ActivationKind::kFiner:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = w0 * (std::abs(pre[i]) + 1.0) * pre[i];
      trig_inplace(Trig::kSin, out.data(), out.size());
      return;
    case ActivationKind::kSine:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = w0 * pre[i];
      trig_inplace(Trig::kSin, out.data(), out.size());
      return;
    default:
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = activate(act, pre[i]);
  }
}

void scale_by_activation_grad(const Activation& act, std::span<const double> pre, std::span<double> grad) {
  FINER_REQUIRE(pre.size() == grad.size(), "scale_by_activation_grad: length mismatch");
  const double w0 = act.omega0;
  switch (act.kind) {
    case ActivationKind::kFiner:
    case ActivationKind::kSine: {
      const bool finer = act.kind == ActivationKind::kFiner;
      double c[kBlock];
      for (std::size_t b = 0; b < pre.size(); b += kBlock) {
        const std::size_t n = std::min(kBlock, pre.size() - b);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = pre[b + i];
          c[i] = finer ? w0 * (std::abs(x) + 1.0) * x : w0 * x;
        }
        trig_inplace(Trig::kCos, c, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double scale = finer ? w0 * (2.0 * std::abs(pre[b + i]) + 1.0) : w0;
          grad[b + i] *= scale * c[i];
        }
      }
      return;
    }
    default:
      for (std::size_t i = 0; i < pre.size(); ++i) grad[i] *= activate_grad(act, pre[i]);
  }
}

double finer_instantaneous_frequency(double omega0, double g) { return omega0 * (2.0 * std::abs(g) + 1.0); }

}  // namespace finer
