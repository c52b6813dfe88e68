#include "finer/ntk.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "finer/errors.hpp"

namespace finer {

void KernelMatrix::validate() const {
  FINER_REQUIRE(k.rows() == k.cols(), "kernel: matrix not square");
  FINER_REQUIRE(k.rows() == coords.rows(), "kernel: coordinate count does not match kernel size");
  const double scale = max_abs(k);
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = i + 1; j < k.cols(); ++j)
      FINER_REQUIRE(std::abs(k(i, j) - k(j, i)) <= 1e-9 * scale, "kernel: matrix not symmetric");
}

namespace {

void mirror_upper(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
}

std::size_t scoped_parameter_count(const Mlp& mlp, NtkScope scope) {
  if (scope == NtkScope::kAllParameters) return mlp.parameter_count();
  return mlp.layer(0).weights.size() + mlp.layer(0).biases.size();
}

}  // namespace

Matrix parameter_jacobian(const Mlp& mlp, const Matrix& coords, NtkScope scope) {
  FINER_REQUIRE(mlp.output_dim() == 1, "ntk: scalar-output network required");
  const std::size_t n = coords.rows();
  const std::size_t p = scoped_parameter_count(mlp, scope);
  Matrix jac(n, p);
  const Matrix unit(1, 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix row(1, coords.cols(), std::vector<double>(coords.row(i).begin(), coords.row(i).end()));
    const ForwardPass pass = forward(mlp, row);
    const GradientSet g = backward(mlp, pass.cache, unit);
    std::vector<double> flat;
    if (scope == NtkScope::kAllParameters) {
      flat = g.flatten();
    } else {
      flat.assign(g.weights[0].span().begin(), g.weights[0].span().end());
      flat.insert(flat.end(), g.biases[0].begin(), g.biases[0].end());
    }
    std::copy(flat.begin(), flat.end(), jac.row(i).begin());
  }
  return jac;
}

KernelMatrix empirical_ntk(const Mlp& mlp, const Matrix& coords, NtkScope scope) {
  FINER_REQUIRE(mlp.output_dim() == 1, "empirical_ntk: scalar-output network required");
  FINER_REQUIRE(coords.rows() >= 1 && coords.rows() <= 2048, "empirical_ntk: need 1..2048 coordinates");
  const Matrix jac = parameter_jacobian(mlp, coords, scope);
  KernelMatrix out;
  out.k = matmul_nt(jac, jac);
  mirror_upper(out.k);
  out.coords = coords;
  out.provenance = KernelProvenance::kEmpirical;
  return out;
}

Matrix analytic_ntk_single(const Mlp& mlp, const Matrix& coords) {
  FINER_REQUIRE(mlp.dims().size() == 3 && mlp.input_dim() == 1 && mlp.output_dim() == 1 && !mlp.encoder(),
                "analytic_ntk: architecture must be 1 -> n -> 1 without encoding");
  FINER_REQUIRE(mlp.activation().kind == ActivationKind::kFiner, "analytic_ntk: FINER activation required");
  FINER_REQUIRE(coords.cols() == 1, "analytic_ntk: coordinates must be 1D");
  const std::size_t n = coords.rows();
  const std::size_t width = mlp.dims()[1];
  const double w0 = mlp.activation().omega0;
  const auto& hidden = mlp.layer(0);
  const auto& out_layer = mlp.layer(1);

  // a(i,k) = c_k ω₀ (2|g|+1) cos(ω₀(|g|+1)g) so that the sum over k is A·Aᵀ.
  Matrix a(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = coords(i, 0);
    for (std::size_t k = 0; k < width; ++k) {
      const double g = hidden.weights(k, 0) * x + hidden.biases[k];
      const double ag = std::abs(g);
      const double scale = 2.0 * ag + 1.0;
      const double sign = std::cos(w0 * (ag + 1.0) * g);
      a(i, k) = out_layer.weights(0, k) * w0 * scale * sign;
    }
  }
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double lead = coords(i, 0) * coords(j, 0) + 1.0;
      k(i, j) = lead * dot(a.row(i), a.row(j));
    }
  mirror_upper(k);
  return k;
}

KernelMatrix analytic_ntk_mc(const std::vector<std::size_t>& dims, const Activation& activation,
                             const InitScheme& scheme, const Matrix& coords, std::size_t ensemble_size) {
  FINER_REQUIRE(dims.size() == 3 && dims[0] == 1 && dims[2] == 1, "analytic_ntk_mc: architecture must be (1, n, 1)");
  FINER_REQUIRE(activation.kind == ActivationKind::kFiner, "analytic_ntk_mc: FINER activation required");
  FINER_REQUIRE(ensemble_size >= 1, "analytic_ntk_mc: ensemble size must be >= 1");
  FINER_REQUIRE(coords.cols() == 1, "analytic_ntk_mc: coordinates must be 1D");
  const std::size_t n = coords.rows();

  Matrix sum(n, n);
  Matrix sum_sq(n, n);
  for (std::size_t e = 0; e < ensemble_size; ++e) {
    InitScheme member = scheme;
    member.seed = ensemble_member_seed(scheme.seed, e);
    const Mlp mlp = init_mlp(dims, activation, member);
    const Matrix k = analytic_ntk_single(mlp, coords);
    for (std::size_t i = 0; i < k.size(); ++i) {
      sum.data()[i] += k.data()[i];
      sum_sq.data()[i] += k.data()[i] * k.data()[i];
    }
  }

  KernelMatrix out;
  const double m = static_cast<double>(ensemble_size);
  out.k = scale(sum, 1.0 / m);
  out.coords = coords;
  out.provenance = KernelProvenance::kAnalyticMonteCarlo;
  out.ensemble_size = ensemble_size;
  if (ensemble_size >= 2) {
    out.standard_error = Matrix(n, n);
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mean = out.k.data()[i];
      const double var = std::max(0.0, (sum_sq.data()[i] - m * mean * mean) / (m - 1.0));
      out.standard_error.data()[i] = std::sqrt(var / m);
    }
  }
  return out;
}

double diagonal_energy(const Matrix& k) {
  FINER_REQUIRE(k.rows() == k.cols() && k.rows() > 0, "diagonal_energy: square non-empty kernel required");
  const std::size_t n = k.rows();
  double diag = 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += i == j ? k(i, j) : std::abs(k(i, j));
  const double mean_diag = diag / static_cast<double>(n);
  if (n == 1 || off == 0.0) return kDiagonalEnergyCap;
  const double mean_off = off / static_cast<double>(n * (n - 1));
  return std::min(kDiagonalEnergyCap, mean_diag / mean_off);
}

std::size_t SpectrumReport::count_above(double threshold) const {
  std::size_t c = 0;
  for (double v : eigenvalues) c += v > threshold ? 1 : 0;
  return c;
}

SpectrumReport spectrum(const KernelMatrix& kernel, const std::vector<double>& thresholds) {
  kernel.validate();
  const EigenDecomposition eig = sym_eigen(kernel.k);
  SpectrumReport report;
  report.eigenvalues = eig.values.values();
  for (double t : thresholds) report.counts.emplace_back(t, report.count_above(t));
  report.diagonal_energy = diagonal_energy(kernel.k);
  return report;
}

void write_kernel_csv(const KernelMatrix& kernel, std::ostream& out) {
  char buf[40];
  for (std::size_t i = 0; i < kernel.k.rows(); ++i) {
    for (std::size_t j = 0; j < kernel.k.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", kernel.k(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace finer
