#include "meshopt/complex_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace meshopt {

ComplexMatrix EigenDecomposition::reconstruct() const {
  const int n = basis.rows();
  ComplexMatrix lam(n, n);
  for (int i = 0; i < n; ++i) lam(i, i) = eigenvalues[i];
  return basis * lam * basis.adjoint();
}

namespace {

double max_offdiag(const ComplexMatrix& a) {
  double best = 0;
  for (int p = 0; p < a.rows(); ++p)
    for (int q = p + 1; q < a.cols(); ++q) best = std::max(best, std::abs(a(p, q)));
  return best;
}

// One Jacobi rotation zeroing a(p,q).  U differs from identity only in the
// (p,q) plane: U = [[c*phi, s*phi], [-s, c]] with phi = a(p,q)/|a(p,q)|.
void rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
  const Complex beta = a(p, q);
  const double absb = std::abs(beta);
  if (absb == 0.0) return;
  const Complex phi = beta / absb;

  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * absb);
  const double sign = tau >= 0.0 ? 1.0 : -1.0;
  const double t = sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Complex upp = phi * c;
  const Complex upq = phi * s;
  const int n = a.rows();

  // A <- A U (columns p, q)
  for (int k = 0; k < n; ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * upp - akq * s;
    a(k, q) = akp * upq + akq * c;
  }
  // A <- U^dag A (rows p, q)
  for (int k = 0; k < n; ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = std::conj(upp) * apk - s * aqk;
    a(q, k) = std::conj(upq) * apk + c * aqk;
  }
  // Restore exact Hermitian structure on the touched entries.
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = Complex(a(p, p).real(), 0.0);
  a(q, q) = Complex(a(q, q).real(), 0.0);

  // V <- V U
  for (int k = 0; k < n; ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = vkp * upp - vkq * s;
    v(k, q) = vkp * upq + vkq * c;
  }
}

}  // namespace

EigenDecomposition eigh(const HermitianMatrix& input) {
  // HermitianMatrix construction already symmetrized; copy the working matrix.
  ComplexMatrix a = input.matrix();
  const int n = a.rows();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double norm = a.frobenius_norm();
  const double tol = 1e-12 * norm;
  const int max_sweeps = 100;
  if (norm > 0.0) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      if (max_offdiag(a) <= tol) break;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
          if (std::abs(a(p, q)) > tol * 1e-2) rotate(a, v, p, q);
    }
  }

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });
  out.basis = ComplexMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(idx[j], idx[j]).real();
    for (int i = 0; i < n; ++i) out.basis(i, j) = v(i, idx[j]);
  }
  return out;
}

HermitianMatrix psd_clip(const HermitianMatrix& a) {
  const EigenDecomposition ed = eigh(a);
  const int n = a.dim();
  ComplexMatrix lam(n, n);
  for (int i = 0; i < n; ++i) lam(i, i) = std::max(ed.eigenvalues[i], 0.0);
  return HermitianMatrix(ed.basis * lam * ed.basis.adjoint());
}

double frobenius_dist(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("frobenius_dist dimension mismatch");
  return (a.matrix() - b.matrix()).frobenius_norm();
}

double logdet2_I_plus(const HermitianMatrix& a) {
  const EigenDecomposition ed = eigh(a);
  double sum = 0;
  for (double lam : ed.eigenvalues) {
    if (lam < -1e-6)
      throw NotPsdError("logdet2_I_plus: eigenvalue " + std::to_string(lam) + " below -1e-6");
    sum += std::log2(1.0 + std::max(lam, 0.0));
  }
  return sum;
}

}  // namespace meshopt
