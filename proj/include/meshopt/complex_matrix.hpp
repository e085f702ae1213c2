#ifndef MESHOPT_COMPLEX_MATRIX_HPP
#define MESHOPT_COMPLEX_MATRIX_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshopt {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  }

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const Complex& operator()(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  double frobenius_norm() const {
    double s = 0;
    for (const Complex& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  Complex trace() const {
    Complex t = 0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same_shape(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same_shape(o);
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(Complex c) {
    for (Complex& z : data_) z *= c;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(Complex c, ComplexMatrix a) { return a *= c; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex c) { return a *= c; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
    ComplexMatrix out(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
      for (int k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

 private:
  void check_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Complex> data_;
};

/// Square complex matrix with A = A^dag.  Construction from a general matrix
/// symmetrizes via (A + A^dag)/2 to suppress numerical drift.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(int dim) : m_(dim, dim) {}
  explicit HermitianMatrix(const ComplexMatrix& a) {
    if (!a.square()) throw std::invalid_argument("Hermitian matrix must be square");
    m_ = ComplexMatrix(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j)
        m_(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  }

  static HermitianMatrix identity(int n) { return HermitianMatrix(ComplexMatrix::identity(n)); }
  static HermitianMatrix scaled_identity(int n, double s) {
    HermitianMatrix h(n);
    for (int i = 0; i < n; ++i) h.m_(i, i) = s;
    return h;
  }

  int dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  const Complex& operator()(int i, int j) const { return m_(i, j); }

  double trace_real() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.frobenius_norm(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double c) {
    m_ *= Complex(c, 0);
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double c, HermitianMatrix a) { return a *= c; }

 private:
  ComplexMatrix m_;
};

/// Result of eigh: eigenvalues sorted non-increasing, basis columns are the
/// matching orthonormal eigenvectors.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  ComplexMatrix basis;

  ComplexMatrix reconstruct() const;
};

class NotPsdError : public std::runtime_error {
 public:
  explicit NotPsdError(const std::string& what) : std::runtime_error(what) {}
};

/// Cyclic Jacobi eigendecomposition for complex Hermitian matrices.
/// Converged when the largest off-diagonal magnitude is <= 1e-12 * ||A||_F.
EigenDecomposition eigh(const HermitianMatrix& a);

/// (A)_+ : clip negative eigenvalues to zero, keep the eigenbasis.
HermitianMatrix psd_clip(const HermitianMatrix& a);

/// sqrt(Tr[(A-B)^dag (A-B)]).
double frobenius_dist(const HermitianMatrix& a, const HermitianMatrix& b);

/// log2|I + A| = sum log2(1 + lambda_i) for PSD A.  Eigenvalues below -1e-6
/// raise NotPsdError; tiny negatives are clamped to zero.
double logdet2_I_plus(const HermitianMatrix& a);

}  // namespace meshopt

#endif  // MESHOPT_COMPLEX_MATRIX_HPP
