#pragma once

// Symmetric positive definite matrices for geometric anisotropy, with a
// cached eigendecomposition, Loewner-order tests and quadratic forms.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace spatcov {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class AnisotropyMatrix {
 public:
  explicit AnisotropyMatrix(const Mat& m) : m_(m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw std::invalid_argument("AnisotropyMatrix: square matrix required");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("AnisotropyMatrix: matrix not symmetric");
    m_ = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(m_);
    evals_ = es.eigenvalues();  // ascending
    evecs_ = es.eigenvectors();
    if (evals_(0) <= 0.0)
      throw std::invalid_argument("AnisotropyMatrix: matrix not positive definite");
    det_ = evals_.prod();
    inv_ = evecs_ * evals_.cwiseInverse().asDiagonal() * evecs_.transpose();
  }

  /// A = P diag(scales) P^T with P a rotation built from one angle (d=2)
  /// or three angles applied as Rz(a0) Ry(a1) Rx(a2) (d=3).
  static AnisotropyMatrix from_rotation_scaling(const std::vector<double>& angles,
                                                const std::vector<double>& scales) {
    const int d = static_cast<int>(scales.size());
    for (double s : scales)
      if (!(s > 0.0)) throw std::invalid_argument("from_rotation_scaling: scales must be > 0");
    Mat p;
    if (d == 2) {
      if (angles.size() != 1)
        throw std::invalid_argument("from_rotation_scaling: one angle expected in 2D");
      const double c = std::cos(angles[0]), s = std::sin(angles[0]);
      p.resize(2, 2);
      p << c, -s, s, c;
    } else if (d == 3) {
      if (angles.size() != 3)
        throw std::invalid_argument("from_rotation_scaling: three angles expected in 3D");
      auto rot = [](int axis, double a) {
        Mat r = Mat::Identity(3, 3);
        const double c = std::cos(a), s = std::sin(a);
        const int i = (axis + 1) % 3, j = (axis + 2) % 3;
        r(i, i) = c; r(i, j) = -s; r(j, i) = s; r(j, j) = c;
        return r;
      };
      p = rot(2, angles[0]) * rot(1, angles[1]) * rot(0, angles[2]);
    } else {
      throw std::invalid_argument("from_rotation_scaling: only d=2 and d=3 supported");
    }
    Vec sc(d);
    for (int i = 0; i < d; ++i) sc(i) = scales[i];
    return AnisotropyMatrix(p * sc.asDiagonal() * p.transpose());
  }

  static AnisotropyMatrix identity(int d) { return AnisotropyMatrix(Mat::Identity(d, d)); }
  static AnisotropyMatrix scaled_identity(int d, double a) {
    return AnisotropyMatrix(a * Mat::Identity(d, d));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  const Mat& inverse() const { return inv_; }
  const Vec& eigenvalues() const { return evals_; }  // ascending
  double lambda_min() const { return evals_(0); }
  double lambda_max() const { return evals_(evals_.size() - 1); }
  double det() const { return det_; }

  /// sqrt(h^T A h)
  double quad_form_sqrt(const Vec& h) const {
    if (h.size() != m_.rows())
      throw std::invalid_argument("quad_form_sqrt: dimension mismatch");
    return std::sqrt(std::max(0.0, h.dot(m_ * h)));
  }

  /// sqrt(w^T A^{-1} w)
  double inv_quad_form_sqrt(const Vec& w) const {
    if (w.size() != m_.rows())
      throw std::invalid_argument("inv_quad_form_sqrt: dimension mismatch");
    return std::sqrt(std::max(0.0, w.dot(inv_ * w)));
  }

 private:
  Mat m_, inv_, evecs_;
  Vec evals_;
  double det_ = 0.0;
};

/// A1 >= A2 in the Loewner order, up to a relative PSD tolerance that
/// absorbs boundary cases.
inline bool loewner_geq(const AnisotropyMatrix& a1, const AnisotropyMatrix& a2) {
  if (a1.dim() != a2.dim()) throw std::invalid_argument("loewner_geq: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(a1.matrix() - a2.matrix());
  return es.eigenvalues()(0) >= -1e-10 * a1.lambda_max();
}

}  // namespace spatcov
