#include "skm1/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace skm1 {

namespace {

// Pade-13 numerator applied to a; the denominator uses the same coefficients
// with alternating signs, so q13(a) = p13(-a).
void pade13(const Mat& a, Mat& p, Mat& q) {
  static const double b[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};
  const long n = a.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a4 * a2;
  const Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                     b[5] * a4 + b[3] * a2 + b[1] * id);
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                b[2] * a2 + b[0] * id;
  p = v + u;
  q = v - u;
}

}  // namespace

Mat expm(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: square matrix required");
  const double theta13 = 5.371920351148152;  // Higham's degree-13 threshold
  const double norm = a.lpNorm<1>();
  int squarings = 0;
  if (norm > theta13) {
    squarings = int(std::ceil(std::log2(norm / theta13)));
  }
  Mat scaled = a / std::pow(2.0, squarings);
  Mat p, q;
  pade13(scaled, p, q);
  Mat r = q.partialPivLu().solve(p);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

Mat psd_sqrt_factor(const Mat& a, double tol) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("psd_sqrt_factor: square matrix required");
  Eigen::LLT<Mat> llt(a);
  if (llt.info() == Eigen::Success) {
    Mat l = llt.matrixL();
    if (((l * l.transpose()) - a).norm() <= tol * (1.0 + a.norm())) return l;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  Vec ev = es.eigenvalues();
  for (long i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol)
      throw std::invalid_argument("psd_sqrt_factor: matrix is not positive semidefinite");
    if (ev[i] < 0) ev[i] = 0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
}

}  // namespace skm1
