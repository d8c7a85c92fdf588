#include "navsfm/geom/essential.h"

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace navsfm {
namespace {

// Polynomial of total degree <= 3 in (x, y, z).
struct Poly {
  std::array<double, 64> c{};

  double& at(int i, int j, int k) { return c[16 * i + 4 * j + k]; }
  double at(int i, int j, int k) const { return c[16 * i + 4 * j + k]; }

  static Poly Linear(double x, double y, double z, double w) {
    Poly p;
    p.at(1, 0, 0) = x;
    p.at(0, 1, 0) = y;
    p.at(0, 0, 1) = z;
    p.at(0, 0, 0) = w;
    return p;
  }
};

Poly operator+(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < 64; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly r;
  for (int i = 0; i < 64; ++i) r.c[i] = a.c[i] - b.c[i];
  return r;
}

Poly operator*(double s, const Poly& a) {
  Poly r;
  for (int i = 0; i < 64; ++i) r.c[i] = s * a.c[i];
  return r;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  for (int i1 = 0; i1 < 4; ++i1)
    for (int j1 = 0; i1 + j1 < 4; ++j1)
      for (int k1 = 0; i1 + j1 + k1 < 4; ++k1) {
        const double ca = a.at(i1, j1, k1);
        if (ca == 0.0) continue;
        for (int i2 = 0; i1 + i2 < 4; ++i2)
          for (int j2 = 0; j1 + j2 < 4 && i1 + i2 + j1 + j2 < 4; ++j2)
            for (int k2 = 0; i1 + i2 + j1 + j2 + k1 + k2 < 4; ++k2) {
              r.at(i1 + i2, j1 + j2, k1 + k2) += ca * b.at(i2, j2, k2);
            }
      }
  return r;
}

using PolyMatrix = std::array<std::array<Poly, 3>, 3>;

PolyMatrix Multiply(const PolyMatrix& a, const PolyMatrix& b) {
  PolyMatrix r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] = r[i][j] + a[i][k] * b[k][j];
  return r;
}

PolyMatrix Transpose(const PolyMatrix& a) {
  PolyMatrix r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
  return r;
}

// Column order: ten cubic monomials, then the action-matrix basis
// x^2, xy, xz, y^2, yz, z^2, x, y, z, 1.
constexpr int kMonomials[20][3] = {
    {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1}, {1, 0, 2},
    {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3}, {2, 0, 0}, {1, 1, 0},
    {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}, {1, 0, 0}, {0, 1, 0},
    {0, 0, 1}, {0, 0, 0}};

void AppendRow(const Poly& p, int row, Eigen::Matrix<double, 10, 20>* m) {
  for (int c = 0; c < 20; ++c) {
    (*m)(row, c) = p.at(kMonomials[c][0], kMonomials[c][1], kMonomials[c][2]);
  }
}

}  // namespace

Eigen::Matrix3d EssentialFromMotion(const Eigen::Matrix3d& rotation,
                                    const Eigen::Vector3d& translation) {
  return Skew(translation) * rotation;
}

std::vector<Eigen::Matrix3d> EssentialFivePoint(
    const std::vector<Eigen::Vector3d>& rays1,
    const std::vector<Eigen::Vector3d>& rays2) {
  const int n = static_cast<int>(rays1.size());
  std::vector<Eigen::Matrix3d> solutions;
  if (n < 5 || rays2.size() != rays1.size()) return solutions;

  // f2^T E f1 = sum_ab f2_a f1_b E_ab, E stored row-major.
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(std::max(n, 9), 9);
  a.setZero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d f1 = rays1[i].normalized();
    const Eigen::Vector3d f2 = rays2[i].normalized();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(i, 3 * r + c) = f2[r] * f1[c];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 9> v = svd.matrixV();
  const Eigen::Matrix<double, 9, 1> X = v.col(5), Y = v.col(6), Z = v.col(7),
                                    W = v.col(8);

  PolyMatrix e;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int k = 3 * r + c;
      e[r][c] = Poly::Linear(X[k], Y[k], Z[k], W[k]);
    }

  Eigen::Matrix<double, 10, 20> m;
  // det(E) = 0
  const Poly det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
                   e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
                   e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
  AppendRow(det, 0, &m);
  // 2 E E^T E - tr(E E^T) E = 0
  const PolyMatrix eet = Multiply(e, Transpose(e));
  const Poly trace = eet[0][0] + eet[1][1] + eet[2][2];
  const PolyMatrix eete = Multiply(eet, e);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      AppendRow(2.0 * eete[r][c] - trace * e[r][c], 1 + 3 * r + c, &m);
    }

  const Eigen::PartialPivLU<Eigen::Matrix<double, 10, 10>> lu(m.leftCols<10>());
  const Eigen::Matrix<double, 10, 10> b = lu.solve(m.rightCols<10>());
  if (!b.allFinite()) return solutions;

  // Multiplication by x on the basis {x^2, xy, xz, y^2, yz, z^2, x, y, z, 1}.
  Eigen::Matrix<double, 10, 10> action = Eigen::Matrix<double, 10, 10>::Zero();
  action.topRows<6>() = -b.topRows<6>();
  action(6, 0) = 1.0;
  action(7, 1) = 1.0;
  action(8, 2) = 1.0;
  action(9, 6) = 1.0;

  Eigen::EigenSolver<Eigen::Matrix<double, 10, 10>> eig(action);
  if (eig.info() != Eigen::Success) return solutions;
  for (int i = 0; i < 10; ++i) {
    if (std::abs(eig.eigenvalues()[i].imag()) > 1e-8) continue;
    const Eigen::Matrix<double, 10, 1> vec = eig.eigenvectors().col(i).real();
    if (std::abs(vec[9]) < 1e-12) continue;
    const double x = vec[6] / vec[9], y = vec[7] / vec[9], z = vec[8] / vec[9];
    const Eigen::Matrix<double, 9, 1> ev = x * X + y * Y + z * Z + W;
    Eigen::Matrix3d E;
    E << ev[0], ev[1], ev[2], ev[3], ev[4], ev[5], ev[6], ev[7], ev[8];
    solutions.push_back(E / E.norm());
  }
  return solutions;
}

std::vector<RelativeMotion> DecomposeEssential(const Eigen::Matrix3d& E) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  Eigen::Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Eigen::Matrix3d r1 = u * w * v.transpose();
  const Eigen::Matrix3d r2 = u * w.transpose() * v.transpose();
  const Eigen::Vector3d t = u.col(2).normalized();
  return {{r1, t}, {r1, -t}, {r2, t}, {r2, -t}};
}

bool RayDepths(const RelativeMotion& motion, const Eigen::Vector3d& ray1,
               const Eigen::Vector3d& ray2, double* depth1, double* depth2) {
  // d2 f2 = d1 R f1 + t, least squares in (d1, d2).
  const Eigen::Vector3d rf1 = motion.rotation * ray1.normalized();
  const Eigen::Vector3d f2 = ray2.normalized();
  Eigen::Matrix<double, 3, 2> a;
  a.col(0) = rf1;
  a.col(1) = -f2;
  const Eigen::Matrix2d ata = a.transpose() * a;
  if (ata.determinant() < 1e-12) return false;
  const Eigen::Vector2d d = ata.ldlt().solve(-a.transpose() * motion.translation);
  *depth1 = d[0];
  *depth2 = d[1];
  return true;
}

RelativeMotion SelectMotionByCheirality(const Eigen::Matrix3d& E,
                                        const std::vector<Eigen::Vector3d>& rays1,
                                        const std::vector<Eigen::Vector3d>& rays2,
                                        int* num_in_front) {
  RelativeMotion best;
  int best_count = -1;
  for (const RelativeMotion& m : DecomposeEssential(E)) {
    int count = 0;
    for (size_t i = 0; i < rays1.size(); ++i) {
      double d1, d2;
      if (RayDepths(m, rays1[i], rays2[i], &d1, &d2) && d1 > 0 && d2 > 0) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = m;
    }
  }
  if (num_in_front != nullptr) *num_in_front = best_count;
  return best;
}

double EpipolarAngularError(const Eigen::Matrix3d& E, const Eigen::Vector3d& ray1,
                            const Eigen::Vector3d& ray2) {
  const Eigen::Vector3d f1 = ray1.normalized();
  const Eigen::Vector3d f2 = ray2.normalized();
  const Eigen::Vector3d n2 = E * f1;            // epipolar plane normal, view 2
  const Eigen::Vector3d n1 = E.transpose() * f2;  // view 1
  const double algebraic = std::abs(f2.dot(n2));
  const double s2 = n2.norm() > 0 ? algebraic / n2.norm() : 1.0;
  const double s1 = n1.norm() > 0 ? algebraic / n1.norm() : 1.0;
  return std::asin(std::min(1.0, std::max(s1, s2)));
}

}  // namespace navsfm
