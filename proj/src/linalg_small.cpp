#include "geoflow/linalg_small.hpp"

#include <algorithm>
#include <cmath>

namespace geoflow::linalg {

namespace {

// Dense symmetric from packed upper triangle.
void unpack(const double* a, int n, double m[3][3]) {
  int s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      m[i][j] = a[s];
      m[j][i] = a[s];
      ++s;
    }
}

}  // namespace

double sym_det(const double* a, int n) {
  switch (n) {
    case 1:
      return a[0];
    case 2:
      return a[0] * a[2] - a[1] * a[1];
    default:
      return a[0] * (a[3] * a[5] - a[4] * a[4]) -
             a[1] * (a[1] * a[5] - a[4] * a[2]) +
             a[2] * (a[1] * a[4] - a[3] * a[2]);
  }
}

bool sym_inverse(const double* a, int n, double* out) {
  const double det = sym_det(a, n);
  if (det == 0.0 || !std::isfinite(det)) return false;
  const double inv = 1.0 / det;
  switch (n) {
    case 1:
      out[0] = inv;
      return true;
    case 2:
      out[0] = a[2] * inv;
      out[1] = -a[1] * inv;
      out[2] = a[0] * inv;
      return true;
    default:
      out[0] = (a[3] * a[5] - a[4] * a[4]) * inv;
      out[1] = (a[2] * a[4] - a[1] * a[5]) * inv;
      out[2] = (a[1] * a[4] - a[2] * a[3]) * inv;
      out[3] = (a[0] * a[5] - a[2] * a[2]) * inv;
      out[4] = (a[1] * a[2] - a[0] * a[4]) * inv;
      out[5] = (a[0] * a[3] - a[1] * a[1]) * inv;
      return true;
  }
}

bool sym_cholesky(const double* a, int n, double* lower) {
  double m[3][3];
  unpack(a, n, m);
  double l[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = m[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (sum <= 0.0) return false;
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lower[i * n + j] = l[i][j];
  return true;
}

std::array<double, 3> sym_eigenvalues(const double* a, int n) {
  std::array<double, 3> ev{0.0, 0.0, 0.0};
  if (n == 1) {
    ev[0] = a[0];
    return ev;
  }
  if (n == 2) {
    const double tr = a[0] + a[2];
    const double diff = a[0] - a[2];
    const double disc = std::sqrt(diff * diff + 4.0 * a[1] * a[1]);
    ev[0] = 0.5 * (tr - disc);
    ev[1] = 0.5 * (tr + disc);
    return ev;
  }
  // Cyclic Jacobi; a handful of sweeps is ample at this size.
  double m[3][3];
  unpack(a, n, m);
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
    double scale = std::abs(m[0][0]) + std::abs(m[1][1]) + std::abs(m[2][2]);
    if (off <= 1e-15 * std::max(scale, 1e-300)) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (m[p][q] == 0.0) continue;
        const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        double mp[3], mq[3];
        for (int k = 0; k < 3; ++k) {
          mp[k] = c * m[p][k] - s * m[q][k];
          mq[k] = s * m[p][k] + c * m[q][k];
        }
        for (int k = 0; k < 3; ++k) {
          m[p][k] = mp[k];
          m[q][k] = mq[k];
        }
        for (int k = 0; k < 3; ++k) {
          const double kp = c * m[k][p] - s * m[k][q];
          const double kq = s * m[k][p] + c * m[k][q];
          m[k][p] = kp;
          m[k][q] = kq;
        }
      }
    }
  }
  ev = {m[0][0], m[1][1], m[2][2]};
  std::sort(ev.begin(), ev.begin() + 3);
  return ev;
}

double sym_eigen_min(const double* a, int n) {
  return sym_eigenvalues(a, n)[0];
}

double rel_eigen_min(const double* a, const double* g, int n) {
  double l[9];
  if (!sym_cholesky(g, n, l)) return std::nan("");
  // B = L^{-1} A L^{-T}: solve L X = A, then L Y = X^T; B = Y symmetric.
  double A[3][3];
  unpack(a, n, A);
  double X[3][3];
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double sum = A[i][col];
      for (int k = 0; k < i; ++k) sum -= l[i * n + k] * X[k][col];
      X[i][col] = sum / l[i * n + i];
    }
  }
  double B[3][3];
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double sum = X[col][i];  // row col of X transposed
      for (int k = 0; k < i; ++k) sum -= l[i * n + k] * B[k][col];
      B[i][col] = sum / l[i * n + i];
    }
  }
  double packed[6];
  int s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) packed[s++] = 0.5 * (B[i][j] + B[j][i]);
  return sym_eigen_min(packed, n);
}

}  // namespace geoflow::linalg
