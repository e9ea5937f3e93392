#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfwave {

/// Uniform radial spacetime grid. The time step honors the CFL fraction and
/// is then rounded so that n_steps * dt lands exactly on t_final, which keeps
/// refinement studies comparable at a common final time.
struct SpacetimeGrid {
  double r_max = 0;
  double dr = 0;
  double dt = 0;
  double t_final = 0;
  int J = 0;        // r_j = j*dr, j = 0..J
  int n_steps = 0;  // t_n = n*dt, n = 0..n_steps

  static SpacetimeGrid make(double r_max, double dr, double t_final, double c_cfl = 0.9) {
    if (!(c_cfl > 0.0 && c_cfl < 1.0)) throw std::invalid_argument("grid: CFL in (0,1) required");
    if (dr <= 0 || r_max <= 0 || t_final < 0) throw std::invalid_argument("grid: bad sizes");
    SpacetimeGrid g;
    g.r_max = r_max;
    g.dr = dr;
    g.t_final = t_final;
    g.J = static_cast<int>(std::ceil(r_max / dr));
    if (t_final == 0) {
      g.dt = c_cfl * dr;
      g.n_steps = 0;
    } else {
      g.n_steps = static_cast<int>(std::ceil(t_final / (c_cfl * dr)));
      g.dt = t_final / g.n_steps;
    }
    return g;
  }

  double t(int n) const { return n * dt; }
  double r(int j) const { return j * dr; }
};

/// Recorded radial field u(t_n, r_j). Internally the solvers march v = r*u;
/// this record stores u itself.
class GridField {
public:
  GridField() = default;
  GridField(const SpacetimeGrid& g, int n_rows) : g_(g), rows_(n_rows), data_(static_cast<size_t>(n_rows) * (g.J + 1), 0.0) {}

  const SpacetimeGrid& grid() const { return g_; }
  int rows() const { return rows_; }

  double& at(int n, int j) { return data_[static_cast<size_t>(n) * (g_.J + 1) + j]; }
  double at(int n, int j) const { return data_[static_cast<size_t>(n) * (g_.J + 1) + j]; }
  const double* row(int n) const { return data_.data() + static_cast<size_t>(n) * (g_.J + 1); }
  double* row(int n) { return data_.data() + static_cast<size_t>(n) * (g_.J + 1); }

  /// Centered time derivative, one-sided at the record edges. O(dt^2).
  double dt(int n, int j) const {
    const double h = g_.dt;
    if (n == 0) return (-3 * at(0, j) + 4 * at(1, j) - at(2, j)) / (2 * h);
    if (n == rows_ - 1) return (3 * at(n, j) - 4 * at(n - 1, j) + at(n - 2, j)) / (2 * h);
    return (at(n + 1, j) - at(n - 1, j)) / (2 * h);
  }
  double dr(int n, int j) const {
    const double h = g_.dr;
    if (j == 0) return (-3 * at(n, 0) + 4 * at(n, 1) - at(n, 2)) / (2 * h);
    if (j == g_.J) return (3 * at(n, j) - 4 * at(n, j - 1) + at(n, j - 2)) / (2 * h);
    return (at(n, j + 1) - at(n, j - 1)) / (2 * h);
  }

  /// Cubic interpolation in r along a stored row.
  double interp_r(int n, double r) const {
    return interp1(row(n), g_.J + 1, r / g_.dr);
  }

  /// Bicubic interpolation in (t, r) over the record.
  double interp(double t, double r) const {
    double x = t / g_.dt;
    int n0 = static_cast<int>(std::floor(x));
    if (n0 < 1) n0 = 1;
    if (n0 > rows_ - 3) n0 = rows_ - 3;
    double s = x - n0;
    double vals[4];
    for (int d = -1; d <= 2; ++d) vals[d + 1] = interp_r(n0 + d, r);
    return cubic(vals, s);
  }

  static double cubic(const double v[4], double s) {
    // Lagrange cubic through v[0..3] at nodes s = -1,0,1,2; exact at the
    // nodes, so edge cells (s outside [0,1]) stay interpolating.
    double w0 = -s * (s - 1) * (s - 2) / 6.0;
    double w1 = (s + 1) * (s - 1) * (s - 2) / 2.0;
    double w2 = -(s + 1) * s * (s - 2) / 2.0;
    double w3 = (s + 1) * s * (s - 1) / 6.0;
    return w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3];
  }

  static double interp1(const double* row, int len, double x) {
    int j0 = static_cast<int>(std::floor(x));
    if (j0 < 1) j0 = 1;
    if (j0 > len - 3) j0 = len - 3;
    double s = x - j0;
    double v[4] = {row[j0 - 1], row[j0], row[j0 + 1], row[j0 + 2]};
    return cubic(v, s);
  }

  void export_csv(const std::string& path, int stride_n = 1, int stride_j = 1) const;
  void export_binary(const std::string& path) const;

private:
  SpacetimeGrid g_;
  int rows_ = 0;
  std::vector<double> data_;
};

inline void GridField::export_csv(const std::string& path, int stride_n, int stride_j) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,r,u\n";
  os.precision(17);
  for (int n = 0; n < rows_; n += stride_n)
    for (int j = 0; j <= g_.J; j += stride_j)
      os << g_.t(n) << "," << g_.r(j) << "," << at(n, j) << "\n";
}

inline void GridField::export_binary(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  const char magic[4] = {'H', 'F', 'W', 'B'};
  os.write(magic, 4);
  std::int64_t dims[2] = {rows_, g_.J + 1};
  double meta[3] = {g_.dt, g_.dr, 0.0};
  os.write(reinterpret_cast<const char*>(dims), sizeof dims);
  os.write(reinterpret_cast<const char*>(meta), sizeof meta);
  os.write(reinterpret_cast<const char*>(data_.data()),
           static_cast<std::streamsize>(data_.size() * sizeof(double)));
}

}  // namespace hfwave
