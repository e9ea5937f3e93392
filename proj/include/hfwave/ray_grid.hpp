#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfwave/grid.hpp"

namespace hfwave {

/// Characteristic grid: outgoing rays q = r - t = const, sampled uniformly in
/// q over the cutoff band [1/(2R), 2R] (with margin) and uniformly in t.
/// A point (t_n, q_m) sits at radius r = q_m + t_n, so r >= q_lo > 0 always.
struct RayGrid {
  double q_lo = 0, dq = 0;
  double dt = 0;
  int M = 0;        // q_m = q_lo + m*dq, m = 0..M
  int n_steps = 0;  // t_n = n*dt

  static RayGrid make(double R, double dq, double t_final, double dt) {
    if (dq <= 0 || dt <= 0) throw std::invalid_argument("RayGrid: bad steps");
    RayGrid g;
    g.q_lo = 0.5 / R - 2 * dq;
    g.dq = dq;
    double q_hi = 2.0 * R + 2 * dq;
    g.M = static_cast<int>(std::ceil((q_hi - g.q_lo) / dq));
    g.n_steps = static_cast<int>(std::ceil(t_final / dt));
    g.dt = dt;
    return g;
  }

  double q(int m) const { return q_lo + m * dq; }
  double t(int n) const { return n * dt; }
  double r(int n, int m) const { return q(m) + t(n); }
};

/// Field sampled on a RayGrid, value(n, m) at (t_n, q_m).
class RayField {
public:
  RayField() = default;
  RayField(const RayGrid& g, int n_rows)
      : g_(g), rows_(n_rows), data_(static_cast<size_t>(n_rows) * (g.M + 1), 0.0) {}

  const RayGrid& grid() const { return g_; }
  int rows() const { return rows_; }
  bool empty() const { return data_.empty(); }

  double& at(int n, int m) { return data_[static_cast<size_t>(n) * (g_.M + 1) + m]; }
  double at(int n, int m) const { return data_[static_cast<size_t>(n) * (g_.M + 1) + m]; }
  const double* row(int n) const { return data_.data() + static_cast<size_t>(n) * (g_.M + 1); }

  /// Cubic interpolation in q along a row; zero outside the band.
  double interp_q(int n, double q) const {
    double x = (q - g_.q_lo) / g_.dq;
    if (x < 0 || x > g_.M) return 0.0;
    return GridField::interp1(row(n), g_.M + 1, x);
  }

  /// Bicubic interpolation in (t, q); rows must cover t.
  double interp(double t, double q) const {
    double xn = t / g_.dt;
    int n0 = static_cast<int>(std::floor(xn));
    if (n0 < 1) n0 = 1;
    if (n0 > rows_ - 3) n0 = rows_ - 3;
    double s = xn - n0;
    double v[4];
    for (int d = -1; d <= 2; ++d) v[d + 1] = interp_q(n0 + d, q);
    return GridField::cubic(v, s);
  }

  /// d/dq along a row by centered differences.
  double dq(int n, int m) const {
    if (m == 0) return (at(n, 1) - at(n, 0)) / g_.dq;
    if (m == g_.M) return (at(n, m) - at(n, m - 1)) / g_.dq;
    return (at(n, m + 1) - at(n, m - 1)) / (2 * g_.dq);
  }
  /// d/dt at fixed q (i.e. along the ray: this is (∂_t + ∂_r) of the field).
  double dt_ray(int n, int m) const {
    if (n == 0) return (-3 * at(0, m) + 4 * at(1, m) - at(2, m)) / (2 * g_.dt);
    if (n == rows_ - 1) return (3 * at(n, m) - 4 * at(n - 1, m) + at(n - 2, m)) / (2 * g_.dt);
    return (at(n + 1, m) - at(n - 1, m)) / (2 * g_.dt);
  }

  void export_csv(const std::string& path, int stride_n = 1) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "t,q,r,value\n";
    os.precision(17);
    for (int n = 0; n < rows_; n += stride_n)
      for (int m = 0; m <= g_.M; ++m)
        os << g_.t(n) << "," << g_.q(m) << "," << g_.r(n, m) << "," << at(n, m) << "\n";
  }

  void export_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    const char magic[4] = {'H', 'F', 'R', 'B'};
    os.write(magic, 4);
    std::int64_t dims[2] = {rows_, g_.M + 1};
    double meta[3] = {g_.dt, g_.dq, g_.q_lo};
    os.write(reinterpret_cast<const char*>(dims), sizeof dims);
    os.write(reinterpret_cast<const char*>(meta), sizeof meta);
    os.write(reinterpret_cast<const char*>(data_.data()),
             static_cast<std::streamsize>(data_.size() * sizeof(double)));
  }

private:
  RayGrid g_;
  int rows_ = 0;
  std::vector<double> data_;
};

}  // namespace hfwave
