// Copyright 2026 The ddrf-register Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DDRF_SPINALG_HPP
#define DDRF_SPINALG_HPP

// Dense complex matrices sized for spin registers (dimension <= 16), spin-1/2
// operators, SU(2) rotations and closed-form 2x2 exponentials.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddrf {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("CMatrix dimensions must be positive");
    }
  }
  /// Row-major nested initializer: CMatrix{{a, b}, {c, d}}.
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) {
      throw std::invalid_argument("CMatrix dimensions must be positive");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw std::invalid_argument("ragged CMatrix initializer");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static CMatrix zeros(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<cplx>& data() const { return data_; }

  CMatrix dagger() const {
    CMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    }
    return out;
  }

  cplx trace() const {
    if (!is_square()) throw std::invalid_argument("trace of non-square matrix");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, double s) { return a *= cplx{s, 0.0}; }
  friend CMatrix operator*(double s, CMatrix a) { return a *= cplx{s, 0.0}; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_) {
      throw std::invalid_argument("matrix product dimension mismatch: " + a.shape() + " * " +
                                  b.shape());
    }
    CMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    }
    return out;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

  std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

 private:
  void require_same_shape(const CMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw std::invalid_argument("shape mismatch: " + shape() + " vs " + o.shape());
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("shape mismatch: " + a.shape() + " vs " + b.shape());
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

inline double max_abs(const CMatrix& a) {
  double m = 0.0;
  for (const auto& v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

/// max |(U^dagger U - 1)_ij|; zero for an exactly unitary matrix.
inline double unitarity_defect(const CMatrix& u) {
  if (!u.is_square()) return INFINITY;
  return max_abs_diff(u.dagger() * u, CMatrix::identity(u.rows()));
}

inline bool is_unitary(const CMatrix& u, double tol = 1e-10) { return unitarity_defect(u) <= tol; }

inline bool is_hermitian(const CMatrix& h, double tol = 1e-10) {
  return h.is_square() && max_abs_diff(h, h.dagger()) <= tol;
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k) {
        for (std::size_t l = 0; l < b.cols(); ++l) {
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
      }
    }
  }
  return out;
}

template <typename... Rest>
CMatrix kron(const CMatrix& a, const CMatrix& b, const Rest&... rest) {
  return kron(kron(a, b), rest...);
}

/// Left-to-right Kronecker product of a non-empty list.
inline CMatrix kron_all(const std::vector<CMatrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all of empty list");
  CMatrix out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

struct SpinHalfOps {
  CMatrix ix;
  CMatrix iy;
  CMatrix iz;
};

inline SpinHalfOps spin_half_ops() {
  return {
      CMatrix{{0.0, 0.5}, {0.5, 0.0}},
      CMatrix{{0.0, -0.5 * kI}, {0.5 * kI, 0.0}},
      CMatrix{{0.5, 0.0}, {0.0, -0.5}},
  };
}

/// n . I for a real 3-vector n (not necessarily unit).
inline CMatrix spin_component(const Vec3& n) {
  return CMatrix{{0.5 * n[2], 0.5 * cplx{n[0], -n[1]}}, {0.5 * cplx{n[0], n[1]}, -0.5 * n[2]}};
}

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

inline constexpr Vec3 kXAxis{1.0, 0.0, 0.0};
inline constexpr Vec3 kYAxis{0.0, 1.0, 0.0};
inline constexpr Vec3 kZAxis{0.0, 0.0, 1.0};

/// exp(-i theta axis.I) = cos(theta/2) 1 - i sin(theta/2) axis.sigma
inline CMatrix rot(const Vec3& axis, double theta) {
  if (std::abs(norm3(axis) - 1.0) > 1e-12) {
    throw std::invalid_argument("rotation axis must have unit norm");
  }
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  return CMatrix{{cplx{c, -s * axis[2]}, cplx{-s * axis[1], -s * axis[0]}},
                 {cplx{s * axis[1], -s * axis[0]}, cplx{c, s * axis[2]}}};
}

/// exp(-i H t) for 2x2 Hermitian H, via H = a0 1 + a.sigma.
inline CMatrix expm_herm2(const CMatrix& h, double t) {
  if (h.rows() != 2 || h.cols() != 2) throw std::invalid_argument("expm_herm2 needs a 2x2 matrix");
  if (!is_hermitian(h, 1e-10 * std::max(1.0, max_abs(h)))) {
    throw std::invalid_argument("expm_herm2 needs a Hermitian matrix");
  }
  const double a0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
  const double ax = 0.5 * (h(0, 1).real() + h(1, 0).real());
  const double ay = 0.5 * (h(1, 0).imag() - h(0, 1).imag());
  const double az = 0.5 * (h(0, 0).real() - h(1, 1).real());
  const double a = std::sqrt(ax * ax + ay * ay + az * az);
  const cplx phase = std::exp(-kI * (a0 * t));
  const double c = std::cos(a * t);
  // sin(a t)/a, finite at a = 0
  const double sa = a * std::abs(t) < 1e-8 ? t * (1.0 - (a * t) * (a * t) / 6.0) : std::sin(a * t) / a;
  CMatrix u{{cplx{c, -sa * az}, cplx{-sa * ay, -sa * ax}}, {cplx{sa * ay, -sa * ax}, cplx{c, sa * az}}};
  return u * phase;
}

struct AxisAngle {
  Vec3 axis = kZAxis;
  double angle = 0.0;
  double global_phase = 0.0;

  /// exp(i global_phase) rot(axis, angle)
  CMatrix to_matrix() const { return rot(axis, angle) * std::exp(kI * global_phase); }
};

namespace detail {
inline double wrap_pi(double x) {
  double r = std::remainder(x, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}
}  // namespace detail

/// Decompose a 2x2 unitary into rotation axis, angle in [0, pi] and global
/// phase. Zero rotations report the z axis; at angle pi the first nonzero axis
/// component is made positive.
inline AxisAngle axis_angle_of(const CMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2) throw std::invalid_argument("axis_angle_of needs a 2x2 matrix");
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("axis_angle_of needs a unitary matrix");
  const cplx det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  double gamma = 0.5 * std::arg(det);
  cplx unphase = std::exp(-kI * gamma);
  if ((u.trace() * unphase).real() < 0.0) {
    gamma += kPi;
    unphase = -unphase;
  }
  const CMatrix v = u * unphase;  // in SU(2), Re tr >= 0
  const double c = 0.5 * v.trace().real();
  const Vec3 sn{-0.5 * (v(0, 1) + v(1, 0)).imag(), 0.5 * (v(1, 0) - v(0, 1)).real(),
                -0.5 * (v(0, 0) - v(1, 1)).imag()};
  const double s = norm3(sn);
  AxisAngle out;
  if (s < 1e-15) {
    out.axis = kZAxis;
    out.angle = 0.0;
  } else {
    out.axis = {sn[0] / s, sn[1] / s, sn[2] / s};
    out.angle = 2.0 * std::atan2(s, c);
  }
  if (std::abs(out.angle - kPi) < 1e-12) {
    out.angle = kPi;
    const auto first = std::find_if(out.axis.begin(), out.axis.end(),
                                    [](double x) { return std::abs(x) > 1e-12; });
    if (first != out.axis.end() && *first < 0.0) {
      for (auto& x : out.axis) x = -x;
      gamma += kPi;
    }
  }
  out.global_phase = detail::wrap_pi(gamma);
  return out;
}

/// Column vector helpers for 2-level states.
using State2 = std::array<cplx, 2>;

inline State2 apply_to(const CMatrix& u, const State2& psi) {
  if (u.rows() != 2 || u.cols() != 2) throw std::invalid_argument("apply needs a 2x2 matrix");
  return {u(0, 0) * psi[0] + u(0, 1) * psi[1], u(1, 0) * psi[0] + u(1, 1) * psi[1]};
}

/// <a|b>
inline cplx inner(const State2& a, const State2& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

/// Bloch vector (2<Ix>, 2<Iy>, 2<Iz>) of a normalized state.
inline Vec3 bloch_vector(const State2& psi) {
  const cplx rho01 = psi[0] * std::conj(psi[1]);
  return {2.0 * rho01.real(), -2.0 * rho01.imag(), std::norm(psi[0]) - std::norm(psi[1])};
}

}  // namespace ddrf

#endif  // DDRF_SPINALG_HPP
