#pragma once

// Affine k-flats in R^d: canonical representation, closest points, subspace
// determinants and Haar sampling on the Grassmannian.
//
// All storage uses Eigen's fixed-capacity dynamic matrices so that the
// pairwise-distance core never touches the heap.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "flatprox/errors.hpp"

namespace flatprox {

inline constexpr int kMaxAmbientDim = 16;
inline constexpr int kMaxFlatDim = 7;  // k < d/2 <= 8
inline constexpr double kGeneralPositionTol = 1e-9;

template <typename Scalar>
using PointX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxAmbientDim, 1>;
template <typename Scalar>
using BasisX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim, kMaxFlatDim>;
template <typename Scalar>
using FrameX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbientDim, kMaxAmbientDim>;
template <typename Scalar>
using SmallX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxFlatDim, kMaxFlatDim>;
template <typename Scalar>
using CoeffX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxFlatDim, 1>;

/// A k-dimensional affine subspace M + anchor of R^d.
///
/// Stored canonically: the basis columns are orthonormal and the anchor is the
/// foot point of the origin on the flat, i.e. it lies in the orthogonal
/// complement of the direction space. Instances are immutable.
template <typename Scalar>
class AffineFlat {
 public:
  using Point = PointX<Scalar>;
  using Basis = BasisX<Scalar>;

  AffineFlat() = default;

  /// Wraps an already canonical (basis, anchor) pair without re-orthonormalizing.
  static AffineFlat from_canonical(Basis basis, Point anchor) {
    AffineFlat f;
    f.basis_ = std::move(basis);
    f.anchor_ = std::move(anchor);
    return f;
  }

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int flat_dim() const { return static_cast<int>(basis_.cols()); }
  const Basis& basis() const { return basis_; }
  const Point& anchor() const { return anchor_; }

  /// Distance from the origin to the flat.
  Scalar offset_norm() const { return anchor_.norm(); }

  /// Direction space as a flat through the origin.
  AffineFlat direction() const {
    return from_canonical(basis_, Point::Zero(ambient_dim()));
  }

  AffineFlat translated(const Point& v) const {
    Point a = anchor_ + v;
    a.noalias() -= basis_ * (basis_.transpose() * a);
    return from_canonical(basis_, std::move(a));
  }

  /// Image under an orthogonal map R (d x d).
  template <typename Derived>
  AffineFlat rotated(const Eigen::MatrixBase<Derived>& R) const {
    Basis b = R * basis_;
    Point a = R * anchor_;
    return from_canonical(std::move(b), std::move(a));
  }

 private:
  Basis basis_;
  Point anchor_;
};

using AffineFlatd = AffineFlat<double>;

/// Unique closest pair of two flats in general position.
template <typename Scalar>
struct ClosestPair {
  PointX<Scalar> point_on_first;
  PointX<Scalar> point_on_second;
  Scalar distance{0};
  PointX<Scalar> midpoint;
};

using ClosestPaird = ClosestPair<double>;

/// Orthonormalizes `basis` and moves `any_point` to the foot of the origin.
/// Throws DegenerateInput for a rank-deficient basis.
template <typename Scalar, typename DerivedB, typename DerivedP>
AffineFlat<Scalar> canonicalize(const Eigen::MatrixBase<DerivedB>& basis,
                                const Eigen::MatrixBase<DerivedP>& any_point) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index k = basis.cols();
  if (d < 1 || k < 1 || d > kMaxAmbientDim || k > kMaxFlatDim || k > d)
    throw DegenerateInput("basis shape out of range");
  if (any_point.size() != d) throw DegenerateInput("point dimension does not match basis");

  FrameX<Scalar> raw = basis.template cast<Scalar>();
  Eigen::HouseholderQR<FrameX<Scalar>> qr(raw);
  const auto& R = qr.matrixQR();
  const Scalar scale = std::max<Scalar>(Scalar(1), raw.norm());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(std::abs(R(i, i)) > Scalar(1e-12) * scale))
      throw DegenerateInput("basis columns are linearly dependent");
  }
  BasisX<Scalar> q = qr.householderQ() * FrameX<Scalar>::Identity(d, k);
  PointX<Scalar> a = any_point.template cast<Scalar>();
  a.noalias() -= q * (q.transpose() * a);
  return AffineFlat<Scalar>::from_canonical(std::move(q), std::move(a));
}

/// Orthonormal basis (d x (d - k)) of the orthogonal complement of span(basis).
template <typename Scalar, typename Derived>
FrameX<Scalar> orthogonal_complement(const Eigen::MatrixBase<Derived>& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index k = basis.cols();
  FrameX<Scalar> raw = basis.template cast<Scalar>();
  Eigen::HouseholderQR<FrameX<Scalar>> qr(raw);
  FrameX<Scalar> full = qr.householderQ();
  return full.rightCols(d - k);
}

/// Gram matrix G = B_M^T B_L between two orthonormal bases.
template <typename Scalar>
SmallX<Scalar> cross_gram(const AffineFlat<Scalar>& M, const AffineFlat<Scalar>& L) {
  return M.basis().transpose().lazyProduct(L.basis());
}

/// R^T R with R = B_L - B_M G, the part of B_L orthogonal to M. Equal to
/// I - G^T G but without the cancellation when the spaces nearly coincide.
template <typename Scalar>
SmallX<Scalar> residual_gram(const BasisX<Scalar>& BM, const BasisX<Scalar>& BL,
                             const SmallX<Scalar>& G) {
  BasisX<Scalar> R = BL;
  R.noalias() -= BM.lazyProduct(G);
  return R.transpose().lazyProduct(R);
}

/// [M, L] = sqrt(det(I - G^T G)); depends only on the direction spaces.
template <typename Scalar>
Scalar subspace_determinant(const AffineFlat<Scalar>& M, const AffineFlat<Scalar>& L) {
  if (M.ambient_dim() != L.ambient_dim()) throw DegenerateInput("ambient dimensions differ");
  if (M.flat_dim() + L.flat_dim() > M.ambient_dim())
    throw DegenerateInput("flat dimensions exceed ambient dimension");
  const SmallX<Scalar> G = cross_gram(M, L);
  const SmallX<Scalar> A = residual_gram(M.basis(), L.basis(), G);
  const Scalar det = A.determinant();
  return det > Scalar(0) ? std::min<Scalar>(Scalar(1), std::sqrt(det)) : Scalar(0);
}

template <typename Scalar>
bool general_position(const AffineFlat<Scalar>& E, const AffineFlat<Scalar>& F,
                      Scalar tol = Scalar(kGeneralPositionTol)) {
  return subspace_determinant(E, F) > tol;
}

/// Closest points, or nullopt when [E, F] <= tol.
///
/// Minimizes |a_E + B_E alpha - a_F - B_F beta|^2 by eliminating alpha from
/// the normal equations; the remaining k x k system has matrix I - G^T G
/// (formed as R^T R), whose determinant is [E, F]^2.
template <typename Scalar>
std::optional<ClosestPair<Scalar>> try_closest_points(const AffineFlat<Scalar>& E,
                                                      const AffineFlat<Scalar>& F,
                                                      Scalar tol = Scalar(kGeneralPositionTol)) {
  const auto& BE = E.basis();
  const auto& BF = F.basis();
  const SmallX<Scalar> G = BE.transpose().lazyProduct(BF);
  const SmallX<Scalar> A = residual_gram(BE, BF, G);

  Eigen::LDLT<SmallX<Scalar>> ldlt(A);
  const Scalar det = ldlt.vectorD().prod();
  if (!(det > tol * tol)) return std::nullopt;

  const PointX<Scalar> w = E.anchor() - F.anchor();
  const CoeffX<Scalar> p = BE.transpose().lazyProduct(w);
  const CoeffX<Scalar> q = BF.transpose().lazyProduct(w);
  const CoeffX<Scalar> rhs = q - G.transpose().lazyProduct(p);
  const CoeffX<Scalar> beta = ldlt.solve(rhs);
  const CoeffX<Scalar> alpha = G.lazyProduct(beta) - p;

  ClosestPair<Scalar> out;
  out.point_on_first = E.anchor() + BE.lazyProduct(alpha);
  out.point_on_second = F.anchor() + BF.lazyProduct(beta);
  out.distance = (out.point_on_first - out.point_on_second).norm();
  out.midpoint = Scalar(0.5) * (out.point_on_first + out.point_on_second);
  return out;
}

/// Closest points; throws ParallelFlats when the pair is not in general position.
template <typename Scalar>
ClosestPair<Scalar> closest_points(const AffineFlat<Scalar>& E, const AffineFlat<Scalar>& F,
                                   Scalar tol = Scalar(kGeneralPositionTol)) {
  if (E.ambient_dim() != F.ambient_dim()) throw DegenerateInput("ambient dimensions differ");
  if (E.flat_dim() + F.flat_dim() > E.ambient_dim())
    throw DegenerateInput("flat dimensions exceed ambient dimension");
  auto cp = try_closest_points(E, F, tol);
  if (!cp) {
    std::ostringstream msg;
    msg << "flats are not in general position (subspace determinant <= " << tol << ")";
    throw ParallelFlats(msg.str());
  }
  return *std::move(cp);
}

/// Standard Gaussian d x k matrix.
template <typename Scalar, typename Urbg>
FrameX<Scalar> gaussian_frame(int d, int k, Urbg& rng) {
  std::normal_distribution<Scalar> normal;
  FrameX<Scalar> g(d, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  return g;
}

/// Direction space drawn from the Haar measure on the Grassmannian G(d, k),
/// by orthonormalizing a Gaussian matrix. Anchor is the origin.
template <typename Scalar, typename Urbg>
AffineFlat<Scalar> haar_grassmannian_sample(int d, int k, Urbg& rng) {
  if (k < 1 || 2 * k >= d || d > kMaxAmbientDim)
    throw DegenerateInput("Grassmannian sampling requires 1 <= k < d/2");
  const PointX<Scalar> origin = PointX<Scalar>::Zero(d);
  for (;;) {
    try {
      return canonicalize<Scalar>(gaussian_frame<Scalar>(d, k, rng), origin);
    } catch (const DegenerateInput&) {
      // rank-deficient draw, probability zero
    }
  }
}

/// Uniform point in the n-dimensional unit ball.
template <typename Scalar, typename Urbg>
PointX<Scalar> uniform_in_unit_ball(int n, Urbg& rng) {
  std::normal_distribution<Scalar> normal;
  std::uniform_real_distribution<Scalar> unif(Scalar(0), Scalar(1));
  PointX<Scalar> v(n);
  Scalar norm = 0;
  do {
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (!(norm > Scalar(0)));
  const Scalar radius = std::pow(unif(rng), Scalar(1) / Scalar(n));
  return v * (radius / norm);
}

}  // namespace flatprox
