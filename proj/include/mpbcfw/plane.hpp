#ifndef MPBCFW_PLANE_HPP
#define MPBCFW_PLANE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpbcfw {

/// A plane (phi_star, phi_offset) in R^(d+1). It represents the affine
/// function w -> <star, w> + offset, i.e. the inner product with [w 1].
template <typename Scalar>
struct Plane {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector star;
  Scalar offset{0};

  Plane() = default;
  Plane(Vector s, Scalar o) : star(std::move(s)), offset(o) {}

  static Plane Zero(Eigen::Index dim) { return Plane(Vector::Zero(dim), Scalar(0)); }

  Eigen::Index dim() const { return star.size(); }

  bool allFinite() const { return star.allFinite() && std::isfinite(offset); }

  Plane& operator+=(const Plane& o) {
    star += o.star;
    offset += o.offset;
    return *this;
  }
  Plane& operator-=(const Plane& o) {
    star -= o.star;
    offset -= o.offset;
    return *this;
  }
  Plane& operator*=(Scalar s) {
    star *= s;
    offset *= s;
    return *this;
  }

  friend Plane operator+(Plane a, const Plane& b) { return a += b; }
  friend Plane operator-(Plane a, const Plane& b) { return a -= b; }
  friend Plane operator*(Scalar s, Plane a) { return a *= s; }
  friend Plane operator*(Plane a, Scalar s) { return a *= s; }

  bool operator==(const Plane& o) const { return offset == o.offset && star == o.star; }
};

using PlaneD = Plane<double>;
using VectorD = Eigen::VectorXd;

namespace detail {
template <typename Scalar>
void require_positive_lambda(Scalar lambda) {
  if (!(lambda > Scalar(0))) throw std::invalid_argument("lambda must be positive");
}
}  // namespace detail

/// <p, [w 1]>
template <typename Scalar, typename Derived>
Scalar evaluate(const Plane<Scalar>& p, const Eigen::MatrixBase<Derived>& w) {
  if (w.size() != p.dim()) throw std::invalid_argument("evaluate: dimension mismatch");
  return p.star.dot(w) + p.offset;
}

/// Closed-form dual bound F(p) = -|p_star|^2 / (2 lambda) + p_offset.
template <typename Scalar>
Scalar dual_bound(const Plane<Scalar>& p, Scalar lambda) {
  detail::require_positive_lambda(lambda);
  return -p.star.squaredNorm() / (Scalar(2) * lambda) + p.offset;
}

/// Minimizer of lambda/2 |w|^2 + <p, [w 1]>.
template <typename Scalar>
typename Plane<Scalar>::Vector weights_of(const Plane<Scalar>& p, Scalar lambda) {
  detail::require_positive_lambda(lambda);
  return -p.star / lambda;
}

/// (1 - gamma) a + gamma b
template <typename Scalar>
Plane<Scalar> interpolate(const Plane<Scalar>& a, const Plane<Scalar>& b, Scalar gamma) {
  return Plane<Scalar>((Scalar(1) - gamma) * a.star + gamma * b.star,
                       (Scalar(1) - gamma) * a.offset + gamma * b.offset);
}

/// Squared direction norms below this are treated as a flat line search.
inline constexpr double kDegenerateDirection = 1e-30;

/// Step size in [0, 1] maximizing F(aggregate - old + (1-gamma) old + gamma new).
/// When the star parts coincide F is linear in gamma: the step is 1 if it
/// strictly raises the offset and 0 otherwise.
template <typename Scalar>
Scalar line_search_gamma(const Plane<Scalar>& old_block, const Plane<Scalar>& new_block,
                         const Plane<Scalar>& aggregate, Scalar lambda) {
  detail::require_positive_lambda(lambda);
  if (old_block.dim() != new_block.dim() || old_block.dim() != aggregate.dim())
    throw std::invalid_argument("line_search_gamma: dimension mismatch");
  const typename Plane<Scalar>::Vector diff = old_block.star - new_block.star;
  const Scalar denom = diff.squaredNorm();
  if (denom < Scalar(kDegenerateDirection))
    return new_block.offset > old_block.offset ? Scalar(1) : Scalar(0);
  const Scalar numer = diff.dot(aggregate.star) - lambda * (old_block.offset - new_block.offset);
  return std::clamp(numer / denom, Scalar(0), Scalar(1));
}

}  // namespace mpbcfw

#endif  // MPBCFW_PLANE_HPP
