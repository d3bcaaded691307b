#pragma once

#include <cmath>
#include <functional>
#include <set>

#include "helmdd/mesh.hpp"

namespace helmdd {

using ScalarField = std::function<cplx(const Point&)>;
using MatrixField = std::function<Eigen::Matrix2cd(const Point&)>;
using VectorField = std::function<Eigen::Vector2cd(const Point&)>;

/// Coefficients of the sesquilinear form
///   a(u,v) = int k^-2 (A grad u).conj(grad v) + k^-1 (B.grad u) conj(v)
///          + k^-1 u (Bt.conj(grad v)) - mass u conj(v)
///          - i k^-1 int_bnd theta u conj(v),
/// where mass(x) plays the role of c(x)^-2. The Bt slot carries the
/// transposed convection term that appears in adjoint forms; it is zero for
/// the primal problems.
struct CoefficientSet {
  MatrixField a = [](const Point&) { return Eigen::Matrix2cd::Identity().eval(); };
  VectorField b = [](const Point&) { return Eigen::Vector2cd::Zero().eval(); };
  VectorField bt = [](const Point&) { return Eigen::Vector2cd::Zero().eval(); };
  ScalarField mass = [](const Point&) { return cplx(1.0, 0.0); };
  ScalarField theta = [](const Point&) { return cplx(1.0, 0.0); };
  double k = 1.0;
};

inline CoefficientSet constant_coefficients(double k, cplx mass = 1.0, cplx theta = 1.0) {
  CoefficientSet cs;
  cs.k = k;
  cs.mass = [mass](const Point&) { return mass; };
  cs.theta = [theta](const Point&) { return theta; };
  return cs;
}

/// Coefficients of the adjoint form a*(u,v) = conj(a(v,u)): A -> A^H,
/// the convection term moves to the transposed slot with conjugated B,
/// mass -> conj(mass), theta -> -conj(theta).
inline CoefficientSet adjoint_coefficients(const CoefficientSet& cs) {
  CoefficientSet out;
  out.k = cs.k;
  out.a = [a = cs.a](const Point& x) { return a(x).adjoint().eval(); };
  out.b = [bt = cs.bt](const Point& x) { return bt(x).conjugate().eval(); };
  out.bt = [b = cs.b](const Point& x) { return b(x).conjugate().eval(); };
  out.mass = [m = cs.mass](const Point& x) { return std::conj(m(x)); };
  out.theta = [t = cs.theta](const Point& x) { return -std::conj(t(x)); };
  return out;
}

enum class TruncationMode { impedance, cartesian_pml };

/// Problem-level choices: domain truncation and the matching local boundary
/// handling on the subdomain cuts.
struct ProblemConfig {
  TruncationMode mode = TruncationMode::impedance;
  double pml_width = 0.0;
  double pml_strength = 0.0;

  bool global_dirichlet() const { return mode == TruncationMode::cartesian_pml; }
  bool local_dirichlet_cuts() const { return mode == TruncationMode::cartesian_pml; }
  bool has_boundary_term() const { return mode == TruncationMode::impedance; }

  std::set<Side> dirichlet_sides() const {
    if (!global_dirichlet()) return {};
    return {Side::bottom, Side::right, Side::top, Side::left};
  }
};

/// Cartesian PML through complex coordinate stretching s_j = 1 + (i/k) sigma_j
/// with a quadratic ramp sigma supported in a layer of width w inside each
/// side: A = diag(s2/s1, s1/s2), B = 0, mass = s1 s2. Outside the layer the
/// coefficients equal the unstretched ones.
inline CoefficientSet pml_coefficients(const Rect& domain, double k, double width,
                                       double strength) {
  HELMDD_REQUIRE(width > 0.0, "pml: layer width must be positive");
  HELMDD_REQUIRE(strength >= 0.0, "pml: strength must be nonnegative");
  HELMDD_REQUIRE(2.0 * width < std::min(domain.width(), domain.height()),
                 "pml: layer overlaps the physical region of interest");
  auto sigma1 = [=](double x) -> double {
    const double dl = (domain.x0 + width) - x;
    const double dr = x - (domain.x1 - width);
    const double d = std::max(dl, dr);
    if (d <= 0.0) return 0.0;
    const double t = d / width;
    return strength * t * t;
  };
  auto sigma2 = [=](double y) -> double {
    const double db = (domain.y0 + width) - y;
    const double dt = y - (domain.y1 - width);
    const double d = std::max(db, dt);
    if (d <= 0.0) return 0.0;
    const double t = d / width;
    return strength * t * t;
  };
  CoefficientSet cs;
  cs.k = k;
  cs.a = [=](const Point& x) {
    const cplx s1 = 1.0 + iu / k * sigma1(x.x());
    const cplx s2 = 1.0 + iu / k * sigma2(x.y());
    Eigen::Matrix2cd a = Eigen::Matrix2cd::Zero();
    a(0, 0) = s2 / s1;
    a(1, 1) = s1 / s2;
    return a;
  };
  cs.mass = [=](const Point& x) {
    const cplx s1 = 1.0 + iu / k * sigma1(x.x());
    const cplx s2 = 1.0 + iu / k * sigma2(x.y());
    return s1 * s2;
  };
  cs.theta = [](const Point&) { return cplx(0.0, 0.0); };
  return cs;
}

}  // namespace helmdd
