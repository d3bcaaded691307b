#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "helmdd/core.hpp"

namespace helmdd {

/// Quadrature node on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
struct TriQuadPoint {
  double xi;
  double eta;
  double weight;  // reference-triangle weights, sum to 1/2
};

namespace detail {

inline void push_symmetric3(std::vector<TriQuadPoint>& q, double a, double w) {
  // barycentric (1-2a, a, a) and permutations, mapped to (xi, eta) = (l2, l3)
  q.push_back({a, a, w});
  q.push_back({1.0 - 2.0 * a, a, w});
  q.push_back({a, 1.0 - 2.0 * a, w});
}

inline void push_symmetric6(std::vector<TriQuadPoint>& q, double a, double b, double w) {
  const double c = 1.0 - a - b;
  q.push_back({a, b, w});
  q.push_back({b, a, w});
  q.push_back({a, c, w});
  q.push_back({c, a, w});
  q.push_back({b, c, w});
  q.push_back({c, b, w});
}

}  // namespace detail

/// Symmetric Gauss rule of polynomial exactness degree 4 (6 points).
inline const std::vector<TriQuadPoint>& tri_rule_degree4() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> q;
    detail::push_symmetric3(q, 0.445948490915965, 0.5 * 0.223381589678011);
    detail::push_symmetric3(q, 0.091576213509771, 0.5 * 0.109951743655322);
    return q;
  }();
  return rule;
}

/// Symmetric Gauss rule of polynomial exactness degree 6 (12 points).
inline const std::vector<TriQuadPoint>& tri_rule_degree6() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> q;
    detail::push_symmetric3(q, 0.249286745170910, 0.5 * 0.116786275726379);
    detail::push_symmetric3(q, 0.063089014491502, 0.5 * 0.050844906370207);
    detail::push_symmetric6(q, 0.310352451033785, 0.053145049844816,
                            0.5 * 0.082851075618374);
    return q;
  }();
  return rule;
}

/// Fixed assembly rule per FE degree: exactness >= 2p+2, needed because
/// coefficients and cutoffs are not polynomial.
inline const std::vector<TriQuadPoint>& tri_rule_for_degree(int p) {
  HELMDD_REQUIRE(p == 1 || p == 2, "quadrature: unsupported FE degree");
  return p == 1 ? tri_rule_degree4() : tri_rule_degree6();
}

/// Composite rule: the degree-6 rule on each of the 4 red-refined children.
/// Used for measurement integrals involving cutoff functions, whose
/// breakpoints fall inside elements.
inline const std::vector<TriQuadPoint>& tri_rule_composite() {
  static const std::vector<TriQuadPoint> rule = [] {
    std::vector<TriQuadPoint> q;
    const auto& base = tri_rule_degree6();
    // children of the reference triangle under midpoint refinement
    const std::array<std::array<Point, 3>, 4> children = {{
        {{Point(0.0, 0.0), Point(0.5, 0.0), Point(0.0, 0.5)}},
        {{Point(0.5, 0.0), Point(1.0, 0.0), Point(0.5, 0.5)}},
        {{Point(0.0, 0.5), Point(0.5, 0.5), Point(0.0, 1.0)}},
        {{Point(0.5, 0.5), Point(0.0, 0.5), Point(0.5, 0.0)}},
    }};
    for (const auto& ch : children) {
      for (const auto& pt : base) {
        const Point x = ch[0] + pt.xi * (ch[1] - ch[0]) + pt.eta * (ch[2] - ch[0]);
        q.push_back({x.x(), x.y(), 0.25 * pt.weight});
      }
    }
    return q;
  }();
  return rule;
}

/// Gauss-Legendre node on [0,1].
struct EdgeQuadPoint {
  double t;
  double weight;  // weights sum to 1
};

inline const std::vector<EdgeQuadPoint>& edge_rule_3pt() {
  static const std::vector<EdgeQuadPoint> rule = [] {
    const double s = std::sqrt(3.0 / 5.0);
    return std::vector<EdgeQuadPoint>{
        {0.5 * (1.0 - s), 5.0 / 18.0},
        {0.5, 8.0 / 18.0},
        {0.5 * (1.0 + s), 5.0 / 18.0},
    };
  }();
  return rule;
}

inline const std::vector<EdgeQuadPoint>& edge_rule_4pt() {
  static const std::vector<EdgeQuadPoint> rule = [] {
    const double x1 = 0.3399810435848563;
    const double x2 = 0.8611363115940526;
    const double w1 = 0.6521451548625461;
    const double w2 = 0.3478548451374538;
    return std::vector<EdgeQuadPoint>{
        {0.5 * (1.0 - x2), 0.5 * w2},
        {0.5 * (1.0 - x1), 0.5 * w1},
        {0.5 * (1.0 + x1), 0.5 * w1},
        {0.5 * (1.0 + x2), 0.5 * w2},
    };
  }();
  return rule;
}

inline const std::vector<EdgeQuadPoint>& edge_rule_for_degree(int p) {
  HELMDD_REQUIRE(p == 1 || p == 2, "quadrature: unsupported FE degree");
  return p == 1 ? edge_rule_3pt() : edge_rule_4pt();
}

}  // namespace helmdd
