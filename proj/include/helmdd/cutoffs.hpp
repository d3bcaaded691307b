#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "helmdd/core.hpp"

namespace helmdd {

/// Polynomial in a local coordinate, ascending powers.
struct Poly {
  std::vector<double> c;

  double eval(double t) const {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
    return v;
  }
  Poly derivative() const {
    if (c.size() <= 1) return Poly{{0.0}};
    Poly d;
    d.c.resize(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d.c[i - 1] = c[i] * static_cast<double>(i);
    return d;
  }
  /// Antiderivative with zero constant term.
  Poly antiderivative() const {
    Poly a;
    a.c.assign(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) a.c[i + 1] = c[i] / static_cast<double>(i + 1);
    return a;
  }
  /// q(t) = this(t + d).
  Poly shifted(double d) const {
    Poly q;
    q.c.assign(c.size(), 0.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
      double binom = 1.0;
      double dp = 1.0;
      for (std::size_t m = 0; m <= n; ++m) {
        q.c[n - m] += c[n] * binom * dp;
        binom = binom * static_cast<double>(n - m) / static_cast<double>(m + 1);
        dp *= d;
      }
    }
    return q;
  }
  Poly operator-(const Poly& o) const {
    Poly r;
    r.c.assign(std::max(c.size(), o.c.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i) r.c[i] -= o.c[i];
    return r;
  }
  Poly operator+(const Poly& o) const {
    Poly r;
    r.c.assign(std::max(c.size(), o.c.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i] += c[i];
    for (std::size_t i = 0; i < o.c.size(); ++i) r.c[i] += o.c[i];
    return r;
  }
  Poly scaled(double s) const {
    Poly r = *this;
    for (double& v : r.c) v *= s;
    return r;
  }
};

/// Piecewise polynomial on the whole line: pieces[0] on (-inf, breaks[0]),
/// pieces[i] on [breaks[i-1], breaks[i]), pieces.back() on [breaks.back(), inf).
/// Each piece is stored in the local coordinate t = x - anchor[i], which
/// keeps evaluation free of the cancellation that global-coordinate
/// coefficients of narrow ramps would suffer.
class PiecewisePoly {
 public:
  PiecewisePoly() : pieces_{Poly{{0.0}}}, anchors_{0.0} {}
  PiecewisePoly(std::vector<double> breaks, std::vector<Poly> pieces,
                std::vector<double> anchors)
      : breaks_(std::move(breaks)), pieces_(std::move(pieces)),
        anchors_(std::move(anchors)) {
    HELMDD_REQUIRE(pieces_.size() == breaks_.size() + 1 &&
                       anchors_.size() == pieces_.size(),
                   "piecewise poly: size mismatch");
  }

  static PiecewisePoly constant(double v) { return PiecewisePoly({}, {Poly{{v}}}, {0.0}); }

  /// Unit step at position c (0 before, 1 after).
  static PiecewisePoly step_up(double c) {
    return PiecewisePoly({c}, {Poly{{0.0}}, Poly{{1.0}}}, {c, c});
  }
  static PiecewisePoly step_down(double c) {
    return PiecewisePoly({c}, {Poly{{1.0}}, Poly{{0.0}}}, {c, c});
  }

  const std::vector<double>& breaks() const { return breaks_; }

  double eval(double x) const {
    const std::size_t i = find(x);
    return pieces_[i].eval(x - anchors_[i]);
  }

  double eval_derivative(double x, int order) const {
    const std::size_t i = find(x);
    Poly q = pieces_[i];
    for (int m = 0; m < order; ++m) q = q.derivative();
    return q.eval(x - anchors_[i]);
  }

  PiecewisePoly derivative() const {
    std::vector<Poly> d;
    d.reserve(pieces_.size());
    for (const auto& q : pieces_) d.push_back(q.derivative());
    return PiecewisePoly(breaks_, d, anchors_);
  }

  PiecewisePoly operator+(const PiecewisePoly& o) const {
    std::vector<double> merged = merge_breaks(breaks_, o.breaks_);
    std::vector<Poly> pieces;
    std::vector<double> anchors;
    pieces.reserve(merged.size() + 1);
    for (std::size_t i = 0; i <= merged.size(); ++i) {
      const double probe = probe_point(merged, i);
      const double anchor = anchor_point(merged, i);
      const std::size_t ia = find(probe);
      const std::size_t ib = o.find(probe);
      pieces.push_back(pieces_[ia].shifted(anchor - anchors_[ia]) +
                       o.pieces_[ib].shifted(anchor - o.anchors_[ib]));
      anchors.push_back(anchor);
    }
    return PiecewisePoly(merged, pieces, anchors);
  }

  /// Convolution with the normalized box of half-width a > 0:
  /// (f * box)(x) = (F(x+a) - F(x-a)) / (2a) with F an antiderivative.
  PiecewisePoly convolve_box(double a) const {
    HELMDD_REQUIRE(a > 0.0, "convolve_box: half-width must be positive");
    // piecewise antiderivative, continuous across breaks
    std::vector<Poly> anti(pieces_.size());
    anti[0] = pieces_[0].antiderivative();
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      anti[i] = pieces_[i].antiderivative();
      const double x = breaks_[i - 1];
      anti[i].c[0] += anti[i - 1].eval(x - anchors_[i - 1]) - anti[i].eval(x - anchors_[i]);
    }
    std::vector<double> shifted;
    shifted.reserve(2 * breaks_.size());
    for (double b : breaks_) {
      shifted.push_back(b - a);
      shifted.push_back(b + a);
    }
    const std::vector<double> merged = merge_breaks(shifted, {});
    std::vector<Poly> pieces;
    std::vector<double> anchors;
    pieces.reserve(merged.size() + 1);
    const double inv = 1.0 / (2.0 * a);
    for (std::size_t i = 0; i <= merged.size(); ++i) {
      const double probe = probe_point(merged, i);
      const double anchor = anchor_point(merged, i);
      const std::size_t jp = find(probe + a);
      const std::size_t jm = find(probe - a);
      // F(x + a) in t = x - anchor: rebase F_jp by (anchor + a - anchor_jp)
      const Poly qp = anti[jp].shifted(anchor + a - anchors_[jp]);
      const Poly qm = anti[jm].shifted(anchor - a - anchors_[jm]);
      pieces.push_back((qp - qm).scaled(inv));
      anchors.push_back(anchor);
    }
    return PiecewisePoly(merged, pieces, anchors);
  }

  /// Convolution with the normalized hat of half-width hw (two boxes).
  PiecewisePoly convolve_hat(double hw) const {
    return convolve_box(0.5 * hw).convolve_box(0.5 * hw);
  }

  /// Replaces pieces that agree with one of the target constants to within
  /// tol by the exact constant. Convolution leaves ~1e-15 residue on the
  /// analytically constant plateaus; snapping restores exact 0/1 values.
  PiecewisePoly snapped(const std::vector<double>& targets, double tol = 1e-9) const {
    std::vector<Poly> pieces = pieces_;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      double lo, hi;
      if (breaks_.empty()) {
        lo = -1.0;
        hi = 1.0;
      } else if (i == 0) {
        lo = breaks_.front() - 1.0;
        hi = breaks_.front();
      } else if (i == breaks_.size()) {
        lo = breaks_.back();
        hi = breaks_.back() + 1.0;
      } else {
        lo = breaks_[i - 1];
        hi = breaks_[i];
      }
      for (double target : targets) {
        bool flat = true;
        for (int m = 0; m <= 4 && flat; ++m) {
          const double x = lo + (hi - lo) * m / 4.0;
          flat = std::abs(pieces[i].eval(x - anchors_[i]) - target) < tol;
        }
        if (flat) {
          pieces[i] = Poly{{target}};
          break;
        }
      }
    }
    return PiecewisePoly(breaks_, pieces, anchors_);
  }

 private:
  std::size_t find(double x) const {
    return std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin();
  }

  static std::vector<double> merge_breaks(const std::vector<double>& a,
                                          const std::vector<double>& b) {
    std::vector<double> merged = a;
    merged.insert(merged.end(), b.begin(), b.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                 merged.end());
    return merged;
  }

  static double probe_point(const std::vector<double>& breaks, std::size_t i) {
    if (breaks.empty()) return 0.0;
    if (i == 0) return breaks.front() - 1.0;
    if (i == breaks.size()) return breaks.back() + 1.0;
    return 0.5 * (breaks[i - 1] + breaks[i]);
  }

  /// Local coordinate origin of piece i: its left endpoint (front break for
  /// the leading unbounded piece).
  static double anchor_point(const std::vector<double>& breaks, std::size_t i) {
    if (breaks.empty()) return 0.0;
    if (i == 0) return breaks.front();
    return breaks[i - 1];
  }

  std::vector<double> breaks_;
  std::vector<Poly> pieces_;
  std::vector<double> anchors_;
};

/// One axis factor of a cutoff pair. chi profiles of adjacent subdomains are
/// built from complementary steps at the shared core boundary and therefore
/// sum to one exactly; chi_over ("chi greater") is 1 on supp chi with its own
/// transition closer to the subdomain boundary.
///
/// Transition layout inside the one-sided extension E (overlap delta = 2E),
/// relative to the core boundary c of two adjacent subdomains:
///   chi_over rises over [c - E + E/12, c - E + E/12 + E/3]
///   chi      rises over [c - 0.55 E,  c + 0.55 E]
/// leaving finite gaps to the subdomain boundary and to supp chi, so that
/// chi_over == 1 holds exactly (as a constant piece) wherever chi > 0.
struct AxisProfile {
  PiecewisePoly chi;
  PiecewisePoly chi_over;
};

/// Smoothing order p: profiles are steps convolved p times with hats, giving
/// C^{2p-1} ramps (piecewise degree 2p) with derivative scale 1/E.
inline AxisProfile make_axis_profile(double core_lo, double core_hi, double ext,
                                     bool neighbor_lo, bool neighbor_hi, int p) {
  HELMDD_REQUIRE(p >= 1, "axis profile: smoothing order must be >= 1");
  HELMDD_REQUIRE(ext > 0.0, "axis profile: extension must be positive");
  const double chi_halfwidth = 0.55 * ext;
  const double over_halfwidth = ext / 6.0;

  auto smooth = [&](PiecewisePoly f, double transition_halfwidth) {
    const double hw = transition_halfwidth / p;
    for (int m = 0; m < p; ++m) f = f.convolve_hat(hw);
    return f;
  };

  AxisProfile out;
  if (!neighbor_lo && !neighbor_hi) {
    out.chi = PiecewisePoly::constant(1.0);
    out.chi_over = PiecewisePoly::constant(1.0);
    return out;
  }
  PiecewisePoly chi = PiecewisePoly::constant(1.0);
  PiecewisePoly over = PiecewisePoly::constant(1.0);
  if (neighbor_lo) {
    const double over_center = core_lo - ext + ext / 12.0 + over_halfwidth;
    chi = chi + smooth(PiecewisePoly::step_up(core_lo), chi_halfwidth) +
          PiecewisePoly::constant(-1.0);
    over = over + smooth(PiecewisePoly::step_up(over_center), over_halfwidth) +
           PiecewisePoly::constant(-1.0);
  }
  if (neighbor_hi) {
    const double over_center_hi = core_hi + ext - ext / 12.0 - over_halfwidth;
    chi = chi + smooth(PiecewisePoly::step_down(core_hi), chi_halfwidth) +
          PiecewisePoly::constant(-1.0);
    over = over + smooth(PiecewisePoly::step_down(over_center_hi), over_halfwidth) +
           PiecewisePoly::constant(-1.0);
  }
  out.chi = chi.snapped({0.0, 1.0});
  out.chi_over = over.snapped({0.0, 1.0});
  return out;
}

/// Evaluates derivatives of the quotient f/s from derivatives of f and s via
/// the Leibniz recursion; used for the normalized partition of unity.
inline double quotient_derivative(const std::vector<double>& f,
                                  const std::vector<double>& s, int order) {
  std::vector<double> g(order + 1, 0.0);
  for (int n = 0; n <= order; ++n) {
    // f^{(n)} = sum_{j=0}^{n} C(n,j) g^{(j)} s^{(n-j)}, solved for g^{(n)}
    double sum = 0.0;
    double cnj = 1.0;
    for (int j = 0; j < n; ++j) {
      sum += cnj * g[j] * s[n - j];
      cnj = cnj * static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    g[n] = (f[n] - sum) / s[0];
  }
  return g[order];
}

}  // namespace helmdd
