#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "helmdd/assembly.hpp"
#include "helmdd/cutoffs.hpp"
#include "helmdd/fe_space.hpp"
#include "helmdd/weighted.hpp"

namespace helmdd {

/// Axis-aligned rectangular subdomain, a union of fine cells: core block
/// plus an extension of `ext_cells` on every interior side.
struct Subdomain {
  int index = 0;
  int cx0 = 0, cx1 = 0, cy0 = 0, cy1 = 0;          // cell range, half-open
  int core_x0 = 0, core_x1 = 0, core_y0 = 0, core_y1 = 0;
  bool at_left = false, at_right = false, at_bottom = false, at_top = false;
  double diameter = 0.0;  // characteristic length H_l (max side extent)
  double overlap = 0.0;   // delta_l

  bool contains_cell(int cx, int cy) const {
    return cx >= cx0 && cx < cx1 && cy >= cy0 && cy < cy1;
  }
  bool intersects_open(const Subdomain& o) const {
    return cx0 < o.cx1 && o.cx0 < cx1 && cy0 < o.cy1 && o.cy0 < cy1;
  }
};

/// Closed-form cutoff pair for one subdomain: tensor products of the 1-d
/// axis profiles, with chi normalized by the per-axis cover sums.
class CutoffPair {
 public:
  CutoffPair(const AxisProfile* px, const AxisProfile* py, const PiecewisePoly* sum_x,
             const PiecewisePoly* sum_y)
      : px_(px), py_(py), sx_(sum_x), sy_(sum_y) {}

  double chi(const Point& x) const {
    return axis_chi(*px_, *sx_, x.x()) * axis_chi(*py_, *sy_, x.y());
  }
  double chi_over(const Point& x) const {
    return px_->chi_over.eval(x.x()) * py_->chi_over.eval(x.y());
  }

  Eigen::Vector2d chi_gradient(const Point& x) const {
    const double fx = axis_chi(*px_, *sx_, x.x());
    const double fy = axis_chi(*py_, *sy_, x.y());
    return {axis_chi_derivative(*px_, *sx_, x.x(), 1) * fy,
            fx * axis_chi_derivative(*py_, *sy_, x.y(), 1)};
  }
  Eigen::Vector2d chi_over_gradient(const Point& x) const {
    return {px_->chi_over.eval_derivative(x.x(), 1) * py_->chi_over.eval(x.y()),
            px_->chi_over.eval(x.x()) * py_->chi_over.eval_derivative(x.y(), 1)};
  }

  /// Mixed partial d^(ax+ay) chi / dx^ax dy^ay.
  double chi_partial(const Point& x, int ax, int ay) const {
    return axis_chi_derivative(*px_, *sx_, x.x(), ax) *
           axis_chi_derivative(*py_, *sy_, x.y(), ay);
  }
  double chi_over_partial(const Point& x, int ax, int ay) const {
    return px_->chi_over.eval_derivative(x.x(), ax) *
           py_->chi_over.eval_derivative(x.y(), ay);
  }

 private:
  static double axis_chi(const AxisProfile& p, const PiecewisePoly& s, double t) {
    return p.chi.eval(t) / s.eval(t);
  }
  static double axis_chi_derivative(const AxisProfile& p, const PiecewisePoly& s,
                                    double t, int order) {
    if (order == 0) return axis_chi(p, s, t);
    std::vector<double> f(order + 1), den(order + 1);
    for (int m = 0; m <= order; ++m) {
      f[m] = p.chi.eval_derivative(t, m);
      den[m] = s.eval_derivative(t, m);
    }
    return quotient_derivative(f, den, order);
  }

  const AxisProfile* px_;
  const AxisProfile* py_;
  const PiecewisePoly* sx_;
  const PiecewisePoly* sy_;
};

/// Diagonal-times-selection restriction: rows indexed by the subdomain dofs,
/// columns by the global dofs.
struct WeightedRestriction {
  std::vector<int> global_dof;  // local row -> global dof
  RealVec chi;                  // chi(x_j) per local row
  RealVec chi_over;             // chi_over(x_j) per local row

  Eigen::Index local_size() const { return static_cast<Eigen::Index>(global_dof.size()); }

  /// r = R^chi v (or R^{chi>} v).
  Vec apply_chi(const Vec& v) const {
    Vec r(local_size());
    for (Eigen::Index l = 0; l < local_size(); ++l) r[l] = chi[l] * v[global_dof[l]];
    return r;
  }
  Vec apply_chi_over(const Vec& v) const {
    Vec r(local_size());
    for (Eigen::Index l = 0; l < local_size(); ++l) r[l] = chi_over[l] * v[global_dof[l]];
    return r;
  }
  /// v += (R^chi)^T r (scatter).
  void add_transpose_chi(const Vec& r, Vec& v) const {
    for (Eigen::Index l = 0; l < local_size(); ++l) v[global_dof[l]] += chi[l] * r[l];
  }
  void add_transpose_chi_over(const Vec& r, Vec& v) const {
    for (Eigen::Index l = 0; l < local_size(); ++l) v[global_dof[l]] += chi_over[l] * r[l];
  }
  /// Plain selection restriction (all weights one).
  Vec apply_plain(const Vec& v) const {
    Vec r(local_size());
    for (Eigen::Index l = 0; l < local_size(); ++l) r[l] = v[global_dof[l]];
    return r;
  }
};

class SubdomainCover {
 public:
  SubdomainCover() = default;
  // cutoff pairs hold pointers into the profile vectors; moving keeps the
  // heap elements in place, copying would not
  SubdomainCover(const SubdomainCover&) = delete;
  SubdomainCover& operator=(const SubdomainCover&) = delete;
  SubdomainCover(SubdomainCover&&) = default;
  SubdomainCover& operator=(SubdomainCover&&) = default;

  std::vector<Subdomain> subdomains;
  int cores_x = 0, cores_y = 0;
  int ext_cells = 0;
  int smoothness = 0;  // p used for the cutoffs, 0 before build_cutoffs
  double delta_min = 0.0;

  const StructuredMesh* mesh = nullptr;

  int size() const { return static_cast<int>(subdomains.size()); }

  /// Lambda(l): number of subdomains whose open set meets subdomain l
  /// (including l itself).
  int lambda_of(int l) const {
    int count = 0;
    for (const auto& o : subdomains)
      if (subdomains[l].intersects_open(o)) ++count;
    return count;
  }
  int lambda() const {
    int lam = 0;
    for (int l = 0; l < size(); ++l) lam = std::max(lam, lambda_of(l));
    return lam;
  }

  const CutoffPair& cutoffs(int l) const { return pairs_.at(l); }

  /// Sum of chi over all subdomains at a point (1 up to roundoff).
  double pou_sum(const Point& x) const {
    double s = 0.0;
    for (const auto& c : pairs_) s += c.chi(x);
    return s;
  }

  // populated by build_cutoffs
  std::vector<AxisProfile> axis_x, axis_y;
  PiecewisePoly sum_x, sum_y;

  std::vector<CutoffPair> pairs_;
};

/// Overlapping cover by a grid of square subdomains: cores tile the domain,
/// each extended by ext cells on interior sides. target_diam and overlap are
/// lengths (the interesting regime has both proportional to 1/k).
inline SubdomainCover build_cover(const StructuredMesh& mesh, double k,
                                  double target_diam, double overlap) {
  HELMDD_REQUIRE(k > 0.0, "cover: wavenumber must be positive");
  HELMDD_REQUIRE(target_diam > 0.0 && overlap > 0.0, "cover: sizes must be positive");
  const int n = mesh.cells_per_side();
  const double len = std::min(mesh.domain().width(), mesh.domain().height());
  int cores = std::max(1, static_cast<int>(std::lround(len / target_diam)));
  while (cores > 1 && n % cores != 0) --cores;
  const int cpc = n / cores;  // cells per core
  const double h = std::min(mesh.hx(), mesh.hy());
  int ext = static_cast<int>(std::lround(overlap / (2.0 * h)));
  if (cores == 1) ext = 0;
  if (cores > 1) {
    HELMDD_REQUIRE(ext >= 1, "cover: overlap must span at least 2 fine cells");
    HELMDD_REQUIRE(11 * ext <= 10 * cpc,
                   "cover: overlap too large for the core size (cutoff ramps collide)");
  }

  SubdomainCover cover;
  cover.mesh = &mesh;
  cover.cores_x = cores;
  cover.cores_y = cores;
  cover.ext_cells = ext;
  cover.delta_min = cores > 1 ? 2.0 * ext * h : std::min(mesh.domain().width(),
                                                         mesh.domain().height());
  for (int j = 0; j < cores; ++j) {
    for (int i = 0; i < cores; ++i) {
      Subdomain s;
      s.index = j * cores + i;
      s.core_x0 = i * cpc;
      s.core_x1 = (i + 1) * cpc;
      s.core_y0 = j * cpc;
      s.core_y1 = (j + 1) * cpc;
      s.cx0 = std::max(0, s.core_x0 - ext);
      s.cx1 = std::min(n, s.core_x1 + ext);
      s.cy0 = std::max(0, s.core_y0 - ext);
      s.cy1 = std::min(n, s.core_y1 + ext);
      s.at_left = i == 0;
      s.at_right = i == cores - 1;
      s.at_bottom = j == 0;
      s.at_top = j == cores - 1;
      s.diameter = std::max((s.cx1 - s.cx0) * mesh.hx(), (s.cy1 - s.cy0) * mesh.hy());
      s.overlap = cover.delta_min;
      cover.subdomains.push_back(s);
    }
  }
  // every fine cell is covered (cores tile, extensions only add)
  for (int cy = 0; cy < n; ++cy)
    for (int cx = 0; cx < n; ++cx) {
      bool covered = false;
      for (const auto& s : cover.subdomains) covered = covered || s.contains_cell(cx, cy);
      HELMDD_REQUIRE(covered, "cover: grid does not cover the domain");
    }
  return cover;
}

/// Populates the cutoff pairs with smoothness order p.
inline void build_cutoffs(SubdomainCover& cover, int p) {
  HELMDD_REQUIRE(cover.mesh != nullptr, "cutoffs: cover not built");
  const StructuredMesh& mesh = *cover.mesh;
  const int cores = cover.cores_x;
  const int cpc = mesh.cells_per_side() / cores;
  cover.smoothness = p;
  cover.axis_x.clear();
  cover.axis_y.clear();
  const double ext_x = cover.ext_cells * mesh.hx();
  const double ext_y = cover.ext_cells * mesh.hy();
  for (int i = 0; i < cores; ++i) {
    const double lo_x = mesh.domain().x0 + i * cpc * mesh.hx();
    const double hi_x = mesh.domain().x0 + (i + 1) * cpc * mesh.hx();
    cover.axis_x.push_back(make_axis_profile(lo_x, hi_x, cores > 1 ? ext_x : 1.0,
                                             i > 0, i < cores - 1, p));
    const double lo_y = mesh.domain().y0 + i * cpc * mesh.hy();
    const double hi_y = mesh.domain().y0 + (i + 1) * cpc * mesh.hy();
    cover.axis_y.push_back(make_axis_profile(lo_y, hi_y, cores > 1 ? ext_y : 1.0,
                                             i > 0, i < cores - 1, p));
  }
  cover.sum_x = PiecewisePoly::constant(0.0);
  cover.sum_y = PiecewisePoly::constant(0.0);
  for (int i = 0; i < cores; ++i) {
    cover.sum_x = cover.sum_x + cover.axis_x[i].chi;
    cover.sum_y = cover.sum_y + cover.axis_y[i].chi;
  }
  cover.pairs_.clear();
  for (const auto& s : cover.subdomains) {
    const int i = s.index % cores;
    const int j = s.index / cores;
    cover.pairs_.emplace_back(&cover.axis_x[i], &cover.axis_y[j], &cover.sum_x,
                              &cover.sum_y);
  }
}

/// Dof set of a subdomain: nodes on the closure, minus the local Dirichlet
/// ring on the subdomain boundary away from the physical boundary when the
/// local problems are Dirichlet-truncated, and minus globally eliminated
/// nodes. Rows of the restrictions follow this numbering.
struct LocalDofs {
  std::vector<int> dof_of_node;   // node -> local dof, -1 outside/eliminated
  std::vector<int> global_dof;    // local dof -> global dof
  std::vector<int> node_of_local; // local dof -> node id
};

inline LocalDofs local_dofs(const FeSpace& space, const Subdomain& s,
                            bool dirichlet_cuts) {
  LocalDofs out;
  out.dof_of_node.assign(space.num_nodes(), -1);
  const int p = space.degree();
  const int ix0 = p * s.cx0, ix1 = p * s.cx1;
  const int iy0 = p * s.cy0, iy1 = p * s.cy1;
  for (int j = iy0; j <= iy1; ++j) {
    for (int i = ix0; i <= ix1; ++i) {
      const int node = space.node_id(i, j);
      const int gdof = space.dof_of_node(node);
      if (gdof < 0) continue;  // global Dirichlet
      if (dirichlet_cuts) {
        const bool on_cut = (i == ix0 && !s.at_left) || (i == ix1 && !s.at_right) ||
                            (j == iy0 && !s.at_bottom) || (j == iy1 && !s.at_top);
        if (on_cut) continue;
      }
      out.dof_of_node[node] = static_cast<int>(out.global_dof.size());
      out.global_dof.push_back(gdof);
      out.node_of_local.push_back(node);
    }
  }
  return out;
}

inline AssemblyDomain subdomain_assembly_domain(const FeSpace& space, const Subdomain& s,
                                                const CoefficientSet& cs,
                                                const ProblemConfig& config,
                                                const LocalDofs& dofs) {
  AssemblyDomain dom;
  dom.dof_of_node = dofs.dof_of_node;
  dom.num_dofs = static_cast<int>(dofs.global_dof.size());
  for (int cy = s.cy0; cy < s.cy1; ++cy)
    for (int cx = s.cx0; cx < s.cx1; ++cx) {
      const int cell = cy * space.mesh().cells_per_side() + cx;
      dom.elements.push_back(2 * cell);
      dom.elements.push_back(2 * cell + 1);
    }
  if (!config.local_dirichlet_cuts()) {
    // impedance on the whole subdomain boundary: the global theta on the
    // physical boundary, unit theta on the interior cuts
    const int nvr = space.mesh().cells_per_side() + 1;
    auto vid = [&](int i, int j) { return j * nvr + i; };
    auto add_edge = [&](int va, int vb, bool physical) {
      EdgeGeom e = make_edge_geom(space, va, vb);
      e.on_global_boundary = physical;
      if (physical)
        e.theta = cs.theta;
      else
        e.theta = [](const Point&) { return cplx(1.0, 0.0); };
      dom.edges.push_back(std::move(e));
    };
    for (int cx = s.cx0; cx < s.cx1; ++cx) {
      add_edge(vid(cx, s.cy0), vid(cx + 1, s.cy0), s.at_bottom);
      add_edge(vid(cx, s.cy1), vid(cx + 1, s.cy1), s.at_top);
    }
    for (int cy = s.cy0; cy < s.cy1; ++cy) {
      add_edge(vid(s.cx0, cy), vid(s.cx0, cy + 1), s.at_left);
      add_edge(vid(s.cx1, cy), vid(s.cx1, cy + 1), s.at_right);
    }
  }
  return dom;
}

/// Galerkin matrix of the local form on subdomain s.
inline SparseComplexMatrix assemble_local(const FeSpace& space, const Subdomain& s,
                                          const CoefficientSet& cs,
                                          const ProblemConfig& config) {
  const LocalDofs dofs = local_dofs(space, s, config.local_dirichlet_cuts());
  return assemble_form(space, cs,
                       subdomain_assembly_domain(space, s, cs, config, dofs));
}

/// R^chi and R^{chi>} for one subdomain, rows in the local dof numbering.
inline WeightedRestriction weighted_restriction(const FeSpace& space,
                                                const SubdomainCover& cover, int l,
                                                const LocalDofs& dofs) {
  const CutoffPair& c = cover.cutoffs(l);
  WeightedRestriction r;
  const auto n_local = dofs.global_dof.size();
  r.global_dof = dofs.global_dof;
  r.chi.resize(n_local);
  r.chi_over.resize(n_local);
  for (std::size_t m = 0; m < n_local; ++m) {
    const Point x = space.node_coords(dofs.node_of_local[m]);
    r.chi[m] = c.chi(x);
    r.chi_over[m] = c.chi_over(x);
  }
  return r;
}

/// max_l #{l' : J_h(Omega_l) and J_h(Omega_l') share a dof}; equals the
/// geometric lambda on covers whose pairwise overlaps contain nodes.
inline int lambda_from_dof_membership(const FeSpace& space, const SubdomainCover& cover,
                                      bool dirichlet_cuts) {
  std::vector<std::vector<int>> dofs_of(cover.size());
  for (int l = 0; l < cover.size(); ++l)
    dofs_of[l] = local_dofs(space, cover.subdomains[l], dirichlet_cuts).global_dof;
  int lam = 0;
  for (int l = 0; l < cover.size(); ++l) {
    std::vector<char> mark(space.num_dofs(), 0);
    for (int d : dofs_of[l]) mark[d] = 1;
    int count = 0;
    for (int m = 0; m < cover.size(); ++m) {
      bool shares = false;
      for (int d : dofs_of[m])
        if (mark[d]) {
          shares = true;
          break;
        }
      if (shares) ++count;
    }
    lam = std::max(lam, count);
  }
  return lam;
}

struct OverlapCheckReport {
  double max_ratio = 0.0;  // of ||sum v_l||^2 / (2 Lambda sum ||v_l||^2)
  int samples = 0;
};

/// Randomized check of the cover inequality
/// ||sum_l v_l||_{H^1_k}^2 <= 2 Lambda sum_l ||v_l||_{H^1_k(Omega_l)}^2
/// for fields v_l supported strictly inside Omega_l (so zero extension is
/// conforming and the local norm equals the global norm of the extension).
inline OverlapCheckReport overlap_inequality_check(const FeSpace& space,
                                                   const SubdomainCover& cover,
                                                   const SparseComplexMatrix& dk,
                                                   int samples, Rng& rng) {
  OverlapCheckReport rep;
  rep.samples = samples;
  const int lam = cover.lambda();
  for (int s = 0; s < samples; ++s) {
    Vec total = Vec::Zero(space.num_dofs());
    double local_sq = 0.0;
    for (int l = 0; l < cover.size(); ++l) {
      const LocalDofs dofs = local_dofs(space, cover.subdomains[l], true);
      Vec ext = Vec::Zero(space.num_dofs());
      for (std::size_t m = 0; m < dofs.global_dof.size(); ++m)
        ext[dofs.global_dof[m]] = rng.normal_complex();
      total += ext;
      local_sq += weighted_inner(dk, ext, ext).real();
    }
    const double lhs = weighted_inner(dk, total, total).real();
    rep.max_ratio = std::max(rep.max_ratio, lhs / (2.0 * lam * local_sq));
  }
  return rep;
}

/// CSV summary, one row per subdomain.
inline void write_cover_csv(const SubdomainCover& cover, const FeSpace& space,
                            bool dirichlet_cuts, std::ostream& os) {
  os << "index,H,delta,dofs,lambda_contribution\n";
  for (int l = 0; l < cover.size(); ++l) {
    const auto& s = cover.subdomains[l];
    const auto dofs = local_dofs(space, s, dirichlet_cuts);
    os << l << "," << s.diameter << "," << s.overlap << "," << dofs.global_dof.size()
       << "," << cover.lambda_of(l) << "\n";
  }
}

}  // namespace helmdd
