#pragma once

#include "nipot/holo.hpp"

namespace nipot {

/// Finite positive measure with atoms on grid nodes.
struct SphereMeasure {
  std::vector<std::pair<std::size_t, double>> atoms;

  static SphereMeasure from_masses(std::span<const double> masses);
  /// Atom masses q_j ρ(ζ_j) for a nonnegative density ρ.
  static SphereMeasure from_density(const QuadratureGrid& grid, std::span<const double> density);
  std::vector<double> dense(std::size_t size) const;
  double total() const;
  SphereMeasure scaled(double c) const;
  bool empty() const { return atoms.empty(); }
  /// Validates positivity, distinct indices and range.
  void validate(const QuadratureGrid& grid) const;
};

struct PotentialParams {
  double p = 2.0;
  double s = 0.5;
  double lambda = 0.5;
  double q = 1.0;
  double K = 2.0;

  double pprime() const { return p / (p - 1.0); }
  void validate(int n) const;
};

/// How a sphere-to-sphere kernel treats the coincident node.
enum class SelfTerm {
  /// Diagonal dropped.
  punctured,
  /// Diagonal set so that every row integrates the constant 1 exactly.
  row_corrected,
};

/// K_s(1) on the sphere: ∫ |1 - ζη̄|^{-(n-s)} dσ(η) = Γ(n)Γ(s)/Γ((n+s)/2)².
double riesz_of_one(int n, double s);

/// Node-to-node kernel |1 - ζ_i ζ̄_j|^{-(n-s)} with a chosen diagonal,
/// stored through the grid's rotation symmetry when it has one.
class RieszOperator {
 public:
  RieszOperator(const QuadratureGrid& grid, double s, SelfTerm self = SelfTerm::row_corrected);

  const QuadratureGrid& grid() const { return *grid_; }
  double s() const { return s_; }
  SelfTerm self_term() const { return self_; }
  double entry(std::size_t i, std::size_t j) const;
  /// Σ_j K_ij m_j at every node.
  std::vector<double> apply_measure(const SphereMeasure& nu) const;
  /// Σ_j K_ij q_j f_j at the requested nodes (all nodes if empty).
  std::vector<double> apply_function(std::span<const double> f, const IndexSet& rows = {}) const;
  /// Σ_j K(j, i) q_j f_j; equals apply_function where the table is symmetric.
  std::vector<double> apply_adjoint(std::span<const double> f, const IndexSet& cols = {}) const;
  /// Row i as kernel values K_ij.
  void row(std::size_t i, std::span<double> out) const;

 private:
  double pair_kernel(std::size_t i, std::size_t j) const;

  const QuadratureGrid* grid_;
  double s_;
  SelfTerm self_;
  std::vector<double> circle_;  // offset table for circle grids
  std::vector<double> torus_;   // (it, jt, d1, d2) table for torus grids
  std::vector<double> diag_;    // per node for unstructured grids
};

/// K_s ν at arbitrary points |z| ≤ 1; coincident atoms are skipped.
std::vector<double> riesz_apply(const SphereMeasure& nu, std::span<const Point> targets, double s,
                                const QuadratureGrid& grid);
/// Σ_j q_j f_j |1 - zζ̄_j|^{-(n-s)}; coincident nodes are skipped.
std::vector<double> riesz_apply(std::span<const double> f, std::span<const Point> targets,
                                double s, const QuadratureGrid& grid);
/// Σ_j q_j g_j (1 - zζ̄_j)^{-(n-s)}, targets with |z| ≤ 1 - 1e-6.
std::vector<Complex> cauchy_apply(std::span<const Complex> g, std::span<const Point> targets,
                                  double s, const QuadratureGrid& grid);

double energy(const SphereMeasure& nu, const PotentialParams& params, const WeightField& w,
              const RieszOperator& op);
/// U = K_s[w^{-(p'-1)} (K_s ν)^{p'-1}] at the given nodes (all if empty).
std::vector<double> nonlinear_potential(const SphereMeasure& nu, const PotentialParams& params,
                                        const WeightField& w, const RieszOperator& op,
                                        const IndexSet& nodes = {});
/// Σ_i m_i U(ζ_i).
double potential_integral(const SphereMeasure& nu, const PotentialParams& params,
                          const WeightField& w, const RieszOperator& op);

/// Dyadic Wolff potential with levels ℓ = 1..L at an arbitrary sphere point.
double wolff_potential(const SphereMeasure& nu, const PotentialParams& params,
                       const WeightField& w, const QuadratureGrid& grid, const Point& zeta, int L);
/// Wolff potential at every node.
std::vector<double> wolff_potential_nodes(const SphereMeasure& nu, const PotentialParams& params,
                                          const WeightField& w, const QuadratureGrid& grid, int L,
                                          const IndexSet& nodes = {});

/// Smallest pairwise gauge between atoms (2 for a single atom).
double min_separation(const SphereMeasure& nu, const QuadratureGrid& grid);
/// Smallest L ≥ 4 with 2^-L below the atom separation.
int spread_level(const SphereMeasure& nu, const QuadratureGrid& grid);

struct WolffRatio {
  double energy = 0;
  double wolff_integral = 0;
  double ratio = 0;
};
/// Throws InvalidArgument when the atoms are closer than 2^-L.
WolffRatio wolff_ratio(const SphereMeasure& nu, const PotentialParams& params,
                       const WeightField& w, const RieszOperator& op, int L);

/// Left side of the extended Wolff inequality with exponent params.q and
/// range cap params.K.
double wolff_extension_lhs(const SphereMeasure& nu, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid, int L);

enum class HoloKind { U, V };

/// Default λ: midpoint of (max(0, τ̂ - sp), 1).
double default_lambda(double tau, double p, double s);

/// Dyadic discretization of the holomorphic Wolff-type potentials.
class HoloPotential {
 public:
  HoloPotential(const SphereMeasure& nu, const PotentialParams& params, const WeightField& w,
                const QuadratureGrid& grid, int L, HoloKind kind, double tau);

  HoloKind kind() const { return kind_; }
  /// (I+R)^k F(z), k ∈ {0, 1, 2}.
  Complex value(const Point& z, int k = 0) const;
  /// (I+R)^k F(ρ ζ_j) for every node j.
  std::vector<Complex> ring(double rho, int k = 0) const;

 private:
  struct Level {
    double t;                       // 2^-ℓ
    std::vector<std::size_t> idx;   // source nodes
    std::vector<double> coef;       // coefficients of φ(r z ζ̄)
  };
  /// u^i φ^{(i)}(u) for φ(u) = (1-u)^{-λ}.
  Complex phi_term(int i, Complex u) const;
  /// Σ_m C(k,m) R^m φ(u) = Σ_i c_{k,i} u^i φ^{(i)}(u).
  Complex psi(int k, Complex u) const;
  /// Σ_j coef_j (u^i φ^{(i)})(r z ζ̄_j) over one level.
  Complex level_sum(const Level& lv, const Point& z, int i_order, int k_psi) const;
  std::vector<Complex> level_ring(const Level& lv, double rho, int i_order, int k_psi) const;
  static Complex combine_v(double beta, int k, Complex g0, Complex g1, Complex g2);

  const QuadratureGrid* grid_;
  HoloKind kind_;
  double lambda_;
  double beta_;  // p' - 1
  std::vector<Level> levels_;
};

/// |F(0)|^p + ∫ (∫_0^1 (1-ρ)^{k-s} |(I+R)^k F(ρη)| dρ/(1-ρ))^p w dσ, k = [s]^+.
double holo_potential_norm(const HoloPotential& F, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid, const RadialGrid& rg);

struct ContinuityReport {
  double coarse = 0;
  double fine = 0;
  double ratio = 0;
};
/// Punctured ∫ |1 - ζ0ζ̄|^{-(n-s)p'} w^{-(p'-1)} dσ on two grids.
double continuity_integral(const SpherePoint& zeta0, const PotentialParams& params,
                           const WeightField& w, const QuadratureGrid& grid);
ContinuityReport continuity_criterion(const SpherePoint& zeta0, const PotentialParams& params,
                                      const QuadratureGrid& coarse, const WeightField& w_coarse,
                                      const QuadratureGrid& fine, const WeightField& w_fine);

}  // namespace nipot
