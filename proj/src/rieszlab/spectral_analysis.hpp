// spectral_analysis: eigensystem of the truncated operator with left and
// right vectors, disc/box localization, Riesz projections by contour
// quadrature and by the rank-1 eigenvector formula, and the basis
// diagnostics: projection norms, disjointness, quadratic sums, series-term
// bounds, and eigenvector-matrix conditioning.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rieszlab/operator_lab.hpp"

namespace rieszlab {

// ---------------------------------------------------------------------------
// Eigensystem with left vectors.
// ---------------------------------------------------------------------------

struct EigenPair {
  Complex lambda;
  Eigen::VectorXcd right;  // unit norm
  Eigen::VectorXcd left;   // unit norm, from the adjoint problem
  Complex pairing;         // <right, left> = left^H right
  // True when another eigenvalue lies within the clustering tolerance: the
  // left/right matching is then ambiguous and rank-1 formulas are skipped.
  bool clustered = false;
};

// All eigenpairs of T.matrix, sorted by real part (ties by imaginary part).
// Exact off-diagonal zero patterns are used to split the matrix into
// irreducible diagonal blocks first -- the same permutation-isolation step a
// balancing pass performs -- so block-diagonal operators cost only their
// blocks.  Left vectors come from the adjoint matrix, matched positionally
// after sorting; eigenvalues closer than 1e-6 are flagged as clustered.
// Throws std::runtime_error if the QR iteration fails to converge.
std::vector<EigenPair> eigensystem(const TruncatedOperator& T);

// Eigenvalues only (same block splitting), sorted by real part.
Eigen::VectorXcd spectrum_of(const Eigen::MatrixXcd& matrix);

// ---------------------------------------------------------------------------
// Localization against enclosure regions.
// ---------------------------------------------------------------------------

struct LocalizationRow {
  Index position = 0;  // 1-based position in the sorted eigenvalue list
  Complex lambda;
  int region = -1;          // position in the regions vector, -1 = outside
  bool edge_excluded = false;  // Re lambda beyond the truncation buffer
};

struct Localization {
  std::vector<LocalizationRow> rows;
  std::vector<Index> counts;  // per region, edge-excluded eigenvalues omitted
  Index outside = 0;          // non-excluded eigenvalues in no region
  Index excluded = 0;
};

// Classify each eigenvalue into the first region containing it.  Eigenvalues
// with Re lambda > mu_{size - buffer} sit in the truncation's distortion zone
// and are excluded from the counts.
Localization localization_report(const std::vector<EigenPair>& eigs,
                                 const std::vector<Region>& regions,
                                 const Spectrum& spec, Index size,
                                 Index buffer);

// ---------------------------------------------------------------------------
// Riesz projections.
// ---------------------------------------------------------------------------

// (2 pi i)^{-1} times the contour integral of (z - T)^{-1} around the circle,
// by the trapezoidal rule on quad_nodes equispaced nodes.  Requires
// quad_nodes >= 16 and every eigenvalue at distance > 1e-8 from the circle
// (the offender is named otherwise); a singular resolvent at a node raises
// std::runtime_error.
Eigen::MatrixXcd riesz_projection_contour(const TruncatedOperator& T,
                                          Complex center, double radius,
                                          Index quad_nodes);

// Same, reusing precomputed eigenvalues for the circle-distance check.
Eigen::MatrixXcd riesz_projection_contour(const TruncatedOperator& T,
                                          const Eigen::VectorXcd& eigenvalues,
                                          Complex center, double radius,
                                          Index quad_nodes);

// Contour projection over the rectangle [re_lo, re_hi] x [-im_half, im_half],
// traversed counterclockwise with a trapezoidal rule of nodes_per_side
// intervals per side (corners shared).
Eigen::MatrixXcd riesz_projection_rect(const TruncatedOperator& T,
                                       const Eigen::VectorXcd& eigenvalues,
                                       double re_lo, double re_hi,
                                       double im_half, Index nodes_per_side);

// Rank-1 projection right * left^H / pairing for a simple eigenvalue.
// Rejects clustered pairs and vanishing pairings (possibly defective).
Eigen::MatrixXcd riesz_projection_eig(const EigenPair& pair);

// Operator norm of the rank-1 projection: ||right|| ||left|| / |pairing|.
double projection_norm(const EigenPair& pair);

// ---------------------------------------------------------------------------
// Basis diagnostics.
// ---------------------------------------------------------------------------

// max over ordered pairs (j, k) of || P_j P_k - delta_jk P_j ||_F.
double disjointness_residual(const std::vector<Eigen::MatrixXcd>& projs);

// The same quantity for the rank-1 family of the given eigenpairs, computed
// in closed form (products of rank-1 matrices reduce to scalars, where the
// Frobenius and operator norms agree).  Clustered pairs are skipped.
double disjointness_residual(const std::vector<EigenPair>& pairs);

struct RieszSum {
  double total = 0.0;
  std::vector<std::pair<Index, double>> summands;  // (n, |<(P_n - P0_n)f, f>|)
};

// Sum over aligned projection lists of |<(P_n - P0_n) f, f>| with
// n = N_start, N_start + 1, ...; requires ||f|| = 1.
RieszSum riesz_quadratic_sum(const std::vector<Eigen::MatrixXcd>& projs_T,
                             const std::vector<Eigen::MatrixXcd>& projs_A,
                             const Eigen::VectorXcd& f, Index N_start);

// ---------------------------------------------------------------------------
// Series-term bounds.
// ---------------------------------------------------------------------------

struct SeriesTermCheck {
  double lhs = 0.0;         // sum_n |(2 pi i)^{-1} contour of <K B^{s+1} K f, f>|
  double bound_geom = 0.0;  // 2^{s+2} tau^{s+1} ||f||^2
  double bound_half = 0.0;  // 2^{-s} ||f||^2
  double tau = 0.0;         // contraction budget used by bound_geom
  Index n_lo = 0;           // summation range [n_lo, n_hi]
  Index n_hi = 0;
};

// Quadrature of the s-th resolvent-expansion term summed over the discs
// n = N .. size - size/8, against both closed-form bounds.  The contraction
// budget tau_N is certified on a window of max(1000, 8 * size) indices.
// Requires s <= 6; every node must keep the Hilbert-Schmidt bound on B(z)
// at or below 1/2, else std::runtime_error.
SeriesTermCheck series_term_check(const Spectrum& spec,
                                  const WeightSequence& w,
                                  const PerturbationMatrix& V, Index s,
                                  Index N, const Eigen::VectorXcd& f,
                                  Index quad_nodes);

struct SeriesTermRow {
  Index s = 0;
  Index draw = 0;  // column of F
  double lhs = 0.0;
  double bound_geom = 0.0;
  double bound_half = 0.0;
};

// Batched variant: all exponents s = 0..s_max and all columns of F in one
// sweep over the contours (one resolvent chain per node serves every term).
std::vector<SeriesTermRow> series_term_table(const Spectrum& spec,
                                             const WeightSequence& w,
                                             const PerturbationMatrix& V,
                                             Index s_max, Index N,
                                             const Eigen::MatrixXcd& F,
                                             Index quad_nodes);

// 2-norm condition number of the matrix whose columns are the unit right
// eigenvectors at sorted positions lo..hi (1-based, inclusive); clustered
// pairs are excluded.
double basis_condition_number(const std::vector<EigenPair>& eigs, Index lo,
                              Index hi);

// ---------------------------------------------------------------------------
// Aggregate report.
// ---------------------------------------------------------------------------

struct SpectralOptions {
  Index size = 400;
  Index N0 = 4;              // box cut: discs start at N0 + 1
  double box_h1 = 1.0;       // box spans Re z in (-h1, mu_N0 + r_N0]
  double box_h2 = 1.0;       // |Im z| <= h2
  Index buffer = 0;          // edge buffer; 0 means size / 8
  Index quad_nodes = 64;
  Index contour_samples = 1; // discs given the full quadrature treatment
  bool box_quadrature = true;
  Index riesz_draws = 20;
  std::uint64_t seed = 1;
};

struct ProjectionRow {
  Index n = 0;  // disc index
  double norm = 0.0;
  Index rank = 0;
  double idem_residual = 0.0;
};

struct ContourSample {
  Index n = 0;                 // disc index sampled
  double eig_agreement = 0.0;  // ||P_contour - P_eig||_F
  double node_stability = 0.0; // ||P at quad_nodes - P at quad_nodes/2||_F
  double idem_residual = 0.0;  // ||P^2 - P||_F of the contour projection
  Index rank = 0;              // rounded real trace
};

struct SpectralReport {
  Index size = 0;
  Index buffer = 0;
  Index N0 = 0;
  std::vector<Region> regions;
  std::vector<EigenPair> eigs;
  Localization localization;
  std::vector<ProjectionRow> projections;  // one per cleanly localized disc
  double disjointness = 0.0;
  std::vector<ContourSample> contour_checks;
  Index box_rank = 0;           // rounded trace of the box projection
  double box_idem = 0.0;
  bool box_sampled = false;
  Index rank_gap = 0;  // |size - excluded - (box + disc counts + outside)|
  std::vector<double> riesz_sums;  // one partial sum per random draw
  double condition_number = 1.0;
  std::string summary;
};

// Full diagnostic pass: eigensystem, localization against the standard
// box-plus-discs regions, rank-1 projection rows, closed-form disjointness,
// sampled contour agreement and node-stability checks, the box projection by
// rectangle quadrature, seeded random-vector quadratic sums, and the
// eigenvector condition number on the post-box window.  Requires
// quad_nodes >= 32 (the halving stability check needs 16 on the coarse pass).
SpectralReport build_spectral_report(const Spectrum& spec,
                                     const PerturbationMatrix& V,
                                     const SpectralOptions& opts = {});

// CSV writers (17 significant digits).
// eigenvalues.csv: index,re,im,region
void write_eigenvalues_csv(const SpectralReport& rep, std::ostream& out);
// projections.csv: n,norm,rank,idem_residual
void write_projections_csv(const SpectralReport& rep, std::ostream& out);
// riesz_sums.csv: draw,partial_sum
void write_riesz_sums_csv(const SpectralReport& rep, std::ostream& out);

}  // namespace rieszlab
