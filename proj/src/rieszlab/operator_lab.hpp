// Finite truncations of the perturbed diagonal operator: the perturbation
// form table v_jk with its weight-dominance certificate, the branch-correct
// diagonal factor K(z) = (z - A)^{-1/2}, the weighted coupling matrix
// B(z) = K V K, the truncated operator T = A + V, and the exact resolvent
// factorization (z - T)^{-1} = K (I - B)^{-1} K at matching truncation.
#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "rieszlab/sequence_models.hpp"

namespace rieszlab {

using Complex = std::complex<double>;

enum class Storage { dense, banded };

// Table of perturbation form values v_jk = v(psi_j, psi_k), certified at
// construction against a weight sequence: |v_jk| <= omega_j omega_k (with
// 1e-12 absolute slack for generated data). Banded storage additionally
// guarantees v_jk = 0 beyond the stated bandwidth. Immutable once built.
class PerturbationMatrix {
 public:
  static PerturbationMatrix dense(Eigen::MatrixXcd values, WeightSequence w);
  static PerturbationMatrix banded(Eigen::MatrixXcd values, Index bandwidth,
                                   WeightSequence w);
  static PerturbationMatrix zero(Index size, WeightSequence w);

  // Text format, one header then one line per stored nonzero entry:
  //   size <n>
  //   storage <dense|banded>
  //   bandwidth <b>
  //   <j> <k> <re> <im>
  // Indices are 1-based; floats are written with 17 significant digits so a
  // save/load/save cycle is byte-identical.
  static PerturbationMatrix load(const std::string& path, WeightSequence w);
  void save(const std::string& path) const;

  Index size() const { return static_cast<Index>(values_.rows()); }
  Storage storage() const { return storage_; }
  Index bandwidth() const { return bandwidth_; }
  // v_jk lives at (j-1, k-1).
  const Eigen::MatrixXcd& values() const { return values_; }
  const WeightSequence& certificate_weights() const { return weights_; }

 private:
  PerturbationMatrix(Eigen::MatrixXcd values, Storage storage, Index bandwidth,
                     WeightSequence w);

  Eigen::MatrixXcd values_;
  Storage storage_;
  Index bandwidth_;
  WeightSequence weights_;
};

struct TruncatedOperator {
  Index size = 0;
  Eigen::MatrixXcd matrix;  // diag(mu_1..mu_size) plus the perturbation
  Spectrum spectrum;
  WeightSequence weights;
};

// Diagonal entries of K(z): (z - mu_k)^{-1/2} on the principal branch,
// w^s = |w|^s e^{i s arg w} with arg w in (-pi, pi]. Rejects z on the
// truncated spectrum.
Eigen::VectorXcd k_diag(const Spectrum& spec, Complex z, Index size);

// B(z) entries arranged so the matrix action matches the expansion
// B psi_l = sum_m v_lm (z-mu_l)^{-1/2} (z-mu_m)^{-1/2} psi_m.
Eigen::MatrixXcd b_matrix(const Spectrum& spec, const PerturbationMatrix& V,
                          Complex z, Index size);

struct HsCheck {
  double hs_norm = 0.0;  // Frobenius norm of the truncated B(z)
  double bound = 0.0;    // sum_{j<=size} omega_j^2 / |z - mu_j|
};

// Hilbert-Schmidt bound on B(z): hs_norm <= bound whenever the certificate
// |v_jk| <= omega_j omega_k holds (equality for the saturated rank-1 table).
HsCheck hs_bound_check(const Spectrum& spec, const WeightSequence& w,
                       const PerturbationMatrix& V, Complex z, Index size);

// Operator-norm residual of (z-T)^{-1} - K (I-B)^{-1} K at one truncation
// size. The identity is exact in exact arithmetic, so the residual is pure
// rounding noise scaled by the conditioning of I - B.
double resolvent_factorization_residual(const Spectrum& spec,
                                        const PerturbationMatrix& V, Complex z,
                                        Index size);

// T = diag(mu) + V at the given size, with the dominance certificate
// re-verified entry by entry.
TruncatedOperator build_truncated_T(const Spectrum& spec,
                                    const PerturbationMatrix& V, Index size);

}  // namespace rieszlab
