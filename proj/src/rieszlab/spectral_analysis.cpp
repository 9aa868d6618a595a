#include "rieszlab/spectral_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rieszlab/criteria.hpp"

namespace rieszlab {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

constexpr double kClusterTol = 1e-6;
constexpr double kCircleClearance = 1e-8;

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Exclusive end offsets of the irreducible diagonal blocks of m, found from
// the exact zero pattern (rows and columns never couple across a boundary).
std::vector<Index> block_boundaries(const Eigen::MatrixXcd& m) {
  const Index n = m.rows();
  std::vector<Index> ends;
  Index reach = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = n - 1; j > reach; --j) {
      if (m(i, j) != Complex(0.0, 0.0) || m(j, i) != Complex(0.0, 0.0)) {
        reach = j;
        break;
      }
    }
    if (reach <= i) {
      ends.push_back(i + 1);
      reach = i + 1;
    }
  }
  return ends;
}

bool lambda_less(Complex a, Complex b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Resolvent (z - T)^{-1}; throws when the solve degenerates.
Eigen::MatrixXcd resolvent_at(const Eigen::MatrixXcd& t, Complex z) {
  Eigen::MatrixXcd shifted = -t;
  shifted.diagonal().array() += z;
  Eigen::MatrixXcd r = Eigen::PartialPivLU<Eigen::MatrixXcd>(shifted).inverse();
  if (!r.allFinite()) {
    throw std::runtime_error(
        "contour projection: singular resolvent at a quadrature node");
  }
  return r;
}

void check_circle_clearance(const Eigen::VectorXcd& eigenvalues, Complex center,
                            double radius) {
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    double gap = std::abs(std::abs(eigenvalues(i) - center) - radius);
    if (gap <= kCircleClearance) {
      throw std::runtime_error(
          "contour projection: eigenvalue " + num17(eigenvalues(i).real()) +
          (eigenvalues(i).imag() < 0 ? " - " : " + ") +
          num17(std::abs(eigenvalues(i).imag())) + "i lies within " +
          num17(kCircleClearance) + " of the contour");
    }
  }
}

double point_segment_distance(Complex p, Complex a, Complex b) {
  Complex ab = b - a;
  double len2 = std::norm(ab);
  double t = len2 == 0.0 ? 0.0 : ((p - a) * std::conj(ab)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

// Deterministic standard normals: Box-Muller over the raw 64-bit stream, so
// outputs depend only on the seed, not on library internals.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double normal() {
    double u1 = unit();
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXcd unit_vector(Index n) {
    Eigen::VectorXcd f(n);
    for (Index i = 0; i < n; ++i) f(i) = Complex(normal(), normal());
    f /= f.norm();
    return f;
  }

 private:
  double unit() {  // (0, 1]
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 rng_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Eigensystem.
// ---------------------------------------------------------------------------

std::vector<EigenPair> eigensystem(const TruncatedOperator& T) {
  const Eigen::MatrixXcd& a = T.matrix;
  const Index n = a.rows();
  require(n >= 1, "eigensystem: empty operator");

  std::vector<EigenPair> out;
  out.reserve(n);
  Index start = 0;
  for (Index end : block_boundaries(a)) {
    const Index bn = end - start;
    Eigen::MatrixXcd blk = a.block(start, start, bn, bn);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> right(blk, true);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> adj(blk.adjoint().eval(),
                                                    true);
    if (right.info() != Eigen::Success || adj.info() != Eigen::Success) {
      throw std::runtime_error("eigensystem: QR iteration did not converge");
    }

    std::vector<Index> ri(bn), li(bn);
    for (Index i = 0; i < bn; ++i) ri[i] = li[i] = i;
    std::sort(ri.begin(), ri.end(), [&](Index x, Index y) {
      return lambda_less(right.eigenvalues()(x), right.eigenvalues()(y));
    });
    // Adjoint eigenvalues are the conjugates; sort by the conjugate so the
    // two lists align positionally.
    std::sort(li.begin(), li.end(), [&](Index x, Index y) {
      return lambda_less(std::conj(adj.eigenvalues()(x)),
                         std::conj(adj.eigenvalues()(y)));
    });

    for (Index t = 0; t < bn; ++t) {
      EigenPair p;
      p.lambda = right.eigenvalues()(ri[t]);
      p.right = Eigen::VectorXcd::Zero(n);
      p.right.segment(start, bn) = right.eigenvectors().col(ri[t]);
      p.left = Eigen::VectorXcd::Zero(n);
      p.left.segment(start, bn) = adj.eigenvectors().col(li[t]);
      p.pairing = p.left.dot(p.right);
      // A positional mismatch beyond the clustering tolerance means the
      // left/right assignment is ambiguous.
      if (std::abs(std::conj(adj.eigenvalues()(li[t])) - p.lambda) >
          kClusterTol) {
        p.clustered = true;
      }
      out.push_back(std::move(p));
    }
    start = end;
  }

  std::sort(out.begin(), out.end(), [](const EigenPair& x, const EigenPair& y) {
    return lambda_less(x.lambda, y.lambda);
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (out[j].lambda.real() - out[i].lambda.real() >= kClusterTol) break;
      if (std::abs(out[j].lambda - out[i].lambda) < kClusterTol) {
        out[i].clustered = true;
        out[j].clustered = true;
      }
    }
  }
  return out;
}

Eigen::VectorXcd spectrum_of(const Eigen::MatrixXcd& matrix) {
  const Index n = matrix.rows();
  require(n >= 1, "spectrum_of: empty matrix");
  std::vector<Complex> vals;
  vals.reserve(n);
  Index start = 0;
  for (Index end : block_boundaries(matrix)) {
    const Index bn = end - start;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(
        matrix.block(start, start, bn, bn), false);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("spectrum_of: QR iteration did not converge");
    }
    for (Index i = 0; i < bn; ++i) vals.push_back(es.eigenvalues()(i));
    start = end;
  }
  std::sort(vals.begin(), vals.end(), lambda_less);
  return Eigen::Map<Eigen::VectorXcd>(vals.data(), n);
}

// ---------------------------------------------------------------------------
// Localization.
// ---------------------------------------------------------------------------

Localization localization_report(const std::vector<EigenPair>& eigs,
                                 const std::vector<Region>& regions,
                                 const Spectrum& spec, Index size,
                                 Index buffer) {
  require(!eigs.empty(), "localization: no eigenvalues");
  require(buffer >= 0 && buffer < size, "localization: buffer must be < size");
  const double cutoff = mu(spec, size - buffer);

  Localization loc;
  loc.counts.assign(regions.size(), 0);
  loc.rows.reserve(eigs.size());
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    LocalizationRow row;
    row.position = static_cast<Index>(i) + 1;
    row.lambda = eigs[i].lambda;
    row.edge_excluded = eigs[i].lambda.real() > cutoff;
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (regions[r].contains(eigs[i].lambda)) {
        row.region = static_cast<int>(r);
        break;
      }
    }
    if (!row.edge_excluded) {
      if (row.region >= 0) {
        ++loc.counts[static_cast<std::size_t>(row.region)];
      } else {
        ++loc.outside;
      }
    } else {
      ++loc.excluded;
    }
    loc.rows.push_back(row);
  }
  return loc;
}

// ---------------------------------------------------------------------------
// Projections.
// ---------------------------------------------------------------------------

Eigen::MatrixXcd riesz_projection_contour(const TruncatedOperator& T,
                                          const Eigen::VectorXcd& eigenvalues,
                                          Complex center, double radius,
                                          Index quad_nodes) {
  require(radius > 0.0, "contour projection: radius must be positive");
  require(quad_nodes >= 16, "contour projection: need at least 16 nodes");
  check_circle_clearance(eigenvalues, center, radius);

  const Index n = T.size;
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (Index q = 0; q < quad_nodes; ++q) {
    double theta = 2.0 * std::numbers::pi * static_cast<double>(q) /
                   static_cast<double>(quad_nodes);
    Complex e{std::cos(theta), std::sin(theta)};
    p += e * resolvent_at(T.matrix, center + radius * e);
  }
  p *= radius / static_cast<double>(quad_nodes);
  return p;
}

Eigen::MatrixXcd riesz_projection_contour(const TruncatedOperator& T,
                                          Complex center, double radius,
                                          Index quad_nodes) {
  return riesz_projection_contour(T, spectrum_of(T.matrix), center, radius,
                                  quad_nodes);
}

Eigen::MatrixXcd riesz_projection_rect(const TruncatedOperator& T,
                                       const Eigen::VectorXcd& eigenvalues,
                                       double re_lo, double re_hi,
                                       double im_half, Index nodes_per_side) {
  require(re_hi > re_lo, "rectangle projection: empty real interval");
  require(im_half > 0.0, "rectangle projection: imaginary half-width <= 0");
  require(nodes_per_side >= 16,
          "rectangle projection: need at least 16 nodes per side");

  const Complex corners[4] = {{re_hi, -im_half},
                              {re_hi, im_half},
                              {re_lo, im_half},
                              {re_lo, -im_half}};
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    for (int s = 0; s < 4; ++s) {
      double d = point_segment_distance(eigenvalues(i), corners[s],
                                        corners[(s + 1) % 4]);
      if (d <= kCircleClearance) {
        throw std::runtime_error(
            "rectangle projection: eigenvalue " +
            num17(eigenvalues(i).real()) + " + " +
            num17(eigenvalues(i).imag()) + "i lies on the boundary");
      }
    }
  }

  const Index n = T.size;
  const Complex two_pi_i{0.0, 2.0 * std::numbers::pi};
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (int s = 0; s < 4; ++s) {
    Complex a = corners[s], b = corners[(s + 1) % 4];
    Complex step = (b - a) / static_cast<double>(nodes_per_side);
    for (Index q = 0; q <= nodes_per_side; ++q) {
      double weight = (q == 0 || q == nodes_per_side) ? 0.5 : 1.0;
      p += (weight * step / two_pi_i) *
           resolvent_at(T.matrix, a + static_cast<double>(q) * step);
    }
  }
  return p;
}

Eigen::MatrixXcd riesz_projection_eig(const EigenPair& pair) {
  require(!pair.clustered,
          "rank-1 projection: eigenvalue belongs to an ambiguous cluster");
  if (std::abs(pair.pairing) < 1e-14) {
    throw std::invalid_argument(
        "rank-1 projection: vanishing pairing (possibly defective "
        "eigenvalue)");
  }
  return (pair.right * pair.left.adjoint()) / pair.pairing;
}

double projection_norm(const EigenPair& pair) {
  require(!pair.clustered,
          "projection norm: eigenvalue belongs to an ambiguous cluster");
  require(std::abs(pair.pairing) > 0.0, "projection norm: vanishing pairing");
  return pair.right.norm() * pair.left.norm() / std::abs(pair.pairing);
}

// ---------------------------------------------------------------------------
// Diagnostics.
// ---------------------------------------------------------------------------

double disjointness_residual(const std::vector<Eigen::MatrixXcd>& projs) {
  require(!projs.empty(), "disjointness: no projections");
  double worst = 0.0;
  for (std::size_t j = 0; j < projs.size(); ++j) {
    for (std::size_t k = 0; k < projs.size(); ++k) {
      Eigen::MatrixXcd d = projs[j] * projs[k];
      if (j == k) d -= projs[j];
      worst = std::max(worst, d.norm());
    }
  }
  return worst;
}

double disjointness_residual(const std::vector<EigenPair>& pairs) {
  require(!pairs.empty(), "disjointness: no projections");
  double worst = 0.0;
  for (const EigenPair& pj : pairs) {
    if (pj.clustered) continue;
    for (const EigenPair& pk : pairs) {
      if (pk.clustered) continue;
      // P_j P_k = (left_j^H right_k) right_j left_k^H / (pairing_j pairing_k);
      // the Frobenius norm of a rank-1 outer product of unit vectors is the
      // scalar's modulus.
      Complex cross = pj.left.dot(pk.right);
      double denom = std::abs(pj.pairing) * std::abs(pk.pairing);
      double residual;
      if (&pj == &pk) {
        residual = std::abs(cross - pj.pairing) / denom;
      } else {
        residual = std::abs(cross) / denom;
      }
      worst = std::max(worst, residual);
    }
  }
  return worst;
}

RieszSum riesz_quadratic_sum(const std::vector<Eigen::MatrixXcd>& projs_T,
                             const std::vector<Eigen::MatrixXcd>& projs_A,
                             const Eigen::VectorXcd& f, Index N_start) {
  require(projs_T.size() == projs_A.size(),
          "quadratic sum: projection lists must align");
  require(!projs_T.empty(), "quadratic sum: no projections");
  require(std::abs(f.norm() - 1.0) <= 1e-9,
          "quadratic sum: f must be a unit vector");
  RieszSum out;
  out.summands.reserve(projs_T.size());
  for (std::size_t i = 0; i < projs_T.size(); ++i) {
    Complex term = f.dot(projs_T[i] * f) - f.dot(projs_A[i] * f);
    double summand = std::abs(term);
    out.total += summand;
    out.summands.emplace_back(N_start + static_cast<Index>(i), summand);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Series terms.
// ---------------------------------------------------------------------------

namespace {

struct SeriesCore {
  std::vector<SeriesTermRow> rows;
  double tau = 0.0;
  Index n_lo = 0;
  Index n_hi = 0;
};

SeriesCore series_core(const Spectrum& spec, const WeightSequence& w,
                       const PerturbationMatrix& V, Index s_max, Index N,
                       const Eigen::MatrixXcd& F, Index quad_nodes) {
  const Index size = V.size();
  require(s_max >= 0 && s_max <= 6, "series term: s must be in 0..6");
  require(quad_nodes >= 16, "series term: need at least 16 nodes");
  require(F.rows() == size, "series term: vector length must match V");
  require(F.cols() >= 1, "series term: no vectors given");
  const Index n_hi = size - size / 8;
  require(N >= 1 && N <= n_hi, "series term: N outside the usable range");

  SeriesCore core;
  core.n_lo = N;
  core.n_hi = n_hi;
  const Index horizon = std::max<Index>(1000, 8 * size);
  core.tau = tau_N(spec, w, N, horizon, 10 * horizon);

  const Eigen::MatrixXcd m =
      V.values().topLeftCorner(size, size).transpose();
  const Eigen::MatrixXd m_abs2 = m.cwiseAbs2();
  const Index draws = F.cols();

  // lhs accumulators: per (s, draw).
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(s_max + 1, draws);
  Eigen::MatrixXcd node_acc(s_max + 1, draws);

  for (Index n = N; n <= n_hi; ++n) {
    const double radius = gaps(spec, n).r;
    const Complex center{mu(spec, n), 0.0};
    node_acc.setZero();
    for (Index q = 0; q < quad_nodes; ++q) {
      double theta = 2.0 * std::numbers::pi * static_cast<double>(q) /
                     static_cast<double>(quad_nodes);
      Complex e{std::cos(theta), std::sin(theta)};
      Complex z = center + radius * e;

      Eigen::VectorXcd kv = k_diag(spec, z, size);
      Eigen::VectorXcd d = kv.cwiseProduct(kv);  // diagonal of K^2
      Eigen::VectorXd a = d.cwiseAbs();
      double hs = std::sqrt(a.dot(m_abs2 * a));
      if (hs > 0.5) {
        throw std::runtime_error(
            "series term: Hilbert-Schmidt norm of B exceeds 1/2 at a node "
            "(n = " +
            std::to_string(n) + ", value " + num17(hs) + ")");
      }

      Eigen::MatrixXcd y = d.asDiagonal() * F;
      for (Index s = 0; s <= s_max; ++s) {
        Eigen::MatrixXcd x = m * y;
        y = d.asDiagonal() * x;
        for (Index c = 0; c < draws; ++c) {
          node_acc(s, c) += e * F.col(c).dot(y.col(c));
        }
      }
    }
    double scale = radius / static_cast<double>(quad_nodes);
    for (Index s = 0; s <= s_max; ++s) {
      for (Index c = 0; c < draws; ++c) {
        lhs(s, c) += std::abs(scale * node_acc(s, c));
      }
    }
  }

  for (Index s = 0; s <= s_max; ++s) {
    for (Index c = 0; c < draws; ++c) {
      double f2 = F.col(c).squaredNorm();
      SeriesTermRow row;
      row.s = s;
      row.draw = c;
      row.lhs = lhs(s, c);
      row.bound_geom = std::pow(2.0, static_cast<double>(s) + 2.0) *
                       std::pow(core.tau, static_cast<double>(s) + 1.0) * f2;
      row.bound_half = std::pow(2.0, -static_cast<double>(s)) * f2;
      core.rows.push_back(row);
    }
  }
  return core;
}

}  // namespace

SeriesTermCheck series_term_check(const Spectrum& spec,
                                  const WeightSequence& w,
                                  const PerturbationMatrix& V, Index s,
                                  Index N, const Eigen::VectorXcd& f,
                                  Index quad_nodes) {
  SeriesCore core = series_core(spec, w, V, s, N, f, quad_nodes);
  SeriesTermCheck out;
  const SeriesTermRow& row = core.rows.at(static_cast<std::size_t>(s));
  out.lhs = row.lhs;
  out.bound_geom = row.bound_geom;
  out.bound_half = row.bound_half;
  out.tau = core.tau;
  out.n_lo = core.n_lo;
  out.n_hi = core.n_hi;
  return out;
}

std::vector<SeriesTermRow> series_term_table(const Spectrum& spec,
                                             const WeightSequence& w,
                                             const PerturbationMatrix& V,
                                             Index s_max, Index N,
                                             const Eigen::MatrixXcd& F,
                                             Index quad_nodes) {
  return series_core(spec, w, V, s_max, N, F, quad_nodes).rows;
}

double basis_condition_number(const std::vector<EigenPair>& eigs, Index lo,
                              Index hi) {
  require(lo >= 1 && hi >= lo && hi <= static_cast<Index>(eigs.size()),
          "condition number: window out of range");
  const Index n = eigs.front().right.size();
  std::vector<Index> picks;
  for (Index p = lo; p <= hi; ++p) {
    if (!eigs[static_cast<std::size_t>(p - 1)].clustered) picks.push_back(p);
  }
  require(!picks.empty(), "condition number: window has no simple eigenvalues");
  Eigen::MatrixXcd cols(n, static_cast<Index>(picks.size()));
  for (std::size_t i = 0; i < picks.size(); ++i) {
    cols.col(static_cast<Index>(i)) =
        eigs[static_cast<std::size_t>(picks[i] - 1)].right;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(cols);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return svd.singularValues()(0) / smin;
}

// ---------------------------------------------------------------------------
// Aggregate report.
// ---------------------------------------------------------------------------

SpectralReport build_spectral_report(const Spectrum& spec,
                                     const PerturbationMatrix& V,
                                     const SpectralOptions& opts) {
  SpectralReport rep;
  rep.size = opts.size;
  rep.buffer = opts.buffer > 0 ? opts.buffer : opts.size / 8;
  rep.N0 = opts.N0;
  require(rep.size >= 2 && rep.size <= V.size(),
          "spectral report: size must be in [2, V.size()]");
  require(rep.N0 >= 1 && rep.N0 < rep.size - rep.buffer,
          "spectral report: N0 must sit below the edge buffer");
  require(opts.quad_nodes >= 32,
          "spectral report: need at least 32 nodes for the halving check");

  TruncatedOperator t = build_truncated_T(spec, V, rep.size);
  rep.eigs = eigensystem(t);
  Eigen::VectorXcd lambdas(rep.size);
  for (Index i = 0; i < rep.size; ++i) lambdas(i) = rep.eigs[i].lambda;

  rep.regions = regions(spec, rep.N0, opts.box_h1, opts.box_h2, rep.size);
  rep.localization =
      localization_report(rep.eigs, rep.regions, spec, rep.size, rep.buffer);

  // Discs with exactly one simple non-excluded eigenvalue get a rank-1 row.
  // disc_owner[r] = eigenvalue position for region r when cleanly localized.
  std::vector<Index> disc_owner(rep.regions.size(), 0);
  for (const LocalizationRow& row : rep.localization.rows) {
    if (row.region < 0 || row.edge_excluded) continue;
    std::size_t r = static_cast<std::size_t>(row.region);
    disc_owner[r] = rep.localization.counts[r] == 1 ? row.position : 0;
  }
  std::vector<EigenPair> clean;
  const Index n_usable = rep.size - rep.buffer;
  for (std::size_t r = 0; r < rep.regions.size(); ++r) {
    if (rep.regions[r].kind != Region::Kind::disc) continue;
    if (rep.regions[r].index > n_usable || disc_owner[r] == 0) continue;
    const EigenPair& p =
        rep.eigs[static_cast<std::size_t>(disc_owner[r] - 1)];
    if (p.clustered) continue;
    ProjectionRow pr;
    pr.n = rep.regions[r].index;
    pr.norm = projection_norm(p);
    pr.rank = 1;
    // Rank-1 projections are idempotent by construction; the honest
    // quadrature-side residual is reported in contour_checks.
    pr.idem_residual =
        std::abs(p.left.dot(p.right) - p.pairing) / std::norm(p.pairing);
    rep.projections.push_back(pr);
    clean.push_back(p);
  }

  // Closed-form disjointness over an evenly strided sample of the clean
  // rank-1 family (all of it when small), keeping the cost desk-scale.
  if (!clean.empty()) {
    std::vector<EigenPair> sample;
    const std::size_t cap = 64;
    std::size_t stride = std::max<std::size_t>(1, clean.size() / cap);
    for (std::size_t i = 0; i < clean.size(); i += stride) {
      sample.push_back(clean[i]);
    }
    rep.disjointness = disjointness_residual(sample);
  }

  // Contour treatment of the first few clean discs: agreement with the
  // rank-1 formula, node-halving stability, idempotency, rank.
  Index sampled = 0;
  for (std::size_t r = 0;
       r < rep.regions.size() && sampled < opts.contour_samples; ++r) {
    if (rep.regions[r].kind != Region::Kind::disc) continue;
    if (rep.regions[r].index > n_usable || disc_owner[r] == 0) continue;
    const EigenPair& p =
        rep.eigs[static_cast<std::size_t>(disc_owner[r] - 1)];
    if (p.clustered) continue;
    Complex center{rep.regions[r].center, 0.0};
    double radius = rep.regions[r].radius;
    Eigen::MatrixXcd pc = riesz_projection_contour(t, lambdas, center, radius,
                                                   opts.quad_nodes);
    Eigen::MatrixXcd ph = riesz_projection_contour(t, lambdas, center, radius,
                                                   opts.quad_nodes / 2);
    ContourSample cs;
    cs.n = rep.regions[r].index;
    cs.eig_agreement = (pc - riesz_projection_eig(p)).norm();
    cs.node_stability = (pc - ph).norm();
    cs.idem_residual = (pc * pc - pc).norm();
    cs.rank = std::llround(pc.trace().real());
    rep.contour_checks.push_back(cs);
    ++sampled;
  }

  // Box projection over the rectangle boundary.
  Index box_count = rep.localization.counts.empty()
                        ? 0
                        : rep.localization.counts[0];
  if (opts.box_quadrature) {
    Eigen::MatrixXcd s0 =
        riesz_projection_rect(t, lambdas, -opts.box_h1, rep.regions[0].right,
                              opts.box_h2, opts.quad_nodes);
    rep.box_rank = std::llround(s0.trace().real());
    rep.box_idem = (s0 * s0 - s0).norm();
    rep.box_sampled = true;
  } else {
    rep.box_rank = box_count;
  }

  Index disc_total = 0;
  for (std::size_t r = 1; r < rep.regions.size(); ++r) {
    disc_total += rep.localization.counts[r];
  }
  rep.rank_gap = (rep.size - rep.localization.excluded) -
                 (rep.box_rank + disc_total);

  // Quadratic-sum samples over seeded random unit vectors.
  GaussianStream gauss(opts.seed);
  for (Index d = 0; d < opts.riesz_draws; ++d) {
    Eigen::VectorXcd f = gauss.unit_vector(rep.size);
    double total = 0.0;
    for (std::size_t r = 0; r < rep.regions.size(); ++r) {
      if (rep.regions[r].kind != Region::Kind::disc) continue;
      if (rep.regions[r].index > n_usable || disc_owner[r] == 0) continue;
      const EigenPair& p =
          rep.eigs[static_cast<std::size_t>(disc_owner[r] - 1)];
      if (p.clustered) continue;
      Complex with_p = f.dot(p.right) * p.left.dot(f) / p.pairing;
      double base = std::norm(f(rep.regions[r].index - 1));
      total += std::abs(with_p - base);
    }
    rep.riesz_sums.push_back(total);
  }

  Index cond_hi = n_usable;
  rep.condition_number = basis_condition_number(rep.eigs, rep.N0 + 1, cond_hi);

  std::ostringstream sum;
  sum << "truncation " << rep.size << ", edge buffer " << rep.buffer
      << ", box cut N0 = " << rep.N0 << "\n";
  sum << "eigenvalues: " << rep.eigs.size() << " ("
      << rep.localization.excluded << " edge-excluded, "
      << rep.localization.outside << " outside all regions)\n";
  sum << "clean rank-1 discs: " << rep.projections.size() << " of "
      << (rep.regions.size() - 1) << "; disjointness residual "
      << num17(rep.disjointness) << "\n";
  for (const ContourSample& cs : rep.contour_checks) {
    sum << "contour check at disc " << cs.n << ": agreement "
        << num17(cs.eig_agreement) << ", node stability "
        << num17(cs.node_stability) << ", idempotency "
        << num17(cs.idem_residual) << ", rank " << cs.rank << "\n";
  }
  if (rep.box_sampled) {
    sum << "box projection: rank " << rep.box_rank << ", idempotency "
        << num17(rep.box_idem) << "\n";
  } else {
    sum << "box projection: rank " << rep.box_rank
        << " (eigenvalue count; quadrature disabled)\n";
  }
  sum << "rank additivity gap: " << rep.rank_gap << "\n";
  if (!rep.riesz_sums.empty()) {
    double worst = *std::max_element(rep.riesz_sums.begin(),
                                     rep.riesz_sums.end());
    sum << "quadratic sums over " << rep.riesz_sums.size()
        << " unit draws: max " << num17(worst) << "\n";
  }
  sum << "eigenvector condition number on (" << rep.N0 << ", " << cond_hi
      << "]: " << num17(rep.condition_number) << "\n";
  rep.summary = sum.str();
  return rep;
}

// ---------------------------------------------------------------------------
// CSV writers.
// ---------------------------------------------------------------------------

void write_eigenvalues_csv(const SpectralReport& rep, std::ostream& out) {
  out << "index,re,im,region\n";
  for (const LocalizationRow& row : rep.localization.rows) {
    std::string label = "outside";
    if (row.edge_excluded) {
      label = "edge";
    } else if (row.region >= 0) {
      const Region& r = rep.regions[static_cast<std::size_t>(row.region)];
      label = r.kind == Region::Kind::box ? "box" : std::to_string(r.index);
    }
    out << row.position << ',' << num17(row.lambda.real()) << ','
        << num17(row.lambda.imag()) << ',' << label << '\n';
  }
}

void write_projections_csv(const SpectralReport& rep, std::ostream& out) {
  out << "n,norm,rank,idem_residual\n";
  for (const ProjectionRow& pr : rep.projections) {
    out << pr.n << ',' << num17(pr.norm) << ',' << pr.rank << ','
        << num17(pr.idem_residual) << '\n';
  }
}

void write_riesz_sums_csv(const SpectralReport& rep, std::ostream& out) {
  out << "draw,partial_sum\n";
  for (std::size_t i = 0; i < rep.riesz_sums.size(); ++i) {
    out << (i + 1) << ',' << num17(rep.riesz_sums[i]) << '\n';
  }
}

}  // namespace rieszlab
