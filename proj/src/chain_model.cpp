#include "chaingap/chain_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chaingap {

void validate(const ChainConfig& cfg) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (cfg.n_osc < 1) fail("n_osc must be >= 1");
  if (!(cfg.mass > 0) || !std::isfinite(cfg.mass)) fail("mass must be positive");
  if (!(cfg.coupling > 0) || !std::isfinite(cfg.coupling)) fail("coupling must be positive");
  if (!(cfg.pinning >= 0) || !std::isfinite(cfg.pinning)) fail("pinning must be nonnegative");
  if (!std::isfinite(cfg.magnetic)) fail("magnetic must be finite");
  if (!std::isfinite(cfg.nnn)) fail("nnn must be finite");
  if (!(cfg.friction > 0) || !std::isfinite(cfg.friction)) fail("friction must be positive");
  if (cfg.friction_set.empty()) fail("friction_set must be nonempty");
  for (int s : cfg.friction_set)
    if (s != 1 && s != cfg.n_osc) fail("friction_set entries must be 1 or n_osc");
  for (int s : frictional_sites(cfg))
    if (!(temperature_at(cfg, s) > 0) || !std::isfinite(temperature_at(cfg, s)))
      fail("bath temperatures must be positive");
  if (cfg.magnetic != 0.0 && cfg.nnn != 0.0) fail("magnetic field and nnn interaction cannot be combined");
}

std::vector<int> frictional_sites(const ChainConfig& cfg) {
  std::vector<int> out;
  for (int s : cfg.friction_set) out.push_back(s - 1);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double temperature_at(const ChainConfig& cfg, int site0) {
  return site0 == 0 ? cfg.temp_left : cfg.temp_right;
}

std::string to_string(Boundary b) { return b == Boundary::Dirichlet ? "dirichlet" : "neumann"; }
std::string to_string(NnnRank r) { return r == NnnRank::RankOne ? "one" : "two"; }

std::string summary(const ChainConfig& cfg) {
  std::ostringstream os;
  os << "n_osc=" << cfg.n_osc << " mass=" << cfg.mass << " coupling=" << cfg.coupling
     << " pinning=" << cfg.pinning << " magnetic=" << cfg.magnetic << " nnn=" << cfg.nnn
     << " friction=" << cfg.friction << " friction_set=";
  for (std::size_t k = 0; k < cfg.friction_set.size(); ++k)
    os << (k ? "," : "") << cfg.friction_set[k];
  os << " boundary=" << to_string(cfg.boundary) << " nnn_rank=" << to_string(cfg.nnn_rank);
  return os.str();
}

// ------ builders ------

RealMatrix build_laplacian(Boundary bc, int n, double xi) {
  if (n < 1) throw std::invalid_argument("build_laplacian: invalid dimension");
  RealMatrix L = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, i) = 2 * xi;
    if (i + 1 < n) L(i, i + 1) = L(i + 1, i) = -xi;
  }
  if (bc == Boundary::Neumann) {
    L(0, 0) -= xi;
    L(n - 1, n - 1) -= xi;
  }
  return L;
}

RealMatrix nnn_bulk_operator(const ChainConfig& cfg) {
  const int n = cfg.n_osc;
  const double w = cfg.nnn;
  RealMatrix L = build_laplacian(cfg.boundary, n, 1.0);
  RealMatrix T = (cfg.coupling + 4 * w) * L - w * (L * L);
  T.diagonal().array() += cfg.pinning;
  return T;
}

RealMatrix nnn_boundary_correction(const ChainConfig& cfg) {
  const int n = cfg.n_osc;
  const double w = cfg.nnn;
  RealMatrix P = RealMatrix::Zero(n, n);
  if (w == 0.0) return P;
  const bool both = cfg.nnn_rank == NnnRank::RankTwo;
  if (cfg.boundary == Boundary::Dirichlet) {
    P(0, 0) += -2 * w;
    if (both) P(n - 1, n - 1) += -2 * w;
  } else {
    if (n < 2) return P;
    Eigen::Matrix2d lam;
    lam << -1, 1, 1, -1;
    P.block<2, 2>(0, 0) += w * lam;
    if (both) P.block<2, 2>(n - 2, n - 2) += w * lam;
  }
  return P;
}

RealMatrix build_interaction(const ChainConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_osc;
  if (cfg.nnn == 0.0) {
    RealMatrix B = build_laplacian(cfg.boundary, n, cfg.coupling);
    B.diagonal().array() += cfg.pinning + cfg.magnetic * cfg.magnetic / (2 * cfg.mass);
    return B;
  }
  return nnn_bulk_operator(cfg) + nnn_boundary_correction(cfg);
}

RealMatrix friction_matrix(const ChainConfig& cfg) {
  RealMatrix G = RealMatrix::Zero(cfg.n_osc, cfg.n_osc);
  for (int s : frictional_sites(cfg)) G(s, s) = cfg.friction;
  return G;
}

namespace {

RealMatrix planar_rotation(int n) {
  RealMatrix J = RealMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    J(2 * i, 2 * i + 1) = -1;
    J(2 * i + 1, 2 * i) = 1;
  }
  return J;
}

RealMatrix kron_identity2(const RealMatrix& A) {
  const int n = static_cast<int>(A.rows());
  RealMatrix out = RealMatrix::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(2 * i, 2 * j) = out(2 * i + 1, 2 * j + 1) = A(i, j);
  return out;
}

}  // namespace

RealMatrix build_drift(const ChainConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_osc;
  const double m = cfg.mass;
  const RealMatrix B = build_interaction(cfg);
  const RealMatrix G = friction_matrix(cfg);
  if (!is_planar(cfg)) {
    RealMatrix M = RealMatrix::Zero(2 * n, 2 * n);
    M.topLeftCorner(n, n) = G;
    M.topRightCorner(n, n) = -RealMatrix::Identity(n, n) / m;
    M.bottomLeftCorner(n, n) = B;
    return M;
  }
  const int d = 2 * n;
  const RealMatrix J = planar_rotation(n);
  RealMatrix M = RealMatrix::Zero(2 * d, 2 * d);
  M.topLeftCorner(d, d) = kron_identity2(G) + (cfg.magnetic / m) * J;
  M.topRightCorner(d, d) = -RealMatrix::Identity(d, d) / m;
  M.bottomLeftCorner(d, d) = kron_identity2(B);
  M.bottomRightCorner(d, d) = -(cfg.magnetic / m) * J;
  return M;
}

RealMatrix dynamics_matrix(const ChainConfig& cfg) { return build_drift(cfg).transpose(); }

ComplexMatrix magnetic_block(const ChainConfig& cfg, int sign, bool with_friction) {
  validate(cfg);
  const int n = cfg.n_osc;
  const double m = cfg.mass;
  const cplx ia(0.0, sign * cfg.magnetic / m);
  ComplexMatrix A = ComplexMatrix::Zero(2 * n, 2 * n);
  if (with_friction) A.topLeftCorner(n, n) = friction_matrix(cfg).cast<cplx>();
  A.topLeftCorner(n, n).diagonal().array() += ia;
  A.topRightCorner(n, n) = -ComplexMatrix::Identity(n, n) / m;
  A.bottomLeftCorner(n, n) = build_interaction(cfg).cast<cplx>();
  A.bottomRightCorner(n, n).diagonal().array() -= ia;
  return A;
}

std::pair<ComplexMatrix, ComplexMatrix> reduce_magnetic(const ChainConfig& cfg) {
  if (cfg.nnn != 0.0) throw ConfigError("reduce_magnetic: configuration has nnn interaction");
  return {magnetic_block(cfg, +1), magnetic_block(cfg, -1)};
}

RealMatrix build_noise(const ChainConfig& cfg) {
  validate(cfg);
  const int dim = phase_dim(cfg);
  const int comps = is_planar(cfg) ? 2 : 1;
  RealMatrix S = RealMatrix::Zero(dim, dim);
  for (int s : frictional_sites(cfg))
    for (int c = 0; c < comps; ++c) {
      const int k = comps * s + c;
      S(k, k) = 2 * cfg.friction * cfg.mass * temperature_at(cfg, s);
    }
  return S;
}

RealMatrix noise_factor(const ChainConfig& cfg) {
  validate(cfg);
  const int comps = is_planar(cfg) ? 2 : 1;
  const auto sites = frictional_sites(cfg);
  RealMatrix D = RealMatrix::Zero(phase_dim(cfg), comps * static_cast<int>(sites.size()));
  int col = 0;
  for (int s : sites)
    for (int c = 0; c < comps; ++c)
      D(comps * s + c, col++) = std::sqrt(2 * cfg.friction * cfg.mass * temperature_at(cfg, s));
  return D;
}

}  // namespace chaingap
