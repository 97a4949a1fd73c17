#pragma once

#include "chaingap/analytic_spectra.hpp"
#include "chaingap/chain_model.hpp"
#include "chaingap/eigensolver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chaingap {

// ------ low-rank perturbation of the modal block ------

enum class Slot { P, Q };

struct PortTerm {
  Slot slot;
  int site;  // 0-based
  double coeff;
};
using Port = std::vector<PortTerm>;

// G(z) = V^T (z - A)^-1 U for A = (i a, -1/m; K, -i a) diagonalised by the modes of K,
// with U, V assembled column by column from the ports
class ModalResolvent {
 public:
  ModalResolvent(const SymmetricEigensystem& sys, double mass, double a, std::vector<Port> inputs,
                 std::vector<Port> outputs);

  int ports() const { return ports_; }
  int modes() const { return modes_; }
  double mass() const { return mass_; }
  double a() const { return a_; }

  cplx pole(int j, int sign) const { return cplx(0, sign) * root_(j); }
  ComplexVector poles() const;  // ordered (0,+), (0,-), (1,+), ...

  ComplexMatrix eval(cplx z) const;
  ComplexMatrix derivative(cplx z) const;
  ComplexMatrix residue(int j, int sign) const;
  // G minus its principal part at pole (j, sign)
  ComplexMatrix regular_part(cplx z, int j, int sign) const;
  // |v_j(1)^2 * momentum residue|, the natural size of the friction shift of mode j
  double anchor_scale(int j, int sign) const;

  double nearest_pole(cplx z, int* j = nullptr, int* sign = nullptr) const;

  // d/dz log det(z - A - U V^T)
  cplx log_derivative(cplx z) const;
  cplx det_reduced(cplx z) const;  // det(I - G(z))

 private:
  int modes_, ports_;
  double mass_, a_;
  RealVector lambda_, first_sq_;
  ComplexVector root_;
  // numerator alpha z + beta per (r, s, j), stored at (r * ports + s) * modes + j
  std::vector<cplx> alpha_, beta_;

  cplx denom(cplx z, int j) const { return (z - root_(j) * cplx(0, 1)) * (z + root_(j) * cplx(0, 1)); }
};

// friction ports sqrt(gamma) e_{p_f}; block_sign selects the magnetic block
ModalResolvent friction_resolvent(const ChainConfig& cfg, int block_sign = +1);
ModalResolvent friction_resolvent(const ChainConfig& cfg, const SymmetricEigensystem& sys, int block_sign);
// modes of T_omega; the boundary correction P joins the friction in the perturbation
ModalResolvent critical_resolvent(const ChainConfig& cfg);

// W_F(lambda) = -i G(-i lambda)
ComplexMatrix wigner_eval(cplx lambda, const ModalResolvent& res);

struct RootLocalization {
  int index{0};
  int sign{+1};
  cplx reference;  // mu_i^s as a drift eigenvalue
  cplx root;       // friction-perturbed drift eigenvalue
  double distance{0};
  double anchor_scale{0};
  double ratio{0};
  double real_part_ratio{0};
  double residual{0};  // |W_F(i root) + i|
  bool verified{false};
  std::string method;
};

RootLocalization localize_root(int i, int sign, const ModalResolvent& res);
std::vector<RootLocalization> localize_all(const ModalResolvent& res, int threads = 1);

// number of zeros of det(I - G) inside |z - c| < r and, when exactly one, its location
struct ContourCount {
  int zeros{0};
  int poles{0};
  std::optional<cplx> single_zero;
};
ContourCount contour_count(const ModalResolvent& res, cplx center, double radius);

// every eigenvalue of A + U V^T (Aberth iteration on the reduced determinant)
ComplexVector all_roots(const ModalResolvent& res);

// Spec(M) reassembled from the Wigner roots of the block(s)
ComplexVector wigner_spectrum(const ChainConfig& cfg);

struct WignerGap {
  GapResult gap;
  int mode_index{-1};
  int mode_sign{0};
};
WignerGap gap_from_wigner(const ChainConfig& cfg);

// localisation of the top mode with P treated as a perturbation (|mu(N) - mu_N^+|)
RootLocalization critical_localization(const ChainConfig& cfg);

}  // namespace chaingap
