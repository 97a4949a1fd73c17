#pragma once

#include "chaingap/chain_model.hpp"
#include "chaingap/eigensolver.hpp"

#include <functional>
#include <vector>

namespace chaingap {

// mode indices are 0-based, signs are +1 / -1
struct ModePair {
  int index{0};
  int sign{+1};
  cplx eigenvalue;
  ComplexVector eigenvector;   // unit norm, (v, u)
  double first_component_sq{0};
  cplx residue_weight;         // v(1)^2 times the momentum-momentum residue of the block resolvent
};

enum class ModeSource { ClosedForm, Secular, Dense };

struct InteractionModes {
  SymmetricEigensystem system;
  ModeSource source{ModeSource::Dense};
};

SymmetricEigensystem laplacian_eigensystem(Boundary bc, int n, double xi);

// Dirichlet closed forms with xi = 1, 0-based j
double dirichlet_eigenvalue(int n, int j);
double dirichlet_first_weight(int n, int j);  // v_j(1)^2

InteractionModes interaction_modes(const ChainConfig& cfg);

// modes of (i a, -1/m; K, -i a) from the eigensystem of K, ordered (0,+), (0,-), (1,+), ...
std::vector<ModePair> modes_from(const SymmetricEigensystem& sys, double mass, double a);

std::vector<ModePair> unforced_modes(const ChainConfig& cfg);

// nu_j of T_omega (Dirichlet), index order of the Laplacian modes
RealVector nnn_base_eigenvalues(const ChainConfig& cfg);
SymmetricEigensystem nnn_base_system(const ChainConfig& cfg);
std::vector<ModePair> nnn_unperturbed_modes(const ChainConfig& cfg);

// ------ secular equation for T_omega + P, rank one ------

struct SecularRoot {
  double value{0};        // perturbed eigenvalue
  double gap_to_base{0};  // |value - nu_j|
  int anchor{0};          // nearest base pole
  double offset{0};       // value - nu_anchor, kept to full relative precision
};

std::vector<SecularRoot> secular_solve(const ChainConfig& cfg);
RealMatrix perturbed_vectors(const ChainConfig& cfg, const std::vector<SecularRoot>& roots);
// W_omega at a root, evaluated in the anchored representation
double secular_function(const ChainConfig& cfg, const SecularRoot& root);

// ------ spacing diagnostics ------

struct SpacingReport {
  ComplexVector kappa;  // -i (mu_k - mu_ref), reference excluded
  std::vector<std::pair<int, int>> labels;
  double min_spacing{0};
  double anchor_scale{0};
  bool spacing_violation{false};
};

SpacingReport eigen_spacing(const std::vector<ModePair>& modes, int i, int sign);
const ModePair& find_mode(const std::vector<ModePair>& modes, int i, int sign);

// ------ Riemann sums of monotone functions ------

struct RiemannBracket {
  double lower{0};
  double sum{0};
  double upper{0};
  bool weakly_monotone{false};
};

RiemannBracket riemann_bracket(const std::function<double(double)>& f, int n, int k1, int k2);

}  // namespace chaingap
