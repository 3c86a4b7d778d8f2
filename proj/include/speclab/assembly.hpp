#pragma once

#include <vector>

#include "speclab/mesh.hpp"
#include "speclab/sparse.hpp"

namespace speclab {

/// Mesh-node <-> free-DOF numbering.
struct DofMap {
  std::vector<int> nodeToDof;  ///< -1 for constrained nodes
  std::vector<int> dofToNode;

  std::size_t num_dofs() const { return dofToNode.size(); }
  /// Nodal field from DOF values, zero on constrained nodes.
  std::vector<double> expand(std::span<const double> dofValues) const;
  std::vector<double> restrict_to_dofs(std::span<const double> nodal) const;
};

/// P1 stiffness matrix over all mesh nodes.
CsrMatrix assemble_stiffness(const Mesh& mesh);
/// Consistent P1 mass matrix over all mesh nodes.
CsrMatrix assemble_mass(const Mesh& mesh);

struct ReducedSystem {
  CsrMatrix K;
  CsrMatrix M;
  DofMap dofs;
  /// Integrals of the free hat functions (row sums of the unreduced mass).
  std::vector<double> load;
};

/// Delete rows and columns of constrained nodes. For Neumann meshes the
/// DofMap is the identity.
ReducedSystem apply_dirichlet(const CsrMatrix& K, const CsrMatrix& M, const Mesh& mesh);

/// Assemble and reduce in one step.
ReducedSystem assemble_reduced(const Mesh& mesh);

}  // namespace speclab
