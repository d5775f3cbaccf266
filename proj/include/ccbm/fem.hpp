#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ccbm/mesh.hpp"

namespace ccbm {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Nodal Lagrange space of degree 1 or 2 on a triangle mesh. Degree 2 adds
// one node per mesh edge (placed at the midpoint).
class FeSpace {
public:
    FeSpace(const Mesh& mesh, int degree);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    // per element: 3 vertex dofs (degree 1) or 3 vertex + 3 edge dofs (degree 2)
    const std::vector<std::array<int, 6>>& element_dofs() const { return elem_dofs_; }
    int dofs_per_element() const { return degree_ == 1 ? 3 : 6; }

    // Boundary nodes ordered counterclockwise along the single loop of the
    // rectangle, starting nearest the (xmin, ymin) corner; arclen[i] is the
    // perimeter parameter of boundary_nodes()[i].
    const std::vector<int>& boundary_nodes() const { return bnd_nodes_; }
    const std::vector<double>& boundary_arclen() const { return bnd_arclen_; }
    // per boundary edge: dofs {a, b, mid} (mid = -1 for degree 1) and length
    const std::vector<std::array<int, 3>>& boundary_edge_dofs() const { return bnd_edge_dofs_; }
    const std::vector<double>& boundary_edge_lengths() const { return bnd_edge_len_; }
    // position of a node in the boundary loop, -1 for interior nodes
    const std::vector<int>& boundary_position() const { return bnd_pos_; }

private:
    const Mesh* mesh_;
    int degree_;
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 6>> elem_dofs_;
    std::vector<int> bnd_nodes_;
    std::vector<double> bnd_arclen_;
    std::vector<std::array<int, 3>> bnd_edge_dofs_;
    std::vector<double> bnd_edge_len_;
    std::vector<int> bnd_pos_;
};

// Nodal values of a complex-valued solution u = re + i*im.
struct ComplexField {
    Vec re, im;
    int degree = 1;
};

// Neumann flux g and Dirichlet measurement f, indexed like
// FeSpace::boundary_nodes().
struct CauchyData {
    Vec g, f;
};

// --- element matrices -------------------------------------------------------

// Stiffness (grad, grad).
SpMat assemble_stiffness(const FeSpace& space);
// Mass (w u, v) with a per-element constant weight (empty = unit weight).
SpMat assemble_mass(const FeSpace& space, const std::vector<double>& elem_weight = {});
// Boundary mass <u, v> over the whole outer boundary.
SpMat assemble_boundary_mass(const FeSpace& space);
// Scatter boundary-loop values into a full-length nodal vector (zeros inside).
Vec scatter_boundary(const FeSpace& space, const Vec& boundary_values);

// --- complex Robin block system ---------------------------------------------

// Realization of the sesquilinear form
//   a(w, v) = (grad w, grad v) + (mu w, v) + i beta <w, v>
// as the 2N x 2N real block matrix [[A, -beta B], [beta B, A]] with
// A = K + M_mu, factorized once and reused for any number of right-hand
// sides. The adjoint form (boundary sign -i beta) is the block transpose,
// so the same factorization serves the adjoint solves.
class BlockSystem {
public:
    BlockSystem(const FeSpace& space, const std::vector<double>& elem_mu, double beta);

    int scalar_size() const { return n_; }
    double beta() const { return beta_; }
    const SpMat& real_block() const { return A_; }     // K + M_mu
    const SpMat& boundary_block() const { return B_; } // unscaled boundary mass
    const SpMat& mass() const { return M_; }           // unit-weight mass
    const SpMat& stiffness() const { return K_; }

    // Solves the state system for block right-hand side [rhs_re; rhs_im].
    ComplexField solve(const Vec& rhs_re, const Vec& rhs_im) const;
    // Solves the adjoint system (boundary coupling sign flipped).
    ComplexField solve_adjoint(const Vec& rhs_re, const Vec& rhs_im) const;
    // Relative residual of a solution against a block right-hand side.
    double residual(const ComplexField& x, const Vec& rhs_re, const Vec& rhs_im,
                    bool adjoint_sign = false) const;

private:
    int n_;
    int degree_;
    double beta_;
    SpMat K_, M_, A_, B_, P_;
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

BlockSystem assemble_ccbm(const FeSpace& space, const std::vector<double>& elem_mu, double beta);

// mu = mu0 * chi_omega from the mesh's element-region tags.
std::vector<double> mu_from_region(const Mesh& mesh, double mu0);

// State problem: a(u, v) = <g, v> + i beta <f, v>. Checks the linear-system
// residual to 1e-10 relative and throws SolverFailure beyond it.
ComplexField solve_state(const BlockSystem& sys, const FeSpace& space, const CauchyData& data);

// Adjoint problem -Delta v + mu v = -2 u_i, d_nu v - i beta v = 0, with the
// source applied through the consistent mass matrix.
ComplexField solve_topo_adjoint(const BlockSystem& sys, const FeSpace& space, const Vec& u_i);

// The shape-stage adjoint solves the same discrete operator (transmission
// continuity is built into the conforming space); kept as its own entry
// point to mirror the two roles.
ComplexField solve_shape_adjoint(const BlockSystem& sys, const FeSpace& space, const Vec& u_i);

// Convenience wrappers that assemble on the fly.
ComplexField solve_state(const Mesh& mesh, const InclusionSpec* spec, double beta,
                         const CauchyData& data, int degree);

// J(mu) = int u_i^2 dx by quadrature exact for the element order.
double cost_J(const Vec& u_i, const FeSpace& space);

// --- real SPD solves ---------------------------------------------------------

// (K + M_mu) u = rhs via sparse Cholesky; used by the forward Neumann solve.
class SpdSystem {
public:
    SpdSystem(SpMat A);
    Vec solve(const Vec& rhs) const;
    const SpMat& matrix() const { return A_; }

private:
    SpMat A_;
    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
};

// H1 Riesz smoothing of an interface density G into a volumetric
// deformation field: (grad theta, grad phi) + (theta, phi) = -<G nu, phi>
// over H^1_0(Omega)^2, componentwise on the P1 vertex space. Also returns
// the H1 norm squared of the result (which equals -<G nu, theta>).
struct ExtensionResult {
    VectorField theta;
    double h1_norm_sq = 0;
};
ExtensionResult solve_sobolev_extension(const Mesh& mesh, const Interface& itf,
                                        const std::vector<double>& interface_density);

// P1 evaluation of a vertex field at an arbitrary point (linear search).
double evaluate_p1(const Mesh& mesh, const Vec& vertex_values, Vec2 p);

} // namespace ccbm
