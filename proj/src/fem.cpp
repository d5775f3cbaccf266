#include "ccbm/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ccbm/errors.hpp"

namespace ccbm {

namespace {

struct QuadPoint {
    double l0, l1, l2, w;
};

// degree-2 exact rule
const std::array<QuadPoint, 3> kQuadP1 = {{
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
}};

// degree-4 exact rule (6 points)
const std::array<QuadPoint, 6> kQuadP2 = {{
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
}};

void shape_values(int degree, const QuadPoint& q, double* N) {
    if (degree == 1) {
        N[0] = q.l0;
        N[1] = q.l1;
        N[2] = q.l2;
    } else {
        N[0] = q.l0 * (2 * q.l0 - 1);
        N[1] = q.l1 * (2 * q.l1 - 1);
        N[2] = q.l2 * (2 * q.l2 - 1);
        N[3] = 4 * q.l0 * q.l1;
        N[4] = 4 * q.l1 * q.l2;
        N[5] = 4 * q.l2 * q.l0;
    }
}

// gradients of barycentric coordinates (constant on the element)
void bary_gradients(const Vec2& p0, const Vec2& p1, const Vec2& p2, double area, Vec2* g) {
    double inv = 1.0 / (2.0 * area);
    g[0] = {(p1.y - p2.y) * inv, (p2.x - p1.x) * inv};
    g[1] = {(p2.y - p0.y) * inv, (p0.x - p2.x) * inv};
    g[2] = {(p0.y - p1.y) * inv, (p1.x - p0.x) * inv};
}

void shape_gradients(int degree, const QuadPoint& q, const Vec2* gl, Vec2* G) {
    if (degree == 1) {
        G[0] = gl[0];
        G[1] = gl[1];
        G[2] = gl[2];
    } else {
        G[0] = (4 * q.l0 - 1) * gl[0];
        G[1] = (4 * q.l1 - 1) * gl[1];
        G[2] = (4 * q.l2 - 1) * gl[2];
        G[3] = 4 * (q.l1 * gl[0] + q.l0 * gl[1]);
        G[4] = 4 * (q.l2 * gl[1] + q.l1 * gl[2]);
        G[5] = 4 * (q.l0 * gl[2] + q.l2 * gl[0]);
    }
}

} // namespace

FeSpace::FeSpace(const Mesh& mesh, int degree) : mesh_(&mesh), degree_(degree) {
    if (degree != 1 && degree != 2) throw std::invalid_argument("FeSpace: degree must be 1 or 2");

    const int nv = static_cast<int>(mesh.vertices.size());
    nodes_ = mesh.vertices;
    elem_dofs_.resize(mesh.triangles.size());

    std::map<std::pair<int, int>, int> edge_node; // sorted vertex pair -> midpoint dof
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        auto& d = elem_dofs_[t];
        d = {tr[0], tr[1], tr[2], -1, -1, -1};
        if (degree == 2) {
            for (int k = 0; k < 3; ++k) {
                int a = tr[k], b = tr[(k + 1) % 3];
                std::pair<int, int> key{std::min(a, b), std::max(a, b)};
                auto it = edge_node.find(key);
                int id;
                if (it == edge_node.end()) {
                    id = static_cast<int>(nodes_.size());
                    nodes_.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
                    edge_node.emplace(key, id);
                } else {
                    id = it->second;
                }
                d[3 + k] = id;
            }
        }
    }

    // Chain the oriented boundary edges into the single loop.
    std::map<int, int> next_edge; // start vertex -> index into mesh.boundary_edges
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e)
        next_edge[mesh.boundary_edges[e].a] = static_cast<int>(e);

    int start = mesh.boundary_edges.empty() ? -1 : mesh.boundary_edges[0].a;
    Vec2 corner{mesh.bounds.xmin, mesh.bounds.ymin};
    for (const auto& e : mesh.boundary_edges)
        if (dist(mesh.vertices[e.a], corner) < dist(mesh.vertices[start], corner)) start = e.a;

    bnd_pos_.assign(nodes_.size(), -1);
    double s = 0;
    int v = start;
    while (true) {
        auto it = next_edge.find(v);
        if (it == next_edge.end())
            throw MeshMismatch("FeSpace: boundary edges do not form a closed loop");
        const BoundaryEdge& be = mesh.boundary_edges[it->second];
        double len = dist(mesh.vertices[be.a], mesh.vertices[be.b]);

        bnd_pos_[be.a] = static_cast<int>(bnd_nodes_.size());
        bnd_nodes_.push_back(be.a);
        bnd_arclen_.push_back(s);

        int mid = -1;
        if (degree == 2) {
            mid = edge_node.at(std::pair<int, int>{std::min(be.a, be.b), std::max(be.a, be.b)});
            bnd_pos_[mid] = static_cast<int>(bnd_nodes_.size());
            bnd_nodes_.push_back(mid);
            bnd_arclen_.push_back(s + 0.5 * len);
        }
        bnd_edge_dofs_.push_back({be.a, be.b, mid});
        bnd_edge_len_.push_back(len);

        s += len;
        v = be.b;
        if (v == start) break;
    }
}

SpMat assemble_stiffness(const FeSpace& space) {
    const Mesh& mesh = space.mesh();
    const int n = space.num_nodes();
    const int nd = space.dofs_per_element();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * nd * nd);

    auto run = [&](const auto& rule) {
        Vec2 gl[3], G[6];
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tr = mesh.triangles[t];
            double area = mesh.triangle_area(static_cast<int>(t));
            bary_gradients(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]], area, gl);
            const auto& dofs = space.element_dofs()[t];
            double local[6][6] = {};
            for (const auto& q : rule) {
                shape_gradients(space.degree(), q, gl, G);
                for (int i = 0; i < nd; ++i)
                    for (int j = 0; j < nd; ++j) local[i][j] += q.w * area * dot(G[i], G[j]);
            }
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) trip.emplace_back(dofs[i], dofs[j], local[i][j]);
        }
    };
    if (space.degree() == 1)
        run(kQuadP1);
    else
        run(kQuadP2);

    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SpMat assemble_mass(const FeSpace& space, const std::vector<double>& elem_weight) {
    const Mesh& mesh = space.mesh();
    const int n = space.num_nodes();
    const int nd = space.dofs_per_element();
    if (!elem_weight.empty() && elem_weight.size() != mesh.triangles.size())
        throw MeshMismatch("assemble_mass: weight size does not match element count");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * nd * nd);

    auto run = [&](const auto& rule) {
        double N[6];
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            double w_elem = elem_weight.empty() ? 1.0 : elem_weight[t];
            if (w_elem == 0.0) continue;
            double area = mesh.triangle_area(static_cast<int>(t));
            const auto& dofs = space.element_dofs()[t];
            double local[6][6] = {};
            for (const auto& q : rule) {
                shape_values(space.degree(), q, N);
                for (int i = 0; i < nd; ++i)
                    for (int j = 0; j < nd; ++j) local[i][j] += q.w * area * w_elem * N[i] * N[j];
            }
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) trip.emplace_back(dofs[i], dofs[j], local[i][j]);
        }
    };
    if (space.degree() == 1)
        run(kQuadP1);
    else
        run(kQuadP2);

    SpMat M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat assemble_boundary_mass(const FeSpace& space) {
    const int n = space.num_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    const auto& edges = space.boundary_edge_dofs();
    const auto& lens = space.boundary_edge_lengths();
    for (std::size_t e = 0; e < edges.size(); ++e) {
        double L = lens[e];
        const auto& d = edges[e];
        if (space.degree() == 1) {
            const double m[2][2] = {{L / 3.0, L / 6.0}, {L / 6.0, L / 3.0}};
            int ids[2] = {d[0], d[1]};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) trip.emplace_back(ids[i], ids[j], m[i][j]);
        } else {
            const double c = L / 30.0;
            const double m[3][3] = {{4 * c, -c, 2 * c}, {-c, 4 * c, 2 * c}, {2 * c, 2 * c, 16 * c}};
            int ids[3] = {d[0], d[1], d[2]};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) trip.emplace_back(ids[i], ids[j], m[i][j]);
        }
    }
    SpMat B(n, n);
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

Vec scatter_boundary(const FeSpace& space, const Vec& boundary_values) {
    if (boundary_values.size() != static_cast<Eigen::Index>(space.boundary_nodes().size()))
        throw MeshMismatch("scatter_boundary: value count does not match boundary nodes");
    Vec full = Vec::Zero(space.num_nodes());
    for (std::size_t i = 0; i < space.boundary_nodes().size(); ++i)
        full[space.boundary_nodes()[i]] = boundary_values[static_cast<Eigen::Index>(i)];
    return full;
}

BlockSystem::BlockSystem(const FeSpace& space, const std::vector<double>& elem_mu, double beta)
    : n_(space.num_nodes()), degree_(space.degree()), beta_(beta) {
    if (!(beta > 0)) throw std::invalid_argument("BlockSystem: beta must be positive");
    K_ = assemble_stiffness(space);
    M_ = assemble_mass(space);
    A_ = elem_mu.empty() ? K_ : SpMat(K_ + assemble_mass(space, elem_mu));
    B_ = assemble_boundary_mass(space);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * A_.nonZeros() + 2 * B_.nonZeros());
    for (int k = 0; k < A_.outerSize(); ++k)
        for (SpMat::InnerIterator it(A_, k); it; ++it) {
            trip.emplace_back(it.row(), it.col(), it.value());
            trip.emplace_back(it.row() + n_, it.col() + n_, it.value());
        }
    for (int k = 0; k < B_.outerSize(); ++k)
        for (SpMat::InnerIterator it(B_, k); it; ++it) {
            trip.emplace_back(it.row(), it.col() + n_, -beta_ * it.value());
            trip.emplace_back(it.row() + n_, it.col(), beta_ * it.value());
        }
    P_.resize(2 * n_, 2 * n_);
    P_.setFromTriplets(trip.begin(), trip.end());
    P_.makeCompressed();

    lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu_->compute(P_);
    if (lu_->info() != Eigen::Success)
        throw SolverFailure("BlockSystem: sparse factorization failed");
}

ComplexField BlockSystem::solve(const Vec& rhs_re, const Vec& rhs_im) const {
    Vec b(2 * n_);
    b.head(n_) = rhs_re;
    b.tail(n_) = rhs_im;
    Vec x = lu_->solve(b);
    if (lu_->info() != Eigen::Success) throw SolverFailure("BlockSystem: solve failed");
    ComplexField u;
    u.re = x.head(n_);
    u.im = x.tail(n_);
    u.degree = degree_;
    return u;
}

ComplexField BlockSystem::solve_adjoint(const Vec& rhs_re, const Vec& rhs_im) const {
    // adjoint block matrix equals the transpose of the state block matrix
    Vec b(2 * n_);
    b.head(n_) = rhs_re;
    b.tail(n_) = rhs_im;
    Vec x = lu_->transpose().solve(b);
    ComplexField u;
    u.re = x.head(n_);
    u.im = x.tail(n_);
    u.degree = degree_;
    return u;
}

double BlockSystem::residual(const ComplexField& x, const Vec& rhs_re, const Vec& rhs_im,
                             bool adjoint_sign) const {
    Vec b(2 * n_), v(2 * n_);
    b.head(n_) = rhs_re;
    b.tail(n_) = rhs_im;
    v.head(n_) = x.re;
    v.tail(n_) = x.im;
    Vec r = adjoint_sign ? Vec(P_.transpose() * v - b) : Vec(P_ * v - b);
    double nb = b.norm();
    return nb > 0 ? r.norm() / nb : r.norm();
}

BlockSystem assemble_ccbm(const FeSpace& space, const std::vector<double>& elem_mu, double beta) {
    return BlockSystem(space, elem_mu, beta);
}

std::vector<double> mu_from_region(const Mesh& mesh, double mu0) {
    std::vector<double> mu(mesh.triangles.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        if (mesh.element_region[t]) mu[t] = mu0;
    return mu;
}

ComplexField solve_state(const BlockSystem& sys, const FeSpace& space, const CauchyData& data) {
    if (data.g.size() != static_cast<Eigen::Index>(space.boundary_nodes().size()))
        throw MeshMismatch("solve_state: Cauchy data does not match the boundary");
    double scale = data.g.lpNorm<Eigen::Infinity>() + data.f.lpNorm<Eigen::Infinity>();
    if (scale == 0) throw std::invalid_argument("solve_state: Cauchy data is trivial");

    Vec gh = scatter_boundary(space, data.g);
    Vec fh = scatter_boundary(space, data.f);
    Vec rhs_re = sys.boundary_block() * gh;
    Vec rhs_im = sys.beta() * (sys.boundary_block() * fh);
    ComplexField u = sys.solve(rhs_re, rhs_im);
    if (sys.residual(u, rhs_re, rhs_im) > 1e-10)
        throw SolverFailure("solve_state: residual above 1e-10 relative");
    return u;
}

ComplexField solve_topo_adjoint(const BlockSystem& sys, const FeSpace& space, const Vec& u_i) {
    if (u_i.size() != space.num_nodes())
        throw MeshMismatch("solve_topo_adjoint: source does not match node count");
    Vec rhs_re = -2.0 * (sys.mass() * u_i); // consistent mass application
    Vec rhs_im = Vec::Zero(space.num_nodes());
    ComplexField v = sys.solve_adjoint(rhs_re, rhs_im);
    if (sys.residual(v, rhs_re, rhs_im, true) > 1e-10)
        throw SolverFailure("solve_topo_adjoint: residual above 1e-10 relative");
    return v;
}

ComplexField solve_shape_adjoint(const BlockSystem& sys, const FeSpace& space, const Vec& u_i) {
    return solve_topo_adjoint(sys, space, u_i);
}

ComplexField solve_state(const Mesh& mesh, const InclusionSpec* spec, double beta,
                         const CauchyData& data, int degree) {
    FeSpace space(mesh, degree);
    std::vector<double> mu;
    if (spec && !spec->empty()) {
        Mesh marked = mark_region(mesh, *spec);
        mu = mu_from_region(marked, spec->mu0);
    }
    BlockSystem sys(space, mu, beta);
    return solve_state(sys, space, data);
}

double cost_J(const Vec& u_i, const FeSpace& space) {
    if (u_i.size() != space.num_nodes()) throw MeshMismatch("cost_J: field does not match space");
    SpMat M = assemble_mass(space);
    return u_i.dot(M * u_i);
}

SpdSystem::SpdSystem(SpMat A) : A_(std::move(A)) {
    ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    ldlt_->compute(A_);
    if (ldlt_->info() != Eigen::Success)
        throw SolverFailure("SpdSystem: Cholesky factorization failed");
}

Vec SpdSystem::solve(const Vec& rhs) const {
    Vec x = ldlt_->solve(rhs);
    if (ldlt_->info() != Eigen::Success) throw SolverFailure("SpdSystem: solve failed");
    return x;
}

ExtensionResult solve_sobolev_extension(const Mesh& mesh, const Interface& itf,
                                        const std::vector<double>& interface_density) {
    const int nv = static_cast<int>(mesh.vertices.size());
    FeSpace space(mesh, 1);

    std::vector<double> G_at(nv, 0.0);
    if (interface_density.size() != itf.nodes.size())
        throw MeshMismatch("solve_sobolev_extension: density size does not match interface nodes");
    for (std::size_t i = 0; i < itf.nodes.size(); ++i) G_at[itf.nodes[i]] = interface_density[i];

    // right-hand side -<G nu, phi> over the interface, componentwise;
    // P1 line elements with the per-edge outward normal
    Vec rhs_x = Vec::Zero(nv), rhs_y = Vec::Zero(nv);
    for (std::size_t e = 0; e < itf.edges.size(); ++e) {
        int a = itf.edges[e][0], b = itf.edges[e][1];
        double L = itf.edge_lengths[e];
        Vec2 nu = itf.edge_normals[e];
        double Ga = G_at[a], Gb = G_at[b];
        // int_e G phi_a ds = L (Ga/3 + Gb/6), same with roles swapped for phi_b
        double ra = L * (Ga / 3.0 + Gb / 6.0);
        double rb = L * (Ga / 6.0 + Gb / 3.0);
        rhs_x[a] -= nu.x * ra;
        rhs_x[b] -= nu.x * rb;
        rhs_y[a] -= nu.y * ra;
        rhs_y[b] -= nu.y * rb;
    }

    // reduce to interior vertices (homogeneous Dirichlet on the outer boundary)
    auto bmask = mesh.boundary_vertex_mask();
    std::vector<int> compact(nv, -1);
    int ni = 0;
    for (int i = 0; i < nv; ++i)
        if (!bmask[i]) compact[i] = ni++;

    SpMat H = assemble_stiffness(space) + assemble_mass(space);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < H.outerSize(); ++k)
        for (SpMat::InnerIterator it(H, k); it; ++it)
            if (compact[it.row()] >= 0 && compact[it.col()] >= 0)
                trip.emplace_back(compact[it.row()], compact[it.col()], it.value());
    SpMat Hi(ni, ni);
    Hi.setFromTriplets(trip.begin(), trip.end());
    SpdSystem sys(std::move(Hi));

    Vec bx(ni), by(ni);
    for (int i = 0; i < nv; ++i)
        if (compact[i] >= 0) {
            bx[compact[i]] = rhs_x[i];
            by[compact[i]] = rhs_y[i];
        }
    Vec tx = sys.solve(bx), ty = sys.solve(by);

    ExtensionResult out;
    out.theta.values.assign(nv, Vec2{0, 0});
    for (int i = 0; i < nv; ++i)
        if (compact[i] >= 0) out.theta.values[i] = {tx[compact[i]], ty[compact[i]]};
    out.h1_norm_sq = tx.dot(sys.matrix() * tx) + ty.dot(sys.matrix() * ty);
    return out;
}

double evaluate_p1(const Mesh& mesh, const Vec& vertex_values, Vec2 p) {
    if (vertex_values.size() < static_cast<Eigen::Index>(mesh.vertices.size()))
        throw MeshMismatch("evaluate_p1: field smaller than vertex count");
    const double tol = -1e-12;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
        double area = triangle_signed_area(a, b, c);
        double l0 = triangle_signed_area(p, b, c) / area;
        double l1 = triangle_signed_area(a, p, c) / area;
        double l2 = 1.0 - l0 - l1;
        if (l0 >= tol && l1 >= tol && l2 >= tol)
            return l0 * vertex_values[tr[0]] + l1 * vertex_values[tr[1]] + l2 * vertex_values[tr[2]];
    }
    throw GeometryMismatch("evaluate_p1: point outside the mesh");
}

} // namespace ccbm
