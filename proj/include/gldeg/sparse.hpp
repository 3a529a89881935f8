#pragma once

#include <vector>

#include "gldeg/mesh.hpp"

namespace gldeg {

struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
};

// Maps mesh vertices to solver unknowns. A vertex is free (own dof), fixed
// (Dirichlet value), or tied to a shared per-loop dof (floating constant).
struct DofMap {
    static constexpr int kFixed = -1;

    explicit DofMap(const Mesh& mesh);
    void fix_loop(int loop, double value);
    void fix_vertex(int vertex, double value);
    void group_loop(int loop); // one shared dof for the whole loop
    void build();              // assigns dof indices; call after fixing/grouping

    int dof(int vertex) const { return dof_[vertex]; }
    double fixed_value(int vertex) const { return fixed_[vertex]; }
    int loop_group_dof(int loop) const { return group_dof_[loop]; }
    int dof_count() const { return n_dof_; }

    // expands a dof vector back to per-vertex values
    std::vector<double> expand(const std::vector<double>& x) const;

private:
    const Mesh* mesh_;
    std::vector<int> dof_;
    std::vector<double> fixed_;
    std::vector<int> loop_state_; // 0 untouched, 1 fixed, 2 grouped
    std::vector<double> loop_value_;
    std::vector<char> vertex_fixed_;
    std::vector<double> vertex_value_;
    std::vector<int> group_dof_;
    int n_dof_ = 0;
};

struct AssembledSystem {
    CsrMatrix A;
    std::vector<double> rhs;
};

// Stiffness matrix of the P1 Laplacian under the dof map; Dirichlet values
// are folded into the right-hand side. Element matrices are computed in
// parallel, the scatter is serial and deterministic.
AssembledSystem assemble_laplace(const Mesh& mesh, const DofMap& map);

// Adds the load vector for integrand G (one Vec2 per triangle):
// rhs_i += sum_t area_t grad(phi_i) . G_t
void add_gradient_load(const Mesh& mesh, const DofMap& map, const std::vector<Vec2>& G,
                       std::vector<double>& rhs);

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Preconditioned conjugate gradient with incomplete Cholesky IC(0); throws
// NumericError if the relative residual fails to reach `tol`.
CgResult solve_cg(const CsrMatrix& A, const std::vector<double>& rhs, std::vector<double>& x,
                  double tol = 1e-12, int max_iter = 20000);

} // namespace gldeg
