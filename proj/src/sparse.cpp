#include "gldeg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gldeg/errors.hpp"
#include "gldeg/parallel.hpp"

namespace gldeg {

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double s = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    });
}

DofMap::DofMap(const Mesh& mesh)
    : mesh_(&mesh),
      dof_(mesh.vertex_count(), 0),
      fixed_(mesh.vertex_count(), 0.0),
      loop_state_(mesh.loop_count(), 0),
      loop_value_(mesh.loop_count(), 0.0),
      vertex_fixed_(mesh.vertex_count(), 0),
      vertex_value_(mesh.vertex_count(), 0.0),
      group_dof_(mesh.loop_count(), -1) {}

void DofMap::fix_vertex(int vertex, double value) {
    vertex_fixed_.at(vertex) = 1;
    vertex_value_[vertex] = value;
}

void DofMap::fix_loop(int loop, double value) {
    loop_state_.at(loop) = 1;
    loop_value_[loop] = value;
}

void DofMap::group_loop(int loop) { loop_state_.at(loop) = 2; }

void DofMap::build() {
    n_dof_ = 0;
    for (int v = 0; v < mesh_->vertex_count(); ++v) {
        int k = mesh_->vertex_kind[v];
        if (vertex_fixed_[v]) {
            dof_[v] = kFixed;
            fixed_[v] = vertex_value_[v];
        } else if (k >= 0 && loop_state_[k] == 1) {
            dof_[v] = kFixed;
            fixed_[v] = loop_value_[k];
        } else if (k >= 0 && loop_state_[k] == 2) {
            dof_[v] = -2; // resolved below once the group dof exists
        } else {
            dof_[v] = n_dof_++;
        }
    }
    for (int l = 0; l < static_cast<int>(loop_state_.size()); ++l)
        if (loop_state_[l] == 2) group_dof_[l] = n_dof_++;
    for (int v = 0; v < mesh_->vertex_count(); ++v)
        if (dof_[v] == -2) dof_[v] = group_dof_[mesh_->vertex_kind[v]];
}

namespace {

struct ElementMatrix {
    int dof[3];
    double fixed[3];
    double k[3][3];
};

std::vector<ElementMatrix> element_matrices(const Mesh& mesh, const DofMap& map) {
    std::vector<ElementMatrix> elems(mesh.triangle_count());
    parallel_for(mesh.triangle_count(), [&](std::size_t t) {
        ElementMatrix e;
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            e.dof[i] = map.dof(tr[i]);
            e.fixed[i] = map.fixed_value(tr[i]);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                e.k[i][j] = mesh.tri_area[t] * mesh.tri_grad[t][i].dot(mesh.tri_grad[t][j]);
        elems[t] = e;
    });
    return elems;
}

} // namespace

AssembledSystem assemble_laplace(const Mesh& mesh, const DofMap& map) {
    auto elems = element_matrices(mesh, map);
    const int n = map.dof_count();

    std::vector<std::tuple<int, int, double>> coo;
    coo.reserve(9 * elems.size());
    AssembledSystem sys;
    sys.rhs.assign(n, 0.0);
    for (const ElementMatrix& e : elems) {
        for (int i = 0; i < 3; ++i) {
            if (e.dof[i] < 0) continue;
            for (int j = 0; j < 3; ++j) {
                if (e.dof[j] < 0)
                    sys.rhs[e.dof[i]] -= e.k[i][j] * e.fixed[j];
                else
                    coo.emplace_back(e.dof[i], e.dof[j], e.k[i][j]);
            }
        }
    }
    std::sort(coo.begin(), coo.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });

    CsrMatrix& A = sys.A;
    A.n = n;
    A.row_ptr.assign(n + 1, 0);
    int prev_r = -1, prev_c = -1;
    for (const auto& [r, c, v] : coo) {
        if (r == prev_r && c == prev_c) {
            A.val.back() += v;
        } else {
            A.col.push_back(c);
            A.val.push_back(v);
            A.row_ptr[r + 1] = static_cast<int>(A.col.size());
            prev_r = r;
            prev_c = c;
        }
    }
    for (int r = 0; r < n; ++r) A.row_ptr[r + 1] = std::max(A.row_ptr[r + 1], A.row_ptr[r]);
    return sys;
}

void add_gradient_load(const Mesh& mesh, const DofMap& map, const std::vector<Vec2>& G,
                       std::vector<double>& rhs) {
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        for (int i = 0; i < 3; ++i) {
            int d = map.dof(mesh.triangles[t][i]);
            if (d >= 0) rhs[d] += mesh.tri_area[t] * mesh.tri_grad[t][i].dot(G[t]);
        }
    }
}

namespace {

// IC(0) factor on the lower-triangular pattern of A, rows sorted ascending
// with the diagonal entry last.
struct IcFactor {
    CsrMatrix L;

    void apply(const std::vector<double>& r, std::vector<double>& z,
               std::vector<double>& tmp) const {
        const int n = L.n;
        // forward solve L y = r
        for (int i = 0; i < n; ++i) {
            double s = r[i];
            int end = L.row_ptr[i + 1] - 1;
            for (int k = L.row_ptr[i]; k < end; ++k) s -= L.val[k] * tmp[L.col[k]];
            tmp[i] = s / L.val[end];
        }
        // backward solve L^T z = y
        z = tmp;
        for (int i = n - 1; i >= 0; --i) {
            int end = L.row_ptr[i + 1] - 1;
            z[i] /= L.val[end];
            for (int k = L.row_ptr[i]; k < end; ++k) z[L.col[k]] -= L.val[k] * z[i];
        }
    }
};

// Up-looking IC(0); returns false when a pivot goes nonpositive so the caller
// can retry with a larger diagonal shift.
bool try_ic0(const CsrMatrix& A, double shift, IcFactor& f) {
    CsrMatrix& L = f.L;
    L.n = A.n;
    L.row_ptr.assign(A.n + 1, 0);
    L.col.clear();
    L.val.clear();
    for (int i = 0; i < A.n; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (A.col[k] <= i) {
                L.col.push_back(A.col[k]);
                L.val.push_back(A.col[k] == i ? A.val[k] * (1.0 + shift) : A.val[k]);
            }
        L.row_ptr[i + 1] = static_cast<int>(L.col.size());
    }
    std::vector<double> work(A.n, 0.0);
    std::vector<int> touched;
    for (int i = 0; i < A.n; ++i) {
        int begin = L.row_ptr[i], diag = L.row_ptr[i + 1] - 1;
        for (int k = begin; k <= diag; ++k) {
            work[L.col[k]] = L.val[k];
            touched.push_back(L.col[k]);
        }
        for (int k = begin; k < diag; ++k) {
            int j = L.col[k];
            double sum = 0.0;
            int jdiag = L.row_ptr[j + 1] - 1;
            for (int m = L.row_ptr[j]; m < jdiag; ++m) sum += L.val[m] * work[L.col[m]];
            work[j] = (work[j] - sum) / L.val[jdiag];
        }
        double d = work[i];
        for (int k = begin; k < diag; ++k) d -= work[L.col[k]] * work[L.col[k]];
        if (!(d > 0.0)) {
            for (int c : touched) work[c] = 0.0;
            return false;
        }
        work[i] = std::sqrt(d);
        for (int k = begin; k <= diag; ++k) L.val[k] = work[L.col[k]];
        for (int c : touched) work[c] = 0.0;
        touched.clear();
    }
    return true;
}

IcFactor ic0(const CsrMatrix& A) {
    IcFactor f;
    for (double shift : {0.0, 1e-3, 1e-2, 1e-1, 1.0})
        if (try_ic0(A, shift, f)) return f;
    throw NumericError("incomplete Cholesky failed at every diagonal shift");
}

} // namespace

CgResult solve_cg(const CsrMatrix& A, const std::vector<double>& rhs, std::vector<double>& x,
                  double tol, int max_iter) {
    const int n = A.n;
    x.assign(n, 0.0);
    double bnorm = 0.0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return {0, 0.0};

    IcFactor pre = ic0(A);
    std::vector<double> r = rhs, z(n), p(n), Ap(n), tmp(n);
    pre.apply(r, z, tmp);
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];

    CgResult res;
    for (int it = 0; it < max_iter; ++it) {
        A.multiply(p, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) throw NumericError("matrix not positive definite in CG");
        double alpha = rz / pAp;
        double rnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
            rnorm += r[i] * r[i];
        }
        rnorm = std::sqrt(rnorm);
        res.iterations = it + 1;
        res.relative_residual = rnorm / bnorm;
        if (res.relative_residual <= tol) return res;
        pre.apply(r, z, tmp);
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
        double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericError("conjugate gradient did not converge");
}

std::vector<double> DofMap::expand(const std::vector<double>& x) const {
    std::vector<double> out(dof_.size());
    for (std::size_t v = 0; v < dof_.size(); ++v)
        out[v] = dof_[v] == kFixed ? fixed_[v] : x[dof_[v]];
    return out;
}

} // namespace gldeg
