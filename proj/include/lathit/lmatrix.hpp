#pragma once

// Algebra of bi-L-matrices and potential matrices acting on zero-sum vectors:
// the finite-dimensional objects R, P, S and the conversions between them
// (restriction to the zero-sum subspace, inversion, reconstruction of the
// bi-L extension, matrix exponentials and perturbed products).

#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "lathit/numeric.hpp"

namespace lathit {

struct ZeroSumVector {
    std::vector<double> values;
    double tol = kDefaultTol;

    ZeroSumVector() = default;
    ZeroSumVector(std::vector<double> v, double tolerance = kDefaultTol)
        : values(std::move(v)), tol(tolerance) {
        double s = 0;
        for (double x : values) s += x;
        if (std::fabs(s) > tol)
            throw validation_error("ZeroSumVector: sum " + std::to_string(s) +
                                   " exceeds tol " + std::to_string(tol));
    }
    int size() const { return static_cast<int>(values.size()); }
};

namespace detail {

// Strong connectivity of the directed graph given by an adjacency predicate,
// via forward + reverse reachability from vertex 0.
inline bool strongly_connected(int n, const std::function<bool(int, int)>& edge) {
    auto reach = [&](bool reverse) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                bool has = reverse ? edge(v, u) : edge(u, v);
                if (has && !seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(false) && reach(true);
}

inline void check_l_pattern(const SquareMatrix& m, double tol, bool bi,
                            const char* what) {
    for (int i = 0; i < m.n; ++i) {
        if (m(i, i) < -tol)
            throw validation_error(std::string(what) + ": negative diagonal at " +
                                   std::to_string(i));
        for (int j = 0; j < m.n; ++j)
            if (j != i && m(i, j) > tol)
                throw validation_error(std::string(what) + ": positive off-diagonal at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
        if (std::fabs(m.row_sum(i)) > tol)
            throw validation_error(std::string(what) + ": row " + std::to_string(i) +
                                   " sum " + std::to_string(m.row_sum(i)));
        if (bi && std::fabs(m.col_sum(i)) > tol)
            throw validation_error(std::string(what) + ": column " + std::to_string(i) +
                                   " sum " + std::to_string(m.col_sum(i)));
    }
}

// Clamp within-tol sign violations to the boundary; anything larger throws.
inline void clamp_l_pattern(SquareMatrix& m, double tol) {
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) {
            double& x = m(i, j);
            if (i == j && x < 0) {
                if (x < -tol)
                    throw validation_error("L-matrix sign pattern: diagonal (" +
                                           std::to_string(i) + ") = " + std::to_string(x) +
                                           ", max violation " + std::to_string(-x));
                x = 0.0;
            } else if (i != j && x > 0) {
                if (x > tol)
                    throw validation_error("L-matrix sign pattern: off-diagonal (" +
                                           std::to_string(i) + "," + std::to_string(j) +
                                           ") = " + std::to_string(x) + ", max violation " +
                                           std::to_string(x));
                x = 0.0;
            }
        }
}

}  // namespace detail

/// Square matrix with nonnegative diagonal, nonpositive off-diagonal and
/// zero row and column sums. Minus the tangent direction of bi-stochastic
/// matrices at the identity.
struct BiLMatrix {
    SquareMatrix inner;
    double tol = kDefaultTol;

    BiLMatrix() = default;
    BiLMatrix(SquareMatrix m, double tolerance = kDefaultTol)
        : inner(std::move(m)), tol(tolerance) {
        detail::clamp_l_pattern(inner, tol);
        detail::check_l_pattern(inner, tol, /*bi=*/true, "BiLMatrix");
    }
    int size() const { return inner.n; }
};

struct StochasticMatrix {
    SquareMatrix inner;
    bool bistochastic = false;
    double tol = kDefaultTol;

    StochasticMatrix() = default;
    StochasticMatrix(SquareMatrix m, bool bi, double tolerance = kDefaultTol)
        : inner(std::move(m)), bistochastic(bi), tol(tolerance) {
        for (int i = 0; i < inner.n; ++i) {
            for (int j = 0; j < inner.n; ++j) {
                double x = inner(i, j);
                if (x < -tol || x > 1.0 + tol)
                    throw validation_error("StochasticMatrix: entry (" + std::to_string(i) +
                                           "," + std::to_string(j) + ") = " +
                                           std::to_string(x) + " outside [0,1]");
            }
            if (std::fabs(inner.row_sum(i) - 1.0) > tol)
                throw validation_error("StochasticMatrix: row " + std::to_string(i) +
                                       " sum " + std::to_string(inner.row_sum(i)));
            if (bistochastic && std::fabs(inner.col_sum(i) - 1.0) > tol)
                throw validation_error("StochasticMatrix: column " + std::to_string(i) +
                                       " sum " + std::to_string(inner.col_sum(i)));
        }
    }
    int size() const { return inner.n; }
};

/// Operator on the zero-sum subspace C0^I, stored as its matrix in a declared
/// basis of zero-sum vectors. The basis travels with the entries so that
/// values computed in different bases can never be mixed silently.
struct PotentialMatrix {
    int dim = 0;                            // |I|
    std::vector<ZeroSumVector> basis;       // dim-1 vectors spanning C0^I
    SquareMatrix action;                    // (dim-1) x (dim-1) in that basis

    PotentialMatrix() = default;
    PotentialMatrix(int n, std::vector<ZeroSumVector> b, SquareMatrix act)
        : dim(n), basis(std::move(b)), action(std::move(act)) {
        if (dim < 1) throw validation_error("PotentialMatrix: dim must be >= 1");
        if (static_cast<int>(basis.size()) != dim - 1)
            throw validation_error("PotentialMatrix: basis must have dim-1 vectors");
        if (dim > 1 && action.n != dim - 1)
            throw validation_error("PotentialMatrix: action size mismatch");
        for (const auto& v : basis)
            if (v.size() != dim)
                throw validation_error("PotentialMatrix: basis vector length mismatch");
    }

    EMatrix basis_columns() const {
        EMatrix e(dim, dim - 1);
        for (int k = 0; k + 1 < dim; ++k)
            for (int i = 0; i < dim; ++i) e(i, k) = basis[k].values[i];
        return e;
    }

    /// Coordinates of a zero-sum vector in the stored basis.
    EVector coords(const std::vector<double>& v) const {
        EMatrix e = basis_columns();
        EVector rhs(dim);
        for (int i = 0; i < dim; ++i) rhs(i) = v[i];
        Eigen::ColPivHouseholderQR<EMatrix> qr(e);
        EVector c = qr.solve(rhs);
        if ((e * c - rhs).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()))
            throw numeric_error("PotentialMatrix: vector not in span of basis");
        return c;
    }

    /// <f, S g> in the l2(I) pairing.
    double pair(const std::vector<double>& f, const std::vector<double>& g) const {
        if (dim == 1) return 0.0;
        EVector cg = coords(g);
        EVector sg = basis_columns() * (action.eigen() * cg);
        double s = 0;
        for (int i = 0; i < dim; ++i) s += f[i] * sg(i);
        return s;
    }
};

/// Default basis of C0^I: pivot differences 1_{s_k} - 1_{s_0}, k = 1..n-1.
inline std::vector<ZeroSumVector> pivot_difference_basis(int n) {
    std::vector<ZeroSumVector> basis;
    for (int k = 1; k < n; ++k) {
        std::vector<double> v(n, 0.0);
        v[k] = 1.0;
        v[0] = -1.0;
        basis.emplace_back(std::move(v));
    }
    return basis;
}

/// Irreducibility of a (bi-)L-matrix: the graph with an edge i -> j whenever
/// R_ij < -tol must be strongly connected.
inline bool is_irreducible_L(const BiLMatrix& r) {
    const SquareMatrix& m = r.inner;
    if (m.n == 1) return true;
    return detail::strongly_connected(
        m.n, [&](int i, int j) { return i != j && m(i, j) < -r.tol; });
}

/// Unique probability vector nu with nu R = 0, for an irreducible L-matrix
/// (zero row sums, not necessarily zero column sums).
inline std::vector<double> stationary_vector(const SquareMatrix& r, double tol = kDefaultTol) {
    detail::check_l_pattern(r, tol, /*bi=*/false, "stationary_vector");
    if (!detail::strongly_connected(
            r.n, [&](int i, int j) { return i != j && r(i, j) < -tol; }))
        throw validation_error("stationary_vector: reducible L-matrix");
    // Solve R^T nu = 0 with the normalization sum(nu) = 1 replacing one row.
    EMatrix a = r.eigen().transpose();
    EVector b = EVector::Zero(r.n);
    for (int j = 0; j < r.n; ++j) a(0, j) = 1.0;
    b(0) = 1.0;
    Eigen::FullPivLU<EMatrix> lu(a);
    if (!lu.isInvertible()) throw numeric_error("stationary_vector: singular solve");
    EVector nu = lu.solve(b);
    std::vector<double> out(r.n);
    for (int i = 0; i < r.n; ++i) {
        if (nu(i) < -1e3 * tol)
            throw numeric_error("stationary_vector: negative component");
        out[i] = std::max(nu(i), 0.0);
    }
    return out;
}

inline std::vector<double> stationary_vector(const BiLMatrix& r) {
    return stationary_vector(r.inner, r.tol);
}

/// Matrix of R's action on C0^I in the given basis (R_0).
inline PotentialMatrix restrict_to_zero_sum(const BiLMatrix& r,
                                            const std::vector<ZeroSumVector>& basis) {
    int n = r.size();
    if (static_cast<int>(basis.size()) != n - 1)
        throw validation_error("restrict_to_zero_sum: basis must have n-1 vectors");
    PotentialMatrix proto(n, basis, SquareMatrix::identity(std::max(n - 1, 1)));
    EMatrix e = proto.basis_columns();
    Eigen::ColPivHouseholderQR<EMatrix> qr(e);
    if (qr.rank() < n - 1)
        throw validation_error("restrict_to_zero_sum: basis not linearly independent");
    EMatrix re = r.inner.eigen() * e;
    EMatrix c = qr.solve(re);  // coordinates of R e_k in the basis
    if ((e * c - re).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + re.cwiseAbs().maxCoeff()))
        throw numeric_error("restrict_to_zero_sum: R does not preserve C0");
    return PotentialMatrix(n, basis, SquareMatrix::from_eigen(c));
}

/// True iff <(1_i - 1_j), S (1_i - 1_j)> > tol for all i != j.
inline bool is_irreducible_potential(const PotentialMatrix& s, double tol = kDefaultTol) {
    for (int i = 0; i < s.dim; ++i)
        for (int j = i + 1; j < s.dim; ++j) {
            std::vector<double> v(s.dim, 0.0);
            v[i] = 1.0;
            v[j] = -1.0;
            if (s.pair(v, v) <= tol) return false;
        }
    return true;
}

/// S = R_0^{-1} in the pivot-difference basis (or a caller-supplied one).
inline PotentialMatrix potential_from_L(
    const BiLMatrix& r, std::optional<std::vector<ZeroSumVector>> basis = std::nullopt) {
    if (!is_irreducible_L(r)) throw validation_error("potential_from_L: reducible bi-L-matrix");
    std::vector<ZeroSumVector> b = basis ? std::move(*basis) : pivot_difference_basis(r.size());
    PotentialMatrix r0 = restrict_to_zero_sum(r, b);
    if (r.size() == 1) return r0;
    Eigen::FullPivLU<EMatrix> lu(r0.action.eigen());
    if (!lu.isInvertible())
        throw numeric_error("potential_from_L: R_0 numerically singular");
    PotentialMatrix s(r.size(), std::move(r0.basis), SquareMatrix::from_eigen(lu.inverse()));
    if (!is_irreducible_potential(s))
        throw numeric_error("potential_from_L: inverse failed potential irreducibility");
    return s;
}

/// R = S^{-1} composed with the projection onto C0^I parallel to constants.
/// The unique bi-L extension; sign violations beyond tol are reported.
inline BiLMatrix bil_from_potential(const PotentialMatrix& s, double tol = kDefaultTol) {
    int n = s.dim;
    if (n == 1) return BiLMatrix(SquareMatrix(1), tol);
    Eigen::FullPivLU<EMatrix> lu(s.action.eigen());
    if (!lu.isInvertible()) throw numeric_error("bil_from_potential: S singular");
    EMatrix r0 = lu.inverse();
    EMatrix e = s.basis_columns();
    Eigen::ColPivHouseholderQR<EMatrix> qr(e);
    EMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        // pi(1_k) = 1_k - (1/n) 1
        EVector pk = EVector::Constant(n, -1.0 / n);
        pk(k) += 1.0;
        EVector ck = qr.solve(pk);
        r.col(k) = e * (r0 * ck);
    }
    return BiLMatrix(SquareMatrix::from_eigen(r), tol);
}

/// e^{-tR} by scaling-and-squaring over a truncated Taylor series.
inline SquareMatrix matrix_exponential(const SquareMatrix& r, double t) {
    if (t < 0) throw validation_error("matrix_exponential: t must be >= 0");
    EMatrix x = -t * r.eigen();
    double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
    if (!std::isfinite(norm) || norm > 1e300)
        throw numeric_error("matrix_exponential: overflow in t*norm(R)");
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
        x /= std::pow(2.0, squarings);
    }
    int n = r.n;
    EMatrix term = EMatrix::Identity(n, n);
    EMatrix sum = EMatrix::Identity(n, n);
    for (int k = 1; k <= 30; ++k) {
        term = (term * x) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int k = 0; k < squarings; ++k) sum = sum * sum;
    return SquareMatrix::from_eigen(sum);
}

/// Product prod_{n < floor(t/eps)} (Id - eps R + R_{eps,n}), left to right.
/// Missing perturbation entries are treated as zero.
inline SquareMatrix perturbation_product(const SquareMatrix& r, double eps, double t,
                                         const std::vector<SquareMatrix>& perturbations) {
    if (eps <= 0) throw validation_error("perturbation_product: eps must be > 0");
    if (t < 0) throw validation_error("perturbation_product: t must be >= 0");
    auto steps = static_cast<long long>(std::floor(t / eps));
    EMatrix m = EMatrix::Identity(r.n, r.n);
    EMatrix base = EMatrix::Identity(r.n, r.n) - eps * r.eigen();
    for (long long k = 0; k < steps; ++k) {
        if (k < static_cast<long long>(perturbations.size())) {
            m = m * (base + perturbations[static_cast<size_t>(k)].eigen());
        } else {
            m = m * base;
        }
    }
    return SquareMatrix::from_eigen(m);
}

/// All eigenvalues of a square real matrix (dense general solver).
inline std::vector<std::complex<double>> eigenvalues(const SquareMatrix& m) {
    Eigen::EigenSolver<EMatrix> es(m.eigen(), /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(m.n);
    for (int i = 0; i < m.n; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

}  // namespace lathit
