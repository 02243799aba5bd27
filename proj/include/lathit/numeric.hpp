#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lathit {

class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kDefaultTol = 1e-9;

using EMatrix = Eigen::MatrixXd;
using EVector = Eigen::VectorXd;
using ECMatrix = Eigen::MatrixXcd;
using ECVector = Eigen::VectorXcd;

/// Dense square matrix, row-major storage. The basic container for the
/// small (n <= ~50) matrices this library manipulates.
struct SquareMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major, n*n

    SquareMatrix() = default;
    explicit SquareMatrix(int size, double fill = 0.0)
        : n(size), entries(static_cast<size_t>(size) * size, fill) {
        if (size < 1) throw validation_error("SquareMatrix: n must be >= 1");
    }
    SquareMatrix(int size, std::vector<double> rowmajor)
        : n(size), entries(std::move(rowmajor)) {
        if (size < 1) throw validation_error("SquareMatrix: n must be >= 1");
        if (entries.size() != static_cast<size_t>(n) * n)
            throw validation_error("SquareMatrix: entries size != n*n");
        for (double x : entries)
            if (!std::isfinite(x)) throw validation_error("SquareMatrix: non-finite entry");
    }

    double& operator()(int i, int j) { return entries[static_cast<size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return entries[static_cast<size_t>(i) * n + j]; }

    static SquareMatrix identity(int size) {
        SquareMatrix m(size);
        for (int i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }

    EMatrix eigen() const {
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(entries.data(), n, n);
    }
    static SquareMatrix from_eigen(const EMatrix& m) {
        SquareMatrix out(static_cast<int>(m.rows()));
        for (int i = 0; i < out.n; ++i)
            for (int j = 0; j < out.n; ++j) out(i, j) = m(i, j);
        return out;
    }

    double row_sum(int i) const {
        double s = 0;
        for (int j = 0; j < n; ++j) s += (*this)(i, j);
        return s;
    }
    double col_sum(int j) const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += (*this)(i, j);
        return s;
    }
    double max_abs() const {
        double m = 0;
        for (double x : entries) m = std::max(m, std::fabs(x));
        return m;
    }
};

inline SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n != b.n) throw validation_error("matrix product: size mismatch");
    return SquareMatrix::from_eigen(a.eigen() * b.eigen());
}

inline SquareMatrix operator-(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n != b.n) throw validation_error("matrix difference: size mismatch");
    return SquareMatrix::from_eigen(a.eigen() - b.eigen());
}

inline double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n != b.n) throw validation_error("max_abs_diff: size mismatch");
    double m = 0;
    for (size_t k = 0; k < a.entries.size(); ++k)
        m = std::max(m, std::fabs(a.entries[k] - b.entries[k]));
    return m;
}

/// Kahan-compensated accumulator. Keeps grid sums deterministic to ~1e-13
/// regardless of how the node set is partitioned.
struct CompensatedSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

struct CompensatedSumC {
    CompensatedSum re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

}  // namespace lathit
