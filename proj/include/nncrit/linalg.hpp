#pragma once

// Small dense kernel shared by all estimators. Everything here is a pure
// function of its arguments; matrices in this library stay below ~50x50.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "nncrit/error.hpp"

namespace nncrit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

inline bool is_symmetric(const Matrix& a) {
    if (a.rows() != a.cols()) return false;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.cols(); ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, std::abs(a(i, j)))) return false;
    return true;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline double inf_norm(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Cholesky factor of a symmetric matrix; throws NotPositiveDefinite when a
/// pivot is not strictly positive.
inline Eigen::LLT<Matrix> cholesky(const Matrix& a) {
    if (a.rows() != a.cols()) throw DomainError("cholesky: matrix is not square");
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky: non-positive pivot in " + std::to_string(a.rows()) + "x" +
                                  std::to_string(a.cols()) + " matrix");
    // LLT's pivot test (x <= 0) lets NaN through.
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i)))
            throw NotPositiveDefinite("cholesky: non-positive pivot at index " + std::to_string(i));
    return llt;
}

/// Solves A X = B for symmetric positive-definite A. B may be a matrix or a
/// vector; the result has B's shape.
template <class Derived>
typename Derived::PlainObject solve_spd(const Matrix& a, const Eigen::MatrixBase<Derived>& b) {
    if (a.rows() != b.rows()) throw DomainError("solve_spd: dimension mismatch");
    return cholesky(a).solve(b);
}

inline double logdet_spd(const Matrix& a) {
    const auto llt = cholesky(a);
    const auto& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

inline bool is_pd(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0) return false;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return false;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
    return true;
}

/// tr(I J^{-1}). J is the Hessian of an estimating loss at a minimizer, so
/// it is symmetric positive definite whenever the criterion is defined; a
/// failed factorization is reported as SingularMatrix.
inline double trace_product_inv(const Matrix& i_hat, const Matrix& j_hat) {
    if (j_hat.rows() != j_hat.cols() || i_hat.rows() != j_hat.rows() || i_hat.cols() != j_hat.cols())
        throw DomainError("trace_product_inv: shape mismatch");
    Matrix x;
    try {
        x = solve_spd(symmetrize(j_hat), i_hat);
    } catch (const NotPositiveDefinite&) {
        throw SingularMatrix("trace_product_inv: J is not positive definite");
    }
    // tr(I J^{-1}) = tr(J^{-1} I)
    const double t = x.trace();
    if (!std::isfinite(t)) throw SingularMatrix("trace_product_inv: non-finite trace");
    return t;
}

}  // namespace linalg
}  // namespace nncrit
