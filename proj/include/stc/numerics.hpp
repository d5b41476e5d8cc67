#pragma once

#include "stc/types.hpp"

namespace stc::numerics {

/// Top-k singular triplets. Columns of `left_vectors` (rows(A) x k) and
/// `right_vectors` (cols(A) x k) are orthonormal; singular values are
/// nonincreasing and nonnegative; A ~= U diag(s) V^T when k covers the rank.
struct SvdResult {
  Vector singular_values;
  Matrix left_vectors;
  Matrix right_vectors;
};

/// Eigenpairs sorted by ascending eigenvalue, one eigenvector column each.
/// For generalized problems the columns are B-orthonormal (v^T B v = 1).
/// `ridge` records the diagonal regularization applied to B (0 when none).
struct EigenResult {
  Vector eigenvalues;
  Matrix eigenvectors;
  double ridge = 0.0;
};

enum class SpectrumSide { kSmallest, kLargest };

/// Routing knob, mainly so tests can pin one code path.
enum class SolverPath { kAuto, kDense, kIterative };

struct SolverOptions {
  SolverPath path = SolverPath::kAuto;
  // kAuto densifies at or below this dimension; small instances then hit the
  // exact dense factorizations instead of the Lanczos path.
  Index dense_fallback_dim = 256;
  Index max_iterations = 0;  // 0 = built-in cap
};

SvdResult svd_truncated(const Matrix& a, Index k);
SvdResult svd_truncated(const SpMat& a, Index k, const SolverOptions& opts = {});

/// k eigenpairs of A v = lambda B v from the requested end of the spectrum.
/// A must be symmetric, B symmetric positive-definite (a trace-scaled ridge is
/// applied once if its Cholesky fails).
EigenResult eig_generalized_sym(const Matrix& a, const Matrix& b, Index k,
                                SpectrumSide side);

/// The k+1 smallest generalized eigenpairs of L v = lambda D v with
/// D = diag(degrees), degrees strictly positive. Eigenvectors come back
/// D-orthonormal. Large instances run shift-inverted Lanczos on the
/// D-normalized operator; small ones fall through to the dense solver.
EigenResult eig_sym_sparse_smallest(const SpMat& laplacian,
                                    const Vector& degrees, Index k,
                                    const SolverOptions& opts = {});

/// Deterministic sign fix: the first nonzero component (relative to the
/// column max) of every primary column is made positive; `coupled` columns
/// flip in tandem so factorizations stay valid.
void apply_sign_convention(Matrix& primary, Matrix* coupled = nullptr);

}  // namespace stc::numerics
