#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace phasecov::linalg {

using CMatrix = Eigen::MatrixXcd;
using Block = std::vector<Eigen::Index>;

struct HermitianEigensystem {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns
};

/// Dense eigendecomposition of a Hermitian matrix.
HermitianEigensystem eigh(const CMatrix& hermitian);

/// Connected components of the union nonzero pattern of square matrices of
/// equal size. Every matrix is block diagonal (up to a permutation) on the
/// returned partition, so their joint spectral work splits exactly per block.
/// Exact zeros only; no thresholding.
std::vector<Block> coupled_blocks(std::span<const CMatrix* const> matrices);

CMatrix gather(const CMatrix& matrix, const Block& block);
void scatter_add(CMatrix& target, const Block& block, const CMatrix& values);

/// Eigensystems of `hermitian` on each block of the partition induced by it
/// together with `companions`.
struct BlockEigensystem {
  std::vector<Block> blocks;
  std::vector<HermitianEigensystem> systems;

  double max_eigenvalue() const;
  double min_eigenvalue() const;
};

BlockEigensystem block_eigh(const CMatrix& hermitian,
                            std::span<const CMatrix* const> companions = {});

/// Max-norm of A - A^dagger.
double hermiticity_defect(const CMatrix& matrix);

/// Replaces A by (A + A^dagger)/2 and returns the max-norm of the removed part.
double symmetrize(CMatrix& matrix);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm(const CMatrix& hermitian);

}  // namespace phasecov::linalg
