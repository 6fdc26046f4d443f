#include "phasecov/linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "phasecov/errors.hpp"

namespace phasecov::linalg {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Eigen::Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Eigen::Index{0});
  }

  Eigen::Index find(Eigen::Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<Eigen::Index> parent_;
};

}  // namespace

HermitianEigensystem eigh(const CMatrix& hermitian) {
  if (hermitian.rows() != hermitian.cols()) throw DimensionMismatch("eigh needs a square matrix");
  if (hermitian.rows() == 1) {
    return {Eigen::VectorXd::Constant(1, hermitian(0, 0).real()), CMatrix::Identity(1, 1)};
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
  if (solver.info() != Eigen::Success) throw NonConvergent("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

std::vector<Block> coupled_blocks(std::span<const CMatrix* const> matrices) {
  if (matrices.empty()) return {};
  const Eigen::Index n = matrices.front()->rows();
  for (const CMatrix* m : matrices) {
    if (m->rows() != n || m->cols() != n) {
      throw DimensionMismatch("coupled_blocks needs square matrices of equal size");
    }
  }
  DisjointSets sets(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      for (const CMatrix* m : matrices) {
        if ((*m)(i, j) != 0.0 || (*m)(j, i) != 0.0) {
          sets.unite(i, j);
          break;
        }
      }
    }
  }
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
  std::vector<Block> blocks;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index root = sets.find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[root]].push_back(i);
  }
  return blocks;
}

CMatrix gather(const CMatrix& matrix, const Block& block) {
  const auto k = static_cast<Eigen::Index>(block.size());
  CMatrix out(k, k);
  for (Eigen::Index b = 0; b < k; ++b) {
    for (Eigen::Index a = 0; a < k; ++a) out(a, b) = matrix(block[a], block[b]);
  }
  return out;
}

void scatter_add(CMatrix& target, const Block& block, const CMatrix& values) {
  const auto k = static_cast<Eigen::Index>(block.size());
  for (Eigen::Index b = 0; b < k; ++b) {
    for (Eigen::Index a = 0; a < k; ++a) target(block[a], block[b]) += values(a, b);
  }
}

double BlockEigensystem::max_eigenvalue() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : systems) best = std::max(best, s.values.maxCoeff());
  return best;
}

double BlockEigensystem::min_eigenvalue() const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : systems) best = std::min(best, s.values.minCoeff());
  return best;
}

BlockEigensystem block_eigh(const CMatrix& hermitian, std::span<const CMatrix* const> companions) {
  std::vector<const CMatrix*> all{&hermitian};
  all.insert(all.end(), companions.begin(), companions.end());
  BlockEigensystem out;
  out.blocks = coupled_blocks(all);
  out.systems.reserve(out.blocks.size());
  for (const Block& block : out.blocks) out.systems.push_back(eigh(gather(hermitian, block)));
  return out;
}

double hermiticity_defect(const CMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      worst = std::max(worst, std::abs(matrix(i, j) - std::conj(matrix(j, i))));
    }
  }
  return worst;
}

double symmetrize(CMatrix& matrix) {
  double removed = 0.0;
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const std::complex<double> mean = 0.5 * (matrix(i, j) + std::conj(matrix(j, i)));
      removed = std::max(removed, std::abs(matrix(i, j) - mean));
      matrix(i, j) = mean;
      matrix(j, i) = std::conj(mean);
    }
  }
  return removed;
}

double trace_norm(const CMatrix& hermitian) {
  const BlockEigensystem eig = block_eigh(hermitian);
  double total = 0.0;
  for (const auto& s : eig.systems) total += s.values.cwiseAbs().sum();
  return total;
}

}  // namespace phasecov::linalg
