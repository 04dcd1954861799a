#pragma once

// Single-threaded reference versions of the parallel kernels. They share no
// loop code with the OpenMP paths and are kept for tests and benchmarks.

#include <span>

#include "kcomb/combiner.hpp"
#include "kcomb/kernel.hpp"

namespace kcomb::reference {

// Evaluates every (i, j) pair independently, both triangles.
Matrix gram_matrix_serial(const KernelSpec& spec, const RowMatrix& X);

Matrix cross_gram_serial(const KernelSpec& spec, const RowMatrix& train, const RowMatrix& test);

// Whole-matrix form of the multi-kernel combination, written with Eigen
// array expressions instead of the per-entry loop.
Matrix combine_multi_serial(std::span<const GramMatrix> kernels, const LabelDiagonal& y,
                            const CombinerConfig& cfg);

}  // namespace kcomb::reference
