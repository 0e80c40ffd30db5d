#pragma once

#include <cstdint>
#include <vector>

#include "latentmark/bitvec.hpp"

namespace latentmark {

/// Row rank of a matrix given as bit-rows (rows are consumed).
std::size_t f2_rank(std::vector<BitVec> rows);

/// Basis of the null space {x : M x = 0} of the matrix whose rows are
/// `rows` (each of length ncols). Basis vectors are linearly independent
/// by construction; deterministic given the input.
std::vector<BitVec> f2_kernel_basis(std::vector<BitVec> rows, std::size_t ncols);

}  // namespace latentmark
