#include "latentmark/f2.hpp"

namespace latentmark {

namespace {

struct Rref {
  std::vector<BitVec> rows;        // reduced rows, rank of them
  std::vector<std::size_t> pivot;  // pivot column per reduced row, ascending
};

Rref reduce(std::vector<BitVec>&& rows, std::size_t ncols) {
  Rref out;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < ncols && rank < rows.size(); ++col) {
    std::size_t p = rank;
    while (p < rows.size() && !rows[p].get(col)) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[rank], rows[p]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != rank && rows[i].get(col)) rows[i] ^= rows[rank];
    }
    out.pivot.push_back(col);
    ++rank;
  }
  rows.resize(rank);
  out.rows = std::move(rows);
  return out;
}

}  // namespace

std::size_t f2_rank(std::vector<BitVec> rows) {
  if (rows.empty()) return 0;
  const std::size_t ncols = rows.front().size();
  return reduce(std::move(rows), ncols).pivot.size();
}

std::vector<BitVec> f2_kernel_basis(std::vector<BitVec> rows, std::size_t ncols) {
  Rref r = reduce(std::move(rows), ncols);
  const std::size_t rank = r.pivot.size();

  std::vector<bool> is_pivot(ncols, false);
  for (auto c : r.pivot) is_pivot[c] = true;

  std::vector<BitVec> basis;
  basis.reserve(ncols - rank);
  for (std::size_t f = 0; f < ncols; ++f) {
    if (is_pivot[f]) continue;
    BitVec v(ncols);
    v.set(f, true);
    for (std::size_t i = 0; i < rank; ++i) {
      if (r.rows[i].get(f)) v.set(r.pivot[i], true);
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace latentmark
