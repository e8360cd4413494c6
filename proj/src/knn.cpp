#include "zcam/knn.hpp"

#include <algorithm>
#include <numeric>

#include "zcam/error.hpp"
#include "zcam/kernels.hpp"

namespace zcam::ml {

KnnModel train_knn(const Matrix& x, std::span<const int> y, int n_classes, std::size_t k) {
  if (x.rows() == 0) fail(Errc::EmptyData, "empty training matrix");
  if (y.size() != x.rows()) fail(Errc::DimensionMismatch, "label count differs from row count");
  if (k < 1) fail(Errc::InvalidArgument, "k must be at least 1");
  return {x, std::vector<int>(y.begin(), y.end()), n_classes, k};
}

Matrix predict_proba(const KnnModel& model, const Matrix& q) {
  if (q.cols() != model.x.cols()) fail(Errc::DimensionMismatch, "knn input width");
  const std::size_t k = std::min(model.k, model.x.rows());
  Matrix out(q.rows(), static_cast<std::size_t>(model.n_classes));
  constexpr std::size_t kBlock = 256;
  std::vector<std::size_t> block_idx;
  Matrix dist;
  for (std::size_t start = 0; start < q.rows(); start += kBlock) {
    const std::size_t stop = std::min(q.rows(), start + kBlock);
    block_idx.resize(stop - start);
    std::iota(block_idx.begin(), block_idx.end(), start);
    kernels::sq_dists(q.select_rows(block_idx), model.x, dist);
    const auto rows = static_cast<std::ptrdiff_t>(stop - start);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < rows; ++bi) {
      const auto b = static_cast<std::size_t>(bi);
      std::vector<std::size_t> order(model.x.rows());
      std::iota(order.begin(), order.end(), 0);
      const auto d = dist.row(b);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](std::size_t a, std::size_t c) { return d[a] != d[c] ? d[a] < d[c] : a < c; });
      auto row = out.row(start + b);
      for (std::size_t j = 0; j < k; ++j) row[static_cast<std::size_t>(model.y[order[j]])] += 1.0 / double(k);
    }
  }
  return out;
}

}  // namespace zcam::ml
