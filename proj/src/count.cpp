#include "cmatch/count.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>

#include "cmatch/errors.hpp"
#include "cmatch/rng.hpp"

namespace cmatch {

WeightedHost WeightedHost::centered(const Graph& graph, double q) {
  WeightedHost host;
  host.n_ = graph.size();
  host.offset_ = -q;
  host.row_start_.assign(1, 0);
  for (int i = 0; i < host.n_; ++i) {
    for (int j : graph.neighbors(i)) {
      host.columns_.push_back(j);
      host.values_.push_back(1.0);
    }
    host.row_start_.push_back(host.columns_.size());
  }
  if (q == 0.0 && host.values_.empty()) host.offset_ = 0.0;
  return host;
}

WeightedHost WeightedHost::from_dense(int n, std::span<const double> matrix) {
  if (n < 0 || matrix.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw ParameterError("dense weight matrix must be n x n");
  WeightedHost host;
  host.n_ = n;
  host.row_start_.assign(1, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = matrix[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
      if (w != matrix[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)])
        throw ParameterError("weight matrix must be symmetric");
      if (i == j || w == 0.0) continue;
      host.columns_.push_back(j);
      host.values_.push_back(w);
    }
    host.row_start_.push_back(host.columns_.size());
  }
  return host;
}

double WeightedHost::weight(int i, int j) const noexcept {
  if (i == j) return 0.0;
  const auto cols = residual_columns(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  double w = offset_;
  if (it != cols.end() && *it == j) w += residual_values(i)[static_cast<std::size_t>(it - cols.begin())];
  return w;
}

std::span<const int> WeightedHost::residual_columns(int i) const noexcept {
  const auto b = row_start_[static_cast<std::size_t>(i)];
  const auto e = row_start_[static_cast<std::size_t>(i) + 1];
  return {columns_.data() + b, e - b};
}

std::span<const double> WeightedHost::residual_values(int i) const noexcept {
  const auto b = row_start_[static_cast<std::size_t>(i)];
  const auto e = row_start_[static_cast<std::size_t>(i) + 1];
  return {values_.data() + b, e - b};
}

WeightedHost WeightedHost::scaled(double factor) const {
  WeightedHost out = *this;
  out.offset_ *= factor;
  for (auto& v : out.values_) v *= factor;
  return out;
}

std::vector<double> WeightedHost::dense() const {
  const auto n = static_cast<std::size_t>(n_);
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out[i * n + j] = offset_;
  for (int i = 0; i < n_; ++i) {
    const auto cols = residual_columns(i);
    const auto vals = residual_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) out[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(cols[k])] += vals[k];
  }
  return out;
}

Coloring Coloring::random(int n, int N, std::uint64_t seed) {
  if (N < 0 || N + 1 > kMaxColorWidth) throw CapError("coloring width N + 1 must lie in [1, 24]");
  Coloring c;
  c.N = N;
  c.seed = seed;
  c.colors.resize(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (auto& col : c.colors) col = static_cast<std::uint8_t>(rng.below(static_cast<std::uint64_t>(N) + 1));
  return c;
}

double colorful_probability(int N) {
  if (N < 0) throw ParameterError("N must be nonnegative");
  // (N+1)! / (N+1)^{N+1} as a product of k / (N+1)
  double r = 1.0;
  for (int k = 1; k <= N + 1; ++k) r *= static_cast<double>(k) / (N + 1);
  return r;
}

ColorMasks::ColorMasks(int width) : width_(width) {
  if (width < 1 || width > kMaxColorWidth) throw CapError("color width must lie in [1, 24]");
  const std::uint32_t total = 1U << width;
  by_size_.resize(static_cast<std::size_t>(width) + 1);
  rank_.resize(total);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    auto& group = by_size_[static_cast<std::size_t>(std::popcount(mask))];
    rank_[mask] = static_cast<std::uint32_t>(group.size());
    group.push_back(mask);
  }
}

std::shared_ptr<const ColorMasks> ColorMasks::for_width(int width) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const ColorMasks>> registry;
  std::lock_guard lock(mutex);
  auto& slot = registry[width];
  if (!slot) slot = std::make_shared<const ColorMasks>(width);
  return slot;
}

ColorCoder::ColorCoder(const WeightedHost& host, const Coloring& coloring)
    : host_(&host), coloring_(&coloring), masks_(ColorMasks::for_width(coloring.width())) {
  if (static_cast<int>(coloring.colors.size()) != host.size())
    throw ParameterError("coloring and host disagree on the number of vertices");
}

MaskTable ColorCoder::leaf() const {
  const auto n = static_cast<std::size_t>(host_->size());
  MaskTable t;
  t.set_size = 1;
  t.columns = masks_->of_size(1).size();
  t.values.assign(n * t.columns, 0.0);
  for (std::size_t i = 0; i < n; ++i) t.values[i * t.columns + coloring_->colors[i]] = 1.0;
  return t;
}

MaskTable ColorCoder::extend(const MaskTable& child) const {
  const int n = host_->size();
  const std::size_t m = child.columns;
  MaskTable out;
  out.set_size = child.set_size;
  out.columns = m;
  out.values.assign(static_cast<std::size_t>(n) * m, 0.0);

  const double offset = host_->offset();
  std::vector<double> column_sum;
  if (offset != 0.0) {
    column_sum.assign(m, 0.0);
    for (int j = 0; j < n; ++j) {
      const double* src = child.values.data() + static_cast<std::size_t>(j) * m;
      for (std::size_t k = 0; k < m; ++k) column_sum[k] += src[k];
    }
  }
  for (int i = 0; i < n; ++i) {
    double* dst = out.values.data() + static_cast<std::size_t>(i) * m;
    if (offset != 0.0) {
      const double* own = child.values.data() + static_cast<std::size_t>(i) * m;
      for (std::size_t k = 0; k < m; ++k) dst[k] = offset * (column_sum[k] - own[k]);
    }
    const auto cols = host_->residual_columns(i);
    const auto vals = host_->residual_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const double w = vals[e];
      const double* src = child.values.data() + static_cast<std::size_t>(cols[e]) * m;
      for (std::size_t k = 0; k < m; ++k) dst[k] += w * src[k];
    }
  }
  return out;
}

MaskTable ColorCoder::fold(const MaskTable& partial, const MaskTable& extended) const {
  const int a = partial.set_size;
  const int b = extended.set_size;
  if (a + b > masks_->width()) throw InvariantError("fold exceeds the color width");
  const auto targets = masks_->of_size(a + b);
  const int n = host_->size();

  MaskTable out;
  out.set_size = a + b;
  out.columns = targets.size();
  out.values.assign(static_cast<std::size_t>(n) * out.columns, 0.0);
  const int want = a - 1;
  for (int i = 0; i < n; ++i) {
    const std::uint32_t own = 1U << coloring_->colors[static_cast<std::size_t>(i)];
    const double* p = partial.values.data() + static_cast<std::size_t>(i) * partial.columns;
    const double* e = extended.values.data() + static_cast<std::size_t>(i) * extended.columns;
    double* dst = out.values.data() + static_cast<std::size_t>(i) * out.columns;
    for (std::size_t idx = 0; idx < targets.size(); ++idx) {
      const std::uint32_t set = targets[idx];
      if (!(set & own)) continue;
      const std::uint32_t rest = set ^ own;
      double sum = 0.0;
      for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
        if (std::popcount(sub) == want) sum += p[masks_->rank(sub | own)] * e[masks_->rank(rest ^ sub)];
        if (sub == 0) break;
      }
      dst[idx] = sum;
    }
  }
  return out;
}

MaskTable ColorCoder::subtree(const RootedTreeShape& shape) const {
  if (shape.vertices() > masks_->width()) throw InvariantError("tree larger than the color width");
  const auto children = shape.children();
  std::vector<std::optional<MaskTable>> tables(children.size());
  for (auto v = static_cast<std::ptrdiff_t>(children.size()) - 1; v >= 0; --v) {
    MaskTable table = leaf();
    for (int c : children[static_cast<std::size_t>(v)]) {
      table = fold(table, extend(*tables[static_cast<std::size_t>(c)]));
      tables[static_cast<std::size_t>(c)].reset();
    }
    tables[static_cast<std::size_t>(v)] = std::move(table);
  }
  return std::move(*tables[0]);
}

MaskTable ColorCoder::branch(const RootedTreeShape& bulb, int M) const {
  MaskTable table = subtree(bulb);
  for (int w = 1; w < M; ++w) table = fold(leaf(), extend(table));
  return extend(table);
}

std::vector<double> ColorCoder::full_set_values(const MaskTable& table) const {
  if (table.set_size != masks_->width()) throw InvariantError("table does not cover the full color set");
  std::vector<double> out(static_cast<std::size_t>(host_->size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = table.values[i * table.columns];
  return out;
}

BulbTableCache::BulbTableCache(const ColorCoder& coder, const BulbCatalog& catalog, int M, bool enabled,
                               std::size_t memory_budget_bytes)
    : coder_(&coder), catalog_(&catalog), M_(M), enabled_(enabled), tables_(catalog.size()) {
  if (enabled_) {
    const int set_size = catalog.K + M;
    if (set_size <= coder.masks().width()) {
      const double bytes = static_cast<double>(catalog.size()) * coder.host().size() *
                           static_cast<double>(coder.masks().of_size(set_size).size()) * sizeof(double);
      if (bytes > static_cast<double>(memory_budget_bytes))
        throw BudgetError("bulb table cache needs about " + std::to_string(static_cast<long long>(bytes)) +
                          " bytes, above the budget of " + std::to_string(memory_budget_bytes));
    }
  }
}

std::shared_ptr<const MaskTable> BulbTableCache::branch(int bulb_id) {
  auto& slot = tables_[static_cast<std::size_t>(bulb_id)];
  if (enabled_ && slot) {
    ++hits_;
    return slot;
  }
  ++misses_;
  auto table = std::make_shared<const MaskTable>(coder_->branch(catalog_->bulbs[static_cast<std::size_t>(bulb_id)], M_));
  if (enabled_) slot = table;
  return table;
}

std::vector<double> chandelier_colorful_counts(const ColorCoder& coder, BulbTableCache& cache,
                                               std::span<const int> bulb_ids, u128 chandelier_aut) {
  const int n = coder.host().size();
  if (coder.host().all_zero()) return std::vector<double>(static_cast<std::size_t>(n), 0.0);
  MaskTable table = coder.leaf();
  for (int id : bulb_ids) table = coder.fold(table, *cache.branch(id));
  if (table.set_size != coder.masks().width())
    throw ParameterError("chandelier size does not match the coloring width");
  auto values = coder.full_set_values(table);
  const double aut = static_cast<double>(chandelier_aut);
  for (auto& v : values) v /= aut;
  return values;
}

std::vector<double> colorful_count_all_roots(const WeightedHost& host, const RootedTreeShape& shape,
                                             const Coloring& coloring) {
  if (shape.vertices() > kMaxColorWidth) throw CapError("tree needs more than 24 colors");
  if (shape.edges() != coloring.N) throw ParameterError("shape and coloring disagree on N");
  if (host.all_zero() && shape.edges() > 0) return std::vector<double>(static_cast<std::size_t>(host.size()), 0.0);
  const ColorCoder coder(host, coloring);
  auto values = coder.full_set_values(coder.subtree(shape));
  const double aut = static_cast<double>(shape.aut());
  for (auto& v : values) v /= aut;
  return values;
}

double colorful_count(const WeightedHost& host, int root, const RootedTreeShape& shape, const Coloring& coloring) {
  if (root < 0 || root >= host.size()) throw ParameterError("root out of range");
  return colorful_count_all_roots(host, shape, coloring)[static_cast<std::size_t>(root)];
}

}  // namespace cmatch
