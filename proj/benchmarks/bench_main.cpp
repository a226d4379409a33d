#include <benchmark/benchmark.h>

#include <numeric>

#include "debtav/estimation.hpp"
#include "debtav/rng.hpp"
#include "debtav/selection.hpp"
#include "debtav/simulation.hpp"

namespace {

using namespace debtav;

void BM_Loglik(benchmark::State& state) {
  const MplCatalog catalog = reference_design(static_cast<int>(state.range(0)));
  HierarchicalConfig hc;
  hc.shrinkage = 0.0139;
  const PreferenceParams p{0.3, 0.02, 1.05, 1.5, 0.1};
  const auto ch = simulate_choices("s", p, catalog, hc.utility, 1);
  const SubjectLikelihood like(ch, catalog);
  for (auto _ : state) benchmark::DoNotOptimize(like.log_likelihood(p, hc));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ch.size()));
}
BENCHMARK(BM_Loglik)->Arg(1)->Arg(10);

void BM_LoglikGradient(benchmark::State& state) {
  const MplCatalog catalog = reference_design(10);
  HierarchicalConfig hc;
  const PreferenceParams p{0.3, 0.02, 1.05, 1.5, 0.1};
  const auto ch = simulate_choices("s", p, catalog, hc.utility, 1);
  const SubjectLikelihood like(ch, catalog);
  std::array<double, 5> g{};
  for (auto _ : state) benchmark::DoNotOptimize(like.log_likelihood(p, hc, g));
}
BENCHMARK(BM_LoglikGradient);

RegressionDataset dataset(std::size_t n, std::size_t items) {
  Rng rng(1);
  std::vector<std::string> ids, subjects;
  std::vector<std::vector<double>> cols(items, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t j = 0; j < items; ++j) ids.push_back("x" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    subjects.push_back("s" + std::to_string(i));
    for (auto& c : cols) c[i] = 1.0 + static_cast<double>(rng.below(6));
    y[i] = 1.0 + 0.01 * cols[0][i] + rng.normal(0, 0.03);
  }
  return RegressionDataset::create(subjects, y, ids, cols);
}

void BM_BestSubset(benchmark::State& state) {
  const RegressionDataset d = dataset(96, 42);
  std::vector<std::size_t> pool(42);
  std::iota(pool.begin(), pool.end(), 0);
  SearchConfig cfg;
  cfg.max_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(best_subset_search(d, pool, cfg).fitted);
}
BENCHMARK(BM_BestSubset)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_OlsQr(benchmark::State& state) {
  const RegressionDataset d = dataset(96, 6);
  for (auto _ : state) benchmark::DoNotOptimize(ols_fit(d.y, d.columns).rss);
}
BENCHMARK(BM_OlsQr);

void BM_CrossValidate(benchmark::State& state) {
  const RegressionDataset d = dataset(96, 6);
  const std::vector<std::size_t> cols{0, 1};
  CvConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(cross_validate(d, cols, cfg));
}
BENCHMARK(BM_CrossValidate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
