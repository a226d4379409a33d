#include "debtav/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "debtav/errors.hpp"
#include "debtav/parallel.hpp"
#include "debtav/rng.hpp"

namespace debtav {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------------------
// Item pool

FilteredPool filter_pool(const std::vector<ItemDefinition>& pool,
                         const std::vector<Exclusion>& exclusions) {
  std::map<std::string, ExclusionReason> drop;
  for (const Exclusion& e : exclusions) {
    const bool known = std::any_of(pool.begin(), pool.end(),
                                   [&](const ItemDefinition& d) { return d.id == e.item_id; });
    if (!known) throw ValidationError("exclusion names unknown item '" + e.item_id + "'");
    if (!drop.emplace(e.item_id, e.reason).second) {
      throw ValidationError("item '" + e.item_id + "' excluded twice");
    }
  }
  FilteredPool out;
  for (const ItemDefinition& item : pool) {
    auto it = drop.find(item.id);
    if (it == drop.end()) {
      out.kept.push_back(item);
    } else {
      ItemDefinition x = item;
      x.exclusion = it->second;
      out.excluded.push_back(std::move(x));
    }
  }
  return out;
}

std::vector<Exclusion> exclusions_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema_version", 0) != 1 || !doc.contains("exclusions") ||
      !doc["exclusions"].is_array()) {
    throw ParseError("exclusion list must be an object with schema_version 1 and an 'exclusions' array");
  }
  std::vector<Exclusion> out;
  for (const auto& e : doc["exclusions"]) {
    if (!e.is_object() || !e.contains("item_id") || !e.contains("reason") ||
        !e["item_id"].is_string() || !e["reason"].is_string()) {
      throw ParseError("each exclusion needs string fields 'item_id' and 'reason'");
    }
    out.push_back({e["item_id"].get<std::string>(),
                   parse_exclusion_reason(e["reason"].get<std::string>())});
  }
  return out;
}

std::vector<Exclusion> load_exclusions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open exclusion list " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return exclusions_from_json(doc);
}

// ---------------------------------------------------------------------------
// Data

std::size_t RegressionDataset::column_index(const std::string& item_id) const {
  auto it = std::find(item_ids.begin(), item_ids.end(), item_id);
  if (it == item_ids.end()) throw ValidationError("dataset has no item '" + item_id + "'");
  return static_cast<std::size_t>(it - item_ids.begin());
}

RegressionDataset RegressionDataset::create(std::vector<std::string> subject_ids,
                                            std::vector<double> y,
                                            std::vector<std::string> item_ids,
                                            std::vector<std::vector<double>> columns) {
  const std::size_t n = y.size();
  if (subject_ids.size() != n) throw ValidationError("subject ids and y differ in length");
  if (item_ids.size() != columns.size()) throw ValidationError("item ids and columns differ");
  for (const auto& c : columns) {
    if (c.size() != n) throw ValidationError("predictor column length differs from y");
  }
  if (std::set<std::string>(subject_ids.begin(), subject_ids.end()).size() != n) {
    throw ValidationError("duplicate subject id in regression dataset");
  }
  if (std::set<std::string>(item_ids.begin(), item_ids.end()).size() != item_ids.size()) {
    throw ValidationError("duplicate item id in regression dataset");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return subject_ids[a] < subject_ids[b]; });

  RegressionDataset d;
  d.item_ids = std::move(item_ids);
  d.subject_ids.reserve(n);
  d.y.reserve(n);
  for (std::size_t i : order) {
    d.subject_ids.push_back(subject_ids[i]);
    d.y.push_back(y[i]);
  }
  d.columns.resize(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    d.columns[j].reserve(n);
    for (std::size_t i : order) d.columns[j].push_back(columns[j][i]);
  }
  return d;
}

RegressionDataset build_dataset(const std::vector<EstimateRow>& estimates,
                                const std::vector<SurveyResponse>& responses,
                                const std::vector<std::string>& item_ids, bool consistent_only) {
  std::map<std::string, std::map<std::string, double>> by_subject;
  for (const SurveyResponse& r : responses) by_subject[r.subject_id][r.item_id] = r.value;

  std::vector<std::string> subjects;
  std::vector<double> y;
  std::vector<std::vector<double>> columns(item_ids.size());
  std::size_t dropped = 0;
  std::set<std::string> seen;
  for (const EstimateRow& e : estimates) {
    if (!seen.insert(e.subject_id).second) {
      throw ValidationError("duplicate estimate for subject '" + e.subject_id + "'");
    }
    if (consistent_only && e.status != EstimateStatus::consistent) continue;
    if (!std::isfinite(e.params.gamma)) {
      ++dropped;
      continue;
    }
    auto it = by_subject.find(e.subject_id);
    bool complete = it != by_subject.end();
    std::vector<double> row(item_ids.size());
    for (std::size_t j = 0; complete && j < item_ids.size(); ++j) {
      auto v = it->second.find(item_ids[j]);
      if (v == it->second.end()) {
        complete = false;
      } else {
        row[j] = v->second;
      }
    }
    if (!complete) {
      ++dropped;
      continue;
    }
    subjects.push_back(e.subject_id);
    y.push_back(e.params.gamma);
    for (std::size_t j = 0; j < item_ids.size(); ++j) columns[j].push_back(row[j]);
  }
  RegressionDataset d = RegressionDataset::create(std::move(subjects), std::move(y), item_ids,
                                                  std::move(columns));
  d.dropped = dropped;
  return d;
}

// ---------------------------------------------------------------------------
// Subsets

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    // c * (n - k + i) / i stays integral at every step.
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(c, static_cast<std::uint64_t>(i));
    const std::uint64_t cg = c / g;
    const std::uint64_t ig = i / g;
    if (cg > std::numeric_limits<std::uint64_t>::max() / num) {
      throw ValidationError("binomial coefficient overflows 64 bits");
    }
    c = cg * num / ig;
  }
  return c;
}

bool next_combination(std::vector<std::size_t>& combo, std::size_t n) {
  const std::size_t k = combo.size();
  for (std::size_t i = k; i-- > 0;) {
    if (combo[i] < n - k + i) {
      ++combo[i];
      for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> unrank_combination(std::size_t n, std::size_t k, std::uint64_t rank) {
  if (rank >= binomial(n, k)) throw ValidationError("combination rank out of range");
  std::vector<std::size_t> combo;
  combo.reserve(k);
  std::size_t next = 0;
  for (std::size_t slot = 0; slot < k; ++slot) {
    for (std::size_t v = next;; ++v) {
      // Number of combinations that start with v in this slot.
      const std::uint64_t block = binomial(n - v - 1, k - slot - 1);
      if (rank < block) {
        combo.push_back(v);
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return combo;
}

std::uint64_t enumerate_subsets(std::size_t n, std::size_t k,
                                const std::function<void(std::span<const std::size_t>)>& visit) {
  if (k > n) return 0;
  std::vector<std::size_t> combo(k);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  std::uint64_t count = 0;
  do {
    if (visit) visit(combo);
    ++count;
  } while (next_combination(combo, n));
  return count;
}

// ---------------------------------------------------------------------------
// Models

ModelCandidate fit_candidate(const RegressionDataset& data, std::span<const std::size_t> columns) {
  ModelCandidate c;
  std::vector<std::vector<double>> x;
  for (std::size_t j : columns) {
    if (j >= data.columns.size()) throw ValidationError("column index out of range");
    c.predictors.push_back(data.item_ids[j]);
    c.columns.push_back(j);
    x.push_back(data.columns[j]);
  }
  const OlsFit fit = ols_fit(data.y, x);
  c.coefficients = fit.coefficients;
  c.r2 = fit.r2;
  c.adj_r2 = fit.adj_r2;
  c.rss = fit.rss;
  c.degenerate = fit.degenerate;
  const InformationCriteria ic = information_criteria(fit.rss, fit.n, fit.p);
  c.aic = ic.aic;
  c.bic = ic.bic;
  c.exact_fit = ic.exact_fit;
  return c;
}

namespace {

// Residual sum of squares of any subset from the centred cross-product
// matrix, via a small Cholesky factorisation.
class GramScorer {
 public:
  GramScorer(const RegressionDataset& data, std::span<const std::size_t> cols)
      : n_(data.size()), q_(cols.size()), gram_(q_ * q_), cross_(q_) {
    const double dn = static_cast<double>(n_);
    const double ybar = std::accumulate(data.y.begin(), data.y.end(), 0.0) / dn;
    std::vector<std::vector<double>> centred(q_);
    for (std::size_t a = 0; a < q_; ++a) {
      const auto& col = data.columns[cols[a]];
      const double m = std::accumulate(col.begin(), col.end(), 0.0) / dn;
      centred[a].resize(n_);
      for (std::size_t i = 0; i < n_; ++i) centred[a][i] = col[i] - m;
    }
    for (std::size_t i = 0; i < n_; ++i) tss_ += (data.y[i] - ybar) * (data.y[i] - ybar);
    for (std::size_t a = 0; a < q_; ++a) {
      double xy = 0.0;
      for (std::size_t i = 0; i < n_; ++i) xy += centred[a][i] * (data.y[i] - ybar);
      cross_[a] = xy;
      for (std::size_t b = a; b < q_; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += centred[a][i] * centred[b][i];
        gram_[a * q_ + b] = gram_[b * q_ + a] = s;
      }
    }
  }

  /// Adjusted R2, or -infinity for a rank-deficient subset.
  double score(std::span<const std::size_t> subset) const {
    const std::size_t k = subset.size();
    if (n_ <= k + 1) return kNegInf;
    double L[kMax * kMax];
    double z[kMax];
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = gram_[subset[i] * q_ + subset[j]];
        for (std::size_t m = 0; m < j; ++m) s -= L[i * kMax + m] * L[j * kMax + m];
        if (i == j) {
          const double diag = gram_[subset[i] * q_ + subset[i]];
          if (!(s > 1e-10 * diag) || !(diag > 0.0)) return kNegInf;
          L[i * kMax + i] = std::sqrt(s);
        } else {
          L[i * kMax + j] = s / L[j * kMax + j];
        }
      }
      double t = cross_[subset[i]];
      for (std::size_t m = 0; m < i; ++m) t -= L[i * kMax + m] * z[m];
      z[i] = t / L[i * kMax + i];
    }
    double explained = 0.0;
    for (std::size_t i = 0; i < k; ++i) explained += z[i] * z[i];
    const double rss = std::max(0.0, tss_ - explained);
    const double r2 = tss_ > 0.0 ? 1.0 - rss / tss_ : (rss == 0.0 ? 1.0 : 0.0);
    return adjusted_r2(r2, n_, k);
  }

  static constexpr std::size_t kMax = 64;

 private:
  std::size_t n_;
  std::size_t q_;
  std::vector<double> gram_;
  std::vector<double> cross_;
  double tss_ = 0.0;
};

struct Scored {
  double score;
  std::vector<std::size_t> local;
};

SearchResult search_sizes(const RegressionDataset& data, std::span<const std::size_t> pool,
                          std::size_t min_size, std::size_t max_size, std::size_t top,
                          unsigned threads) {
  if (pool.empty()) throw ValidationError("empty predictor pool");
  if (top == 0) throw ValidationError("leaderboard size must be >= 1");
  if (min_size < 1 || min_size > max_size) throw ValidationError("invalid subset size range");
  if (data.size() == 0) throw ValidationError("regression dataset is empty");
  for (std::size_t c : pool) {
    if (c >= data.columns.size()) throw ValidationError("pool column out of range");
  }
  if (std::set<std::size_t>(pool.begin(), pool.end()).size() != pool.size()) {
    throw ValidationError("pool lists a column twice");
  }
  max_size = std::min(max_size, pool.size());
  if (max_size > GramScorer::kMax) throw ValidationError("subset size too large");

  const GramScorer scorer(data, pool);
  auto ids_less = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(), [&](std::size_t x, std::size_t y) {
          return data.item_ids[pool[x]] < data.item_ids[pool[y]];
        });
  };
  auto better = [&](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return ids_less(a.local, b.local);
  };
  auto offer = [&](std::vector<Scored>& board, Scored cand) {
    if (board.size() == top && !better(cand, board.back())) return;
    auto pos = std::upper_bound(board.begin(), board.end(), cand, better);
    board.insert(pos, std::move(cand));
    if (board.size() > top) board.pop_back();
  };

  SearchResult result;
  std::set<std::size_t> in_shortlist;
  for (std::size_t k = min_size; k <= max_size; ++k) {
    const std::uint64_t total = binomial(pool.size(), k);
    const std::size_t workers =
        static_cast<std::size_t>(std::min<std::uint64_t>(resolve_threads(threads), total));
    std::vector<std::vector<Scored>> boards(workers);
    parallel_for(workers, static_cast<unsigned>(workers), [&](std::size_t w) {
      const std::uint64_t begin = total * w / workers;
      const std::uint64_t end = total * (w + 1) / workers;
      std::vector<std::size_t> combo = unrank_combination(pool.size(), k, begin);
      for (std::uint64_t r = begin; r < end; ++r) {
        const double s = scorer.score(combo);
        if (boards[w].size() < top || s >= boards[w].back().score) offer(boards[w], {s, combo});
        next_combination(combo, pool.size());
      }
    });
    std::vector<Scored> merged;
    for (auto& b : boards) {
      for (auto& c : b) offer(merged, std::move(c));
    }

    Leaderboard lb;
    lb.size = k;
    lb.fitted = total;
    for (const Scored& s : merged) {
      std::vector<std::size_t> cols;
      for (std::size_t l : s.local) {
        cols.push_back(pool[l]);
        in_shortlist.insert(pool[l]);
      }
      lb.models.push_back(fit_candidate(data, cols));
    }
    result.fitted += total;
    result.leaderboards.push_back(std::move(lb));
  }
  for (std::size_t c : in_shortlist) result.shortlist.push_back(data.item_ids[c]);
  return result;
}

}  // namespace

SearchResult best_subset_search(const RegressionDataset& data,
                                std::span<const std::size_t> pool_columns,
                                const SearchConfig& config) {
  return search_sizes(data, pool_columns, config.min_size, config.max_size, config.top,
                      config.threads);
}

SearchResult exhaustive_shortlist_search(const RegressionDataset& data,
                                         const std::vector<std::string>& shortlist,
                                         std::size_t top, unsigned threads) {
  if (shortlist.empty()) throw ValidationError("shortlist is empty");
  if (shortlist.size() > 40) throw ValidationError("shortlist too long for exhaustive search");
  std::vector<std::size_t> cols;
  for (const std::string& id : shortlist) cols.push_back(data.column_index(id));
  std::sort(cols.begin(), cols.end());
  return search_sizes(data, cols, 1, cols.size(), top, threads);
}

// ---------------------------------------------------------------------------
// Cross-validation

std::vector<CvScore> cross_validate(const RegressionDataset& data,
                                    std::span<const std::size_t> columns, const CvConfig& config) {
  const std::size_t n = data.size();
  const std::size_t p = columns.size();
  if (config.replicates < 1) throw ValidationError("at least one CV replicate is required");
  if (config.ks.empty()) throw ValidationError("no fold counts given");
  std::vector<std::vector<double>> x;
  for (std::size_t j : columns) {
    if (j >= data.columns.size()) throw ValidationError("column index out of range");
    x.push_back(data.columns[j]);
  }

  std::vector<CvScore> out;
  for (int k : config.ks) {
    if (k < 2 || static_cast<std::size_t>(k) > n) {
      throw ValidationError("fold count k=" + std::to_string(k) + " must lie in [2, n=" +
                            std::to_string(n) + "]");
    }
    CvScore score;
    score.k = k;
    std::vector<double> obs_sq(n, 0.0);
    double mse_sum = 0.0, mae_sum = 0.0;
    const std::size_t folds = static_cast<std::size_t>(k);
    const std::size_t base = n / folds, extra = n % folds;

    std::vector<std::size_t> order(n), train, test;
    std::vector<double> rep_sq(n);
    std::vector<double> xi(p);
    for (std::size_t r = 0; r < config.replicates; ++r) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(config.seed, r);
      rng.shuffle(order);

      bool skip = false;
      double fold_mse = 0.0, fold_mae = 0.0;
      std::size_t begin = 0;
      for (std::size_t f = 0; f < folds && !skip; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        test.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                    order.begin() + static_cast<std::ptrdiff_t>(begin + len));
        train.clear();
        train.insert(train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(begin));
        train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(begin + len),
                     order.end());
        begin += len;
        if (train.size() < p + 1) {
          skip = true;
          break;
        }
        const OlsFit fit = ols_fit(data.y, x, train);
        if (fit.rank_deficient) {
          skip = true;
          break;
        }
        double sq = 0.0, ab = 0.0;
        for (std::size_t i : test) {
          for (std::size_t j = 0; j < p; ++j) xi[j] = x[j][i];
          const double e = data.y[i] - predict(fit, xi);
          rep_sq[i] = e * e;
          sq += e * e;
          ab += std::abs(e);
        }
        fold_mse += sq / static_cast<double>(len);
        fold_mae += ab / static_cast<double>(len);
      }
      if (skip) {
        ++score.skipped;
        continue;
      }
      ++score.replicates;
      mse_sum += fold_mse / static_cast<double>(folds);
      mae_sum += fold_mae / static_cast<double>(folds);
      for (std::size_t i = 0; i < n; ++i) obs_sq[i] += rep_sq[i];
    }

    if (score.replicates == 0) {
      score.mse = score.mae = score.mse_se = kInf;
    } else {
      const double reps = static_cast<double>(score.replicates);
      score.mse = mse_sum / reps;
      score.mae = mae_sum / reps;
      double mean = 0.0;
      for (double& v : obs_sq) {
        v /= reps;
        mean += v;
      }
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (double v : obs_sq) var += (v - mean) * (v - mean);
      var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
      score.mse_se = std::sqrt(var / static_cast<double>(n));
    }
    out.push_back(score);
  }
  return out;
}

std::string to_string(TieRule rule) { return rule == TieRule::exact ? "exact" : "one-se"; }

TieRule parse_tie_rule(const std::string& text) {
  if (text == "one-se") return TieRule::one_se;
  if (text == "exact") return TieRule::exact;
  throw ValidationError("unknown tie rule '" + text + "' (expected one-se or exact)");
}

double mean_cv_mse(const ModelCandidate& candidate) {
  if (candidate.cv.empty()) throw ValidationError("candidate has no CV scores");
  double s = 0.0;
  for (const CvScore& c : candidate.cv) s += c.mse;
  return s / static_cast<double>(candidate.cv.size());
}

namespace {
double mean_cv_se(const ModelCandidate& candidate) {
  double s = 0.0;
  for (const CvScore& c : candidate.cv) s += c.mse_se;
  return s / static_cast<double>(candidate.cv.size());
}
}  // namespace

Selection select_module(const std::vector<ModelCandidate>& candidates, TieRule rule) {
  if (candidates.empty()) throw ValidationError("empty leaderboard: nothing to select");
  std::vector<double> mse;
  for (const ModelCandidate& c : candidates) mse.push_back(mean_cv_mse(c));

  // Order by size, then position, so "first" always means fewest predictors.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].size() < candidates[b].size();
  });

  std::size_t best = order.front();
  for (std::size_t i : order) {
    if (mse[i] < mse[best]) best = i;
  }
  Selection sel;
  sel.rule = rule;
  sel.threshold = mse[best];
  if (rule == TieRule::one_se && std::isfinite(mse[best])) {
    sel.threshold = mse[best] + mean_cv_se(candidates[best]);
  }
  for (std::size_t i : order) {
    if (mse[i] <= sel.threshold) {
      sel.index = i;
      break;
    }
  }
  sel.mean_mse = mse[sel.index];
  return sel;
}

SelectionRun run_selection(const RegressionDataset& data, std::span<const std::size_t> pool_columns,
                           const SelectionConfig& config) {
  SelectionRun run;
  run.pool_size = pool_columns.size();
  run.search = best_subset_search(data, pool_columns, config.search);
  run.shortlist_search = exhaustive_shortlist_search(data, run.search.shortlist,
                                                     config.shortlist_top, config.search.threads);
  const std::size_t sizes = std::min(config.search.max_size, run.shortlist_search.leaderboards.size());
  std::vector<ModelCandidate> winners(sizes);
  parallel_for(sizes, config.search.threads, [&](std::size_t s) {
    ModelCandidate c = run.shortlist_search.leaderboards[s].models.front();
    c.cv = cross_validate(data, c.columns, config.cv);
    winners[s] = std::move(c);
  });
  run.winners = std::move(winners);
  run.selection = select_module(run.winners, config.rule);
  return run;
}

// ---------------------------------------------------------------------------
// Reports

namespace {
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}
}  // namespace

nlohmann::json to_json(const ModelCandidate& c) {
  nlohmann::json j;
  j["predictors"] = c.predictors;
  j["coefficients"] = nlohmann::json::array();
  for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
    j["coefficients"].push_back(
        {{"term", i == 0 ? std::string("(intercept)") : c.predictors[i - 1]},
         {"estimate", number(c.coefficients[i])}});
  }
  j["r2"] = number(c.r2);
  j["adj_r2"] = number(c.adj_r2);
  j["aic"] = number(c.aic);
  j["bic"] = number(c.bic);
  j["rss"] = number(c.rss);
  j["degenerate"] = c.degenerate;
  j["exact_fit"] = c.exact_fit;
  if (!c.cv.empty()) {
    j["cv"] = nlohmann::json::array();
    for (const CvScore& s : c.cv) {
      j["cv"].push_back({{"k", s.k},
                         {"mse", number(s.mse)},
                         {"mae", number(s.mae)},
                         {"mse_se", number(s.mse_se)},
                         {"replicates", s.replicates},
                         {"skipped", s.skipped}});
    }
    j["mean_cv_mse"] = number(mean_cv_mse(c));
  }
  return j;
}

nlohmann::json selection_report(const SelectionRun& run, const SelectionConfig& config) {
  nlohmann::json r;
  r["schema_version"] = 1;
  r["pool_size"] = run.pool_size;
  r["search"] = {{"min_size", config.search.min_size},
                 {"max_size", config.search.max_size},
                 {"top", config.search.top},
                 {"regressions", run.search.fitted}};
  r["leaderboards"] = nlohmann::json::array();
  for (const Leaderboard& lb : run.search.leaderboards) {
    nlohmann::json models = nlohmann::json::array();
    for (const ModelCandidate& c : lb.models) models.push_back(to_json(c));
    r["leaderboards"].push_back({{"size", lb.size}, {"fitted", lb.fitted}, {"models", models}});
  }
  r["shortlist"] = run.search.shortlist;
  r["shortlist_regressions"] = run.shortlist_search.fitted;
  r["cv"] = {{"ks", config.cv.ks}, {"replicates", config.cv.replicates}, {"seed", config.cv.seed}};
  r["sizes"] = nlohmann::json::array();
  for (const ModelCandidate& c : run.winners) {
    nlohmann::json j = to_json(c);
    j["size"] = c.size();
    r["sizes"].push_back(std::move(j));
  }
  const ModelCandidate& pick = run.winners[run.selection.index];
  r["recommended"] = to_json(pick);
  r["recommended"]["size"] = pick.size();
  r["recommended"]["tie_rule"] = to_string(run.selection.rule);
  r["recommended"]["threshold"] = number(run.selection.threshold);
  return r;
}

}  // namespace debtav
