#include "debtav/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "debtav/csv.hpp"
#include "debtav/errors.hpp"
#include "debtav/parallel.hpp"
#include "debtav/rng.hpp"

namespace debtav {

namespace {

constexpr std::uint64_t kParamStream = 0x70617261;   // "para"
constexpr std::uint64_t kChoiceStream = 0x63686f69;  // "choi"

double draw(Rng& rng, const NormalDensity& d, double lo, double hi) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double v = rng.normal(d.mean, d.sd);
    if (v > lo && v < hi) return v;
  }
  throw ValidationError("population places almost no mass inside the model domain");
}

}  // namespace

std::vector<PreferenceParams> sample_agents(const PopulationDistribution& pop, double mu,
                                            std::size_t n, std::uint64_t seed,
                                            const ParameterBounds& bounds) {
  pop.validate();
  if (n < 1) throw ValidationError("at least one agent is required");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ValidationError("mu must be positive");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::uint64_t base = mix_seed(seed, kParamStream);
  std::vector<PreferenceParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(base, i);
    PreferenceParams p;
    p.alpha = draw(rng, pop.alpha, bounds.alpha_min, bounds.alpha_max);
    p.delta = draw(rng, pop.delta, -1.0, inf);
    p.gamma = draw(rng, pop.gamma, -inf, inf);
    p.lambda = draw(rng, pop.lambda, 0.0, inf);
    p.mu = mu;
    out.push_back(p);
  }
  return out;
}

std::vector<ChoiceRecord> simulate_choices(const std::string& subject_id,
                                           const PreferenceParams& params,
                                           const MplCatalog& catalog, const UtilityConfig& config,
                                           std::uint64_t seed) {
  validate(params);
  Rng rng(seed);
  std::vector<ChoiceRecord> out;
  out.reserve(catalog.total_rows());
  for (const MPLSpec& mpl : catalog.mpls()) {
    for (std::size_t r = 0; r < mpl.rows.size(); ++r) {
      const double p = choice_probability(mpl.rows[r].option_a, mpl.rows[r].option_b, params, config);
      out.push_back({subject_id, mpl.id, r, rng.bernoulli(p) ? 1 : 0});
    }
  }
  return out;
}

std::string synthetic_subject_id(std::size_t index, std::size_t n) {
  std::string digits = std::to_string(index + 1);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "sim" + digits;
}

std::vector<SyntheticAgent> simulate_population(const PopulationDistribution& pop, double mu,
                                                std::size_t n, const MplCatalog& catalog,
                                                const UtilityConfig& config, std::uint64_t seed) {
  const std::vector<PreferenceParams> params = sample_agents(pop, mu, n, seed);
  const std::uint64_t base = mix_seed(seed, kChoiceStream);
  std::vector<SyntheticAgent> agents(n);
  for (std::size_t i = 0; i < n; ++i) {
    agents[i].subject_id = synthetic_subject_id(i, n);
    agents[i].true_params = params[i];
    agents[i].choices =
        simulate_choices(agents[i].subject_id, params[i], catalog, config, mix_seed(base, i));
  }
  return agents;
}

// ---------------------------------------------------------------------------

namespace {

Prospect now(double x) { return Prospect::certain({x, 0.0, 0.0, 1.0}); }

Prospect gamble(double p, double hi, double lo) {
  return Prospect({{{hi, 0.0, 0.0, 1.0}, p}, {{lo, 0.0, 0.0, 1.0}, 1.0 - p}});
}

std::string amount(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

// Rows base + step * (i + r / replicates) for i < count, r < replicates.
template <class Make>
MPLSpec price_list(std::string id, std::string description, double base, double step, int count,
                   int replicates, Make make) {
  MPLSpec mpl{std::move(id), std::move(description), {}};
  for (int i = 0; i < count; ++i) {
    for (int r = 0; r < replicates; ++r) {
      const double x = base + step * (i + static_cast<double>(r) / replicates);
      mpl.rows.push_back(make(x));
    }
  }
  return mpl;
}

}  // namespace

MplCatalog reference_design(int replicates) {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  const Prospect nothing = now(0.0);
  std::vector<MPLSpec> lists;

  lists.push_back(price_list("m1_risk", "sure amount vs 50% of 4", 1.0, 0.15, 12, replicates,
                             [&](double c) {
                               return MplRow{now(c), gamble(0.5, 4.0, 0.0), "sure " + amount(c)};
                             }));
  lists.push_back(price_list("m2_risk", "25% of 6 else 0.5 vs sure amount", 1.0, 0.15, 13,
                             replicates, [&](double c) {
                               return MplRow{gamble(0.25, 6.0, 0.5), now(c), "sure " + amount(c)};
                             }));
  lists.push_back(price_list("m3_loss", "nothing vs 50% win g / 50% lose 1.5", 1.0, 0.25, 13,
                             replicates, [&](double g) {
                               return MplRow{nothing, gamble(0.5, g, -1.5), "gain " + amount(g)};
                             }));
  lists.push_back(price_list("m4_time", "amount today vs 3 in 12 months", 1.6, 0.125, 13,
                             replicates, [&](double x) {
                               return MplRow{Prospect::certain({x, 0.0, 0.0, 12.0}),
                                             Prospect::certain({0.0, 3.0, 0.0, 12.0}),
                                             "today " + amount(x)};
                             }));
  lists.push_back(price_list("m5_saving", "nothing vs pay 2 today, receive y in 6 months", 1.5,
                             0.4, 13, replicates, [&](double y) {
                               return MplRow{nothing, Prospect::certain({-2.0, y, 0.0, 6.0}),
                                             "receive " + amount(y)};
                             }));
  lists.push_back(price_list("m6_debt", "nothing vs receive 2 today, repay r in 6 months", 0.8,
                             0.15, 13, replicates, [&](double r) {
                               return MplRow{nothing, Prospect::certain({2.0, -r, 0.0, 6.0}),
                                             "repay " + amount(r)};
                             }));
  lists.push_back(price_list("m7_debt", "receive g today and repay 3 in 6 months vs repay 3",
                             0.025, 0.05, 13, replicates, [&](double g) {
                               return MplRow{Prospect::certain({0.0, -3.0, 0.0, 6.0}),
                                             Prospect::certain({g, -3.0, 0.0, 6.0}),
                                             "receive " + amount(g)};
                             }));
  return MplCatalog(std::move(lists));
}

void write_truth(std::ostream& out, const std::vector<SyntheticAgent>& agents) {
  out << kTruthHeader << '\n';
  for (const SyntheticAgent& a : agents) {
    out << csv::escape(a.subject_id);
    for (double v : a.true_params.as_array()) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

std::vector<double> default_shrinkage_grid() { return parse_grid("0.0001:1:log25"); }

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != s.size() || !std::isfinite(v)) {
      throw ValidationError("bad number '" + s + "' in grid '" + text + "'");
    }
    return v;
  };
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ValidationError("grid range must look like a:b:logN");
    const double lo = number(parts[0]);
    const double hi = number(parts[1]);
    const std::string& spec = parts[2];
    const bool log = spec.rfind("log", 0) == 0;
    if (!log && spec.rfind("lin", 0) != 0) {
      throw ValidationError("grid spacing must be logN or linN, got '" + spec + "'");
    }
    const double count = number(spec.substr(3));
    if (count < 1 || count != std::floor(count)) throw ValidationError("grid count must be >= 1");
    if (lo > hi) throw ValidationError("grid range is inverted");
    if (log && !(lo > 0.0)) throw ValidationError("log grid needs a positive lower end");
    const int n = static_cast<int>(count);
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      grid.push_back(log ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                         : lo + f * (hi - lo));
    }
    grid.front() = lo;
    if (n > 1) grid.back() = hi;
  } else {
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) grid.push_back(number(part));
  }
  if (grid.empty()) throw ValidationError("empty grid");
  for (double s : grid) {
    if (s < 0.0) throw ValidationError("shrinkage values must be >= 0");
  }
  return grid;
}

CalibrationResult calibrate_shrinkage(const std::vector<SyntheticAgent>& agents,
                                      const MplCatalog& catalog, const std::vector<double>& grid,
                                      const CalibrationConfig& config) {
  if (grid.empty()) throw ValidationError("shrinkage grid is empty");
  for (double s : grid) {
    if (!(s >= 0.0)) throw ValidationError("shrinkage values must be >= 0");
  }
  if (agents.empty()) throw ValidationError("no agents to calibrate on");

  CalibrationResult result;
  for (double s : grid) {
    HierarchicalConfig hc = config.estimation;
    hc.population = config.population;
    hc.shrinkage = s;
    std::vector<SubjectEstimate> est(agents.size());
    parallel_for(agents.size(), config.threads, [&](std::size_t i) {
      est[i] = estimate_subject(agents[i].subject_id, agents[i].choices, catalog, hc);
    });
    CalibrationRow row;
    row.s = s;
    double sum = 0.0;
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (est[i].status != EstimateStatus::consistent) {
        ++row.failures;
        continue;
      }
      const double e = est[i].params.gamma - agents[i].true_params.gamma;
      sum += e * e;
      ++row.estimated;
    }
    row.mse_gamma = row.estimated ? sum / static_cast<double>(row.estimated)
                                  : std::numeric_limits<double>::infinity();
    row.disqualified = static_cast<double>(row.failures) >
                       config.max_failure_share * static_cast<double>(agents.size());
    result.table.push_back(row);
  }

  const CalibrationRow* best = nullptr;
  for (const CalibrationRow& row : result.table) {
    if (row.disqualified || row.estimated == 0) continue;
    if (!best || row.mse_gamma < best->mse_gamma ||
        (row.mse_gamma == best->mse_gamma && row.s < best->s)) {
      best = &row;
    }
  }
  if (best) result.best_s = best->s;
  return result;
}

CalibrationResult calibrate_shrinkage(const MplCatalog& catalog, const std::vector<double>& grid,
                                      const CalibrationConfig& config) {
  const auto agents = simulate_population(config.population, config.mu, config.agents, catalog,
                                          config.estimation.utility, config.seed);
  return calibrate_shrinkage(agents, catalog, grid, config);
}

}  // namespace debtav
