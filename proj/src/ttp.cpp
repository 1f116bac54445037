#include "mcopt/ttp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mcopt::ttp {

void Instance::validate() const {
  if (city_count < 2) throw InvalidInstance("a TTP instance needs at least 2 cities");
  if (distances.size() != city_count * city_count) {
    throw InvalidInstance("distance matrix does not match the city count");
  }
  for (std::size_t a = 0; a < city_count; ++a) {
    if (distance(a, a) != 0.0) throw InvalidInstance("distance matrix diagonal must be zero");
    for (std::size_t b = 0; b < city_count; ++b) {
      const double d = distance(a, b);
      if (!std::isfinite(d) || d < 0.0) throw InvalidInstance("distances must be finite and >= 0");
      if (d != distance(b, a)) throw InvalidInstance("distance matrix must be symmetric");
    }
  }
  if (source == DistanceSource::coordinates && coordinates.size() != city_count) {
    throw InvalidInstance("coordinate count does not match the city count");
  }
  for (const auto& item : items) {
    if (item.city == 0 || item.city >= city_count) {
      throw InvalidInstance("items must live in a city other than the start city");
    }
    if (!(item.profit >= 0.0)) throw InvalidInstance("item profits must be >= 0");
    if (!(item.weight > 0.0)) throw InvalidInstance("item weights must be > 0");
  }
  if (!(capacity > 0.0)) throw InvalidInstance("knapsack capacity must be > 0");
  if (!(min_speed > 0.0 && min_speed <= max_speed)) {
    throw InvalidInstance("speeds must satisfy 0 < min_speed <= max_speed");
  }
  if (!(renting_rate >= 0.0)) throw InvalidInstance("renting rate must be >= 0");
}

void compute_distances(Instance& instance, bool round_to_integer) {
  const auto n = instance.city_count;
  instance.distances.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dx = instance.coordinates[a][0] - instance.coordinates[b][0];
      const double dy = instance.coordinates[a][1] - instance.coordinates[b][1];
      double d = std::sqrt(dx * dx + dy * dy);
      if (round_to_integer) d = std::round(d);
      instance.distances[a * n + b] = d;
      instance.distances[b * n + a] = d;
    }
  }
}

Instance from_matrix(std::vector<std::vector<double>> matrix, std::vector<Item> items,
                     double capacity, double min_speed, double max_speed, double renting_rate) {
  Instance inst;
  inst.name = "matrix";
  inst.edge_weight_type = "EXPLICIT";
  inst.source = DistanceSource::matrix;
  inst.city_count = matrix.size();
  for (const auto& row : matrix) {
    if (row.size() != matrix.size()) throw InvalidInstance("distance matrix must be square");
    inst.distances.insert(inst.distances.end(), row.begin(), row.end());
  }
  inst.items = std::move(items);
  inst.capacity = capacity;
  inst.min_speed = min_speed;
  inst.max_speed = max_speed;
  inst.renting_rate = renting_rate;
  inst.validate();
  return inst;
}

// Evaluation ------------------------------------------------------------------

std::optional<std::string> check_tour(const Instance& instance, const std::vector<int>& tour) {
  const auto n = instance.city_count;
  if (tour.size() != n) return "tour must visit all " + std::to_string(n) + " cities";
  if (tour.front() != 0) return "tour must start at city 1";
  std::vector<bool> seen(n, false);
  for (int city : tour) {
    if (city < 0 || static_cast<std::size_t>(city) >= n || seen[city]) {
      return "tour is not a permutation of the cities";
    }
    seen[city] = true;
  }
  return std::nullopt;
}

std::optional<std::string> check_plan(const Instance& instance, const std::vector<int>& plan) {
  if (plan.size() != instance.items.size()) return "plan needs one flag per item";
  for (int bit : plan) {
    if (bit != 0 && bit != 1) return "plan flags must be 0 or 1";
  }
  if (picked_weight(instance, plan) > instance.capacity) return "plan exceeds the capacity";
  return std::nullopt;
}

double picked_weight(const Instance& instance, const std::vector<int>& plan) {
  double w = 0.0;
  for (std::size_t j = 0; j < plan.size() && j < instance.items.size(); ++j) {
    if (plan[j] != 0) w += instance.items[j].weight;
  }
  return w;
}

double tour_time(const Instance& instance, const std::vector<int>& tour,
                 const std::vector<int>& plan) {
  if (auto error = check_tour(instance, tour)) throw InvalidSolution(*error);
  if (plan.size() != instance.items.size()) throw InvalidSolution("plan needs one flag per item");
  for (int flag : plan) {
    if (flag != 0 && flag != 1) throw InvalidSolution("plan flags must be 0 or 1");
  }
  if (picked_weight(instance, plan) > instance.capacity) {
    throw CapacityExceeded("picked weight exceeds the knapsack capacity");
  }
  std::vector<double> weight_at(instance.city_count, 0.0);
  for (std::size_t j = 0; j < plan.size(); ++j) {
    if (plan[j] != 0) weight_at[instance.items[j].city] += instance.items[j].weight;
  }
  const double slope = (instance.max_speed - instance.min_speed) / instance.capacity;
  double carried = 0.0;
  double time = 0.0;
  const auto n = tour.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto from = static_cast<std::size_t>(tour[i]);
    const auto to = static_cast<std::size_t>(tour[(i + 1) % n]);
    carried += weight_at[from];
    time += instance.distance(from, to) / (instance.max_speed - slope * carried);
  }
  return time;
}

double objective(const Instance& instance, const Solution& solution) {
  const double time = tour_time(instance, solution.tour, solution.plan);
  double profit = 0.0;
  for (std::size_t j = 0; j < solution.plan.size(); ++j) {
    if (solution.plan[j] != 0) profit += instance.items[j].profit;
  }
  return profit - instance.renting_rate * time;
}

// Enumeration helpers -----------------------------------------------------------

namespace {

double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

template <typename Visit>
void for_each_tour(std::size_t n, Visit&& visit) {
  std::vector<int> tour(n);
  std::iota(tour.begin(), tour.end(), 0);
  do {
    visit(tour);
  } while (std::next_permutation(tour.begin() + 1, tour.end()));
}

template <typename Visit>
void for_each_feasible_plan(const Instance& instance, Visit&& visit) {
  const auto m = instance.items.size();
  std::vector<int> plan(m, 0);
  const std::uint64_t limit = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    for (std::size_t j = 0; j < m; ++j) plan[j] = static_cast<int>((mask >> j) & 1U);
    if (picked_weight(instance, plan) <= instance.capacity) visit(plan);
  }
}

std::vector<std::pair<std::size_t, std::size_t>> swap_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

void repair_plan(const Instance& instance, std::vector<int>& plan, Rng& rng) {
  std::vector<std::size_t> picked;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    if (plan[j] != 0) picked.push_back(j);
  }
  std::shuffle(picked.begin(), picked.end(), rng);
  double w = picked_weight(instance, plan);
  for (auto j : picked) {
    if (w <= instance.capacity) break;
    plan[j] = 0;
    w -= instance.items[j].weight;
  }
}

}  // namespace

BruteForceResult brute_force_solve(const Instance& instance, double cap) {
  const auto n = instance.city_count;
  const auto m = instance.items.size();
  const double space = factorial(n - 1) * std::pow(2.0, static_cast<double>(m));
  if (space > cap) {
    throw SpaceTooLarge("TTP brute force needs " + std::to_string(space) +
                        " candidates, cap is " + std::to_string(cap));
  }
  BruteForceResult result;
  result.value = -std::numeric_limits<double>::infinity();
  Solution candidate;
  for_each_tour(n, [&](const std::vector<int>& tour) {
    candidate.tour = tour;
    for_each_feasible_plan(instance, [&](const std::vector<int>& plan) {
      candidate.plan = plan;
      const double v = objective(instance, candidate);
      ++result.evaluated;
      const double tol = 1e-9 * std::max(1.0, std::abs(v));
      if (v > result.value + tol) {
        result.value = v;
        result.optima.assign(1, candidate);
      } else if (std::abs(v - result.value) <= tol) {
        result.optima.push_back(candidate);
      }
    });
  });
  return result;
}

// Composite view ----------------------------------------------------------------

CompositeSolution to_composite(const Solution& solution) {
  return CompositeSolution{{solution.tour, solution.plan}};
}

Solution from_composite(const CompositeSolution& solution) {
  return Solution{solution.parts.at(0), solution.parts.at(1)};
}

CompositeProblem as_composite(std::shared_ptr<const Instance> instance,
                              const CompositeOptions& options) {
  instance->validate();
  const auto n = instance->city_count;
  const auto m = instance->items.size();
  const bool identity = options.include_identity;

  Component tour;
  tour.name = kTourComponent;
  tour.check = [instance](const Part& p) { return check_tour(*instance, p); };
  tour.initial = [n](Rng& rng) {
    Part p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin() + 1, p.end(), rng);
    return p;
  };
  auto pairs = std::make_shared<const std::vector<std::pair<std::size_t, std::size_t>>>(swap_pairs(n));
  tour.neighborhood = [pairs, identity](const Part& p) {
    return Neighborhood::from_moves(
        p, pairs->size(),
        [pairs](const Part& src, std::size_t k) {
          Part out = src;
          std::swap(out[(*pairs)[k].first], out[(*pairs)[k].second]);
          return out;
        },
        identity);
  };
  tour.crossover = [n](const Part& a, const Part& b, Rng& rng) {
    // order crossover on positions 1..n-1
    if (n < 3) return a;
    std::uniform_int_distribution<std::size_t> cut(1, n - 1);
    auto lo = cut(rng);
    auto hi = cut(rng);
    if (lo > hi) std::swap(lo, hi);
    Part child(n, -1);
    std::vector<bool> used(n, false);
    child[0] = 0;
    used[0] = true;
    for (auto i = lo; i <= hi; ++i) {
      child[i] = a[i];
      used[a[i]] = true;
    }
    std::size_t write = hi % (n - 1) + 1;
    for (std::size_t step = 0; step < n - 1; ++step) {
      const int city = b[(hi + step) % (n - 1) + 1];
      if (used[city]) continue;
      child[write] = city;
      used[city] = true;
      write = write % (n - 1) + 1;
    }
    return child;
  };
  tour.enumerate = [n](const std::function<void(const Part&)>& visit) { for_each_tour(n, visit); };
  tour.space_size = [n] { return factorial(n - 1); };

  Component plan;
  plan.name = kPlanComponent;
  plan.check = [instance](const Part& p) { return check_plan(*instance, p); };
  plan.initial = [instance, m](Rng& rng) {
    Part p(m, 0);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution coin(0.5);
    double w = 0.0;
    for (auto j : order) {
      if (coin(rng) && w + instance->items[j].weight <= instance->capacity) {
        p[j] = 1;
        w += instance->items[j].weight;
      }
    }
    return p;
  };
  plan.neighborhood = [instance, identity](const Part& p) {
    auto flips = std::make_shared<std::vector<std::size_t>>();
    const double w = picked_weight(*instance, p);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j] != 0 || w + instance->items[j].weight <= instance->capacity) flips->push_back(j);
    }
    return Neighborhood::from_moves(
        p, flips->size(),
        [flips](const Part& src, std::size_t k) {
          Part out = src;
          out[(*flips)[k]] ^= 1;
          return out;
        },
        identity);
  };
  plan.crossover = [instance](const Part& a, const Part& b, Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    Part child(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) child[j] = coin(rng) ? a[j] : b[j];
    repair_plan(*instance, child, rng);
    return child;
  };
  plan.enumerate = [instance](const std::function<void(const Part&)>& visit) {
    for_each_feasible_plan(*instance, visit);
  };
  plan.space_size = [m] { return std::pow(2.0, static_cast<double>(m)); };

  DependencyGraph graph(2);
  graph.add_edge(1, 0);  // PLAN <- TOUR
  graph.add_edge(0, 1);  // TOUR <- PLAN

  auto score = [instance](const CompositeSolution& sol) {
    return objective(*instance, Solution{sol.parts[0], sol.parts[1]});
  };
  return CompositeProblem({std::move(tour), std::move(plan)}, std::move(graph), std::move(score),
                          Orientation::maximize);
}

namespace {

SubSolver make_subsolver(std::shared_ptr<const Instance> instance, std::size_t component,
                         SubSolverMode mode) {
  auto problem = std::make_shared<const CompositeProblem>(as_composite(std::move(instance)));
  SubSolver sub = mode == SubSolverMode::exact ? exhaustive_subsolver(problem, component)
                                               : local_search_subsolver(problem, component);
  return sub;
}

}  // namespace

SubSolver subsolver_tour(std::shared_ptr<const Instance> instance, SubSolverMode mode) {
  return make_subsolver(std::move(instance), 0, mode);
}

SubSolver subsolver_plan(std::shared_ptr<const Instance> instance, SubSolverMode mode) {
  return make_subsolver(std::move(instance), 1, mode);
}

// Generator -------------------------------------------------------------------

Instance generate(const GenerateParams& params) {
  if (params.cities < 2) throw InvalidConfig("a TTP instance needs at least 2 cities");
  if (!(params.capacity_fraction > 0.0 && params.capacity_fraction <= 1.0)) {
    throw InvalidConfig("capacity_fraction must be in (0, 1]");
  }
  Rng rng(params.seed);
  std::uniform_int_distribution<int> coordinate(0, 100);
  std::uniform_int_distribution<int> value(1, 100);

  Instance inst;
  inst.name = "gen-n" + std::to_string(params.cities) + "-m" + std::to_string(params.items) +
              "-s" + std::to_string(params.seed);
  inst.knapsack_data_type = "uncorrelated";
  inst.edge_weight_type = "EUC_2D";
  inst.city_count = params.cities;
  for (std::size_t c = 0; c < params.cities; ++c) {
    const double x = coordinate(rng);
    const double y = coordinate(rng);
    inst.coordinates.push_back({x, y});
  }
  compute_distances(inst);

  double total_weight = 0.0;
  double total_profit = 0.0;
  for (std::size_t j = 0; j < params.items; ++j) {
    Item item;
    item.city = 1 + j % (params.cities - 1);
    item.profit = value(rng);
    item.weight = value(rng);
    total_weight += item.weight;
    total_profit += item.profit;
    inst.items.push_back(item);
  }
  inst.capacity = std::max(1.0, std::floor(params.capacity_fraction * total_weight));
  inst.min_speed = 0.1;
  inst.max_speed = 1.0;
  if (params.renting_rate >= 0.0) {
    inst.renting_rate = params.renting_rate;
  } else {
    double length = 0.0;
    for (std::size_t c = 0; c < params.cities; ++c) {
      length += inst.distance(c, (c + 1) % params.cities);
    }
    const double rate = length > 0.0 ? 0.25 * total_profit / (length / inst.max_speed) : 0.0;
    inst.renting_rate = std::round(rate * 1e4) / 1e4;
  }
  inst.validate();
  return inst;
}

}  // namespace mcopt::ttp
