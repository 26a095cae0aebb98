#include "fedpso/pso.hpp"

#include <algorithm>
#include <cmath>

#include "fedpso/parallel.hpp"

namespace fedpso {

void SearchBounds::validate() const {
  auto check = [](int lo, int hi, const char* name) {
    if (lo < 1) {
      throw std::invalid_argument(std::string("min_") + name + " must be >= 1");
    }
    if (lo > hi) {
      throw std::invalid_argument(std::string("min_") + name +
                                  " must not exceed max_" + name);
    }
  };
  check(min_layers, max_layers, "layers");
  check(min_neurons, max_neurons, "neurons");
  check(min_epochs, max_epochs, "epochs");
}

void PsoCoefficients::validate() const {
  if (!(w > 0.0 && w <= 1.0)) {
    throw std::invalid_argument("inertia weight w must lie in (0, 1]");
  }
  if (c1 < 0.0 || c1 > 4.0 || c2 < 0.0 || c2 > 4.0) {
    throw std::invalid_argument("acceleration coefficients c1, c2 must lie in [0, 4]");
  }
}

VelocityBounds VelocityBounds::from(const SearchBounds& b) {
  return {0.1 * (b.max_layers - b.min_layers),
          0.1 * (b.max_neurons - b.min_neurons),
          0.1 * (b.max_epochs - b.min_epochs)};
}

ModelConfig round_to_config(const Position& p) {
  return {static_cast<int>(std::llround(p.l)), static_cast<int>(std::llround(p.n)),
          static_cast<int>(std::llround(p.e))};
}

Velocity update_velocity(const ParticleState& p, const Position& gbest,
                         const PsoCoefficients& coef, const VelocityBounds& vb,
                         Rng& rng, bool literal_form) {
  auto component = [&](double v, double x, double pb, double gb, double cap) {
    const double r1 = rng.uniform();
    const double r2 = rng.uniform();
    // the literal form pulls toward (best - velocity) instead of (best - position)
    const double ref = literal_form ? v : x;
    const double raw = coef.w * v + coef.c1 * r1 * (pb - ref) + coef.c2 * r2 * (gb - ref);
    return std::clamp(raw, -cap, cap);
  };
  Velocity out;
  out.vl = component(p.velocity.vl, p.position.l, p.pbest_position.l, gbest.l, vb.max_vl);
  out.vn = component(p.velocity.vn, p.position.n, p.pbest_position.n, gbest.n, vb.max_vn);
  out.ve = component(p.velocity.ve, p.position.e, p.pbest_position.e, gbest.e, vb.max_ve);
  return out;
}

void update_position(Position& pos, Velocity& vel, const SearchBounds& b) {
  auto move = [](double& x, double& v, double lo, double hi) {
    x += v;
    if (x < lo) {
      x = lo;
      v = 0.0;
    } else if (x > hi) {
      x = hi;
      v = 0.0;
    }
  };
  move(pos.l, vel.vl, b.min_layers, b.max_layers);
  move(pos.n, vel.vn, b.min_neurons, b.max_neurons);
  move(pos.e, vel.ve, b.min_epochs, b.max_epochs);
}

SwarmState init_swarm(const SearchBounds& b, int pop_size, std::uint64_t seed) {
  b.validate();
  if (pop_size < 1) throw std::invalid_argument("pop_size must be >= 1");

  SwarmState s;
  s.bounds = b;
  s.velocity_bounds = VelocityBounds::from(b);
  s.rng_seed = seed;
  s.rng = Rng(seed);
  const std::size_t np = static_cast<std::size_t>(pop_size);
  s.particles.resize(np);

  // Latin-hypercube placement: per dimension, one particle per stratum,
  // uniform within it. Marginals stay uniform over the box.
  std::vector<std::size_t> strat_l(np), strat_n(np), strat_e(np);
  for (std::size_t i = 0; i < np; ++i) strat_l[i] = strat_n[i] = strat_e[i] = i;
  s.rng.shuffle(strat_l);
  s.rng.shuffle(strat_n);
  s.rng.shuffle(strat_e);

  for (std::size_t i = 0; i < np; ++i) {
    auto& p = s.particles[i];
    auto place = [&](double lo, double hi, std::size_t stratum) {
      const double width = (hi - lo) / static_cast<double>(np);
      return lo + width * (static_cast<double>(stratum) + s.rng.uniform());
    };
    p.position.l = place(b.min_layers, b.max_layers, strat_l[i]);
    p.position.n = place(b.min_neurons, b.max_neurons, strat_n[i]);
    p.position.e = place(b.min_epochs, b.max_epochs, strat_e[i]);
    p.velocity.vl = s.rng.uniform(-s.velocity_bounds.max_vl, s.velocity_bounds.max_vl);
    p.velocity.vn = s.rng.uniform(-s.velocity_bounds.max_vn, s.velocity_bounds.max_vn);
    p.velocity.ve = s.rng.uniform(-s.velocity_bounds.max_ve, s.velocity_bounds.max_ve);
    p.pbest_position = p.position;
  }
  s.gbest_position = s.particles.front().position;
  return s;
}

namespace {

// Evaluates each particle's rounded config against the swarm cache; new
// configs may be evaluated concurrently. Returns per-particle fitness and
// whether the value came from the cache.
std::vector<std::pair<double, bool>> evaluate_particles(
    SwarmState& s, const FitnessFn& fn, int threads, int iteration,
    std::vector<EvalRecord>* log) {
  const std::size_t n = s.particles.size();
  std::vector<ModelConfig> configs(n);
  for (std::size_t i = 0; i < n; ++i) {
    configs[i] = round_to_config(s.particles[i].position);
  }

  // distinct configs not yet cached, in first-appearance order
  struct Miss {
    ModelConfig config;
    int first_particle;
    Fitness fitness;
    std::exception_ptr error;
  };
  std::vector<Miss> misses;
  std::map<ModelConfig, std::size_t, ConfigLess> miss_index;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.fitness_cache.count(configs[i]) || miss_index.count(configs[i])) continue;
    miss_index[configs[i]] = misses.size();
    misses.push_back({configs[i], static_cast<int>(i), {}, nullptr});
  }

  parallel_for(misses.size(), threads, [&](std::size_t m) {
    try {
      misses[m].fitness = fn(misses[m].config);
    } catch (...) {
      misses[m].error = std::current_exception();
    }
  });

  // report the failure with the lowest particle index; the trace holds
  // only records from completed iterations
  for (const auto& m : misses) {
    if (!m.error) continue;
    std::string what = "fitness evaluation failed";
    try {
      std::rethrow_exception(m.error);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    throw PsoAborted("particle " + std::to_string(m.first_particle) + " at " +
                         to_string(m.config) + ": " + what,
                     m.first_particle, log ? *log : std::vector<EvalRecord>{});
  }

  for (const auto& m : misses) {
    if (!s.direction) {
      s.direction = m.fitness.direction;
    } else if (*s.direction != m.fitness.direction) {
      throw std::logic_error("fitness function changed optimization direction");
    }
    s.fitness_cache.emplace(m.config, m.fitness.value);
  }

  std::vector<std::pair<double, bool>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double value = s.fitness_cache.at(configs[i]);
    bool hit = true;
    auto it = miss_index.find(configs[i]);
    if (it != miss_index.end() && misses[it->second].first_particle == static_cast<int>(i)) {
      hit = false;  // this particle triggered the evaluation
    }
    out[i] = {value, hit};
    if (log) {
      log->push_back({iteration, static_cast<int>(i), configs[i], value, hit});
    }
  }
  return out;
}

}  // namespace

void evaluate_initial(SwarmState& s, const FitnessFn& fn,
                      std::vector<EvalRecord>* log, int threads) {
  if (s.evaluated) throw std::logic_error("swarm already evaluated");
  auto values = evaluate_particles(s, fn, threads, /*iteration=*/0, log);
  const Direction dir = *s.direction;
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    s.particles[i].pbest_fitness = {values[i].first, dir};
    s.particles[i].pbest_position = s.particles[i].position;
  }
  s.gbest_fitness = Fitness::worst(dir);
  for (const auto& p : s.particles) {
    if (p.pbest_fitness.better_than(s.gbest_fitness)) {
      s.gbest_fitness = p.pbest_fitness;
      s.gbest_position = p.pbest_position;
    }
  }
  s.evaluated = true;
}

void step(SwarmState& s, const FitnessFn& fn, const StepOptions& opts,
          std::vector<EvalRecord>* log) {
  if (!s.evaluated) throw std::logic_error("swarm not evaluated; run evaluate_initial first");
  opts.coef.validate();
  s.iteration += 1;

  for (auto& p : s.particles) {
    p.velocity = update_velocity(p, s.gbest_position, opts.coef, s.velocity_bounds,
                                 s.rng, opts.literal_form);
    update_position(p.position, p.velocity, s.bounds);
  }

  auto values = evaluate_particles(s, fn, opts.threads, s.iteration, log);
  const Direction dir = *s.direction;

  // pbest on strict improvement, then gbest from the iteration's best
  int best_idx = -1;
  Fitness best_fit = Fitness::worst(dir);
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    const Fitness f{values[i].first, dir};
    auto& p = s.particles[i];
    if (f.better_than(p.pbest_fitness)) {
      p.pbest_fitness = f;
      p.pbest_position = p.position;
    }
    if (f.better_than(best_fit)) {
      best_fit = f;
      best_idx = static_cast<int>(i);
    }
  }
  if (best_idx >= 0 && best_fit.better_than(s.gbest_fitness)) {
    s.gbest_fitness = best_fit;
    s.gbest_position = s.particles[static_cast<std::size_t>(best_idx)].position;
  }
}

PsoCoefficients sample_coefficients(double w, std::uint64_t run_seed) {
  Rng rng(mix_seed(run_seed, 0xC0EFu));
  PsoCoefficients coef;
  coef.w = w;
  coef.c1 = rng.uniform(0.0, 4.0);
  coef.c2 = rng.uniform(0.0, 4.0);
  return coef;
}

PsoResult run(const SearchBounds& bounds, const PsoCoefficients& coef,
              int pop_size, int max_it, const FitnessFn& fn, std::uint64_t seed,
              const RunOptions& opts) {
  coef.validate();
  if (max_it < 1) throw std::invalid_argument("max_it must be >= 1");

  SwarmState s = init_swarm(bounds, pop_size, seed);
  PsoResult res;
  res.coefficients = coef;
  res.resampled_coefficients = opts.resample_coefficients;
  evaluate_initial(s, fn, &res.evaluations, opts.threads);

  Rng coef_rng(mix_seed(seed, 0xC0EFu));
  StepOptions step_opts{coef, opts.literal_form, opts.threads};
  double prev_gbest = s.gbest_fitness.value;
  int flat_pairs = 0;
  while (s.iteration < max_it) {
    if (opts.resample_coefficients) {
      step_opts.coef.c1 = coef_rng.uniform(0.0, 4.0);
      step_opts.coef.c2 = coef_rng.uniform(0.0, 4.0);
      res.coefficients = step_opts.coef;
    }
    step(s, fn, step_opts, &res.evaluations);
    const double cur = s.gbest_fitness.value;
    // stall rule: gbest flat (change below epsilon) across two consecutive
    // iteration pairs; with a constant fitness this fires after iteration 2
    if (std::abs(cur - prev_gbest) < opts.epsilon) {
      if (++flat_pairs >= 2) {
        res.converged = true;
        break;
      }
    } else {
      flat_pairs = 0;
    }
    prev_gbest = cur;
  }

  res.best_config = round_to_config(s.gbest_position);
  res.best_fitness = s.gbest_fitness;
  res.iterations_used = s.iteration;
  return res;
}

}  // namespace fedpso
