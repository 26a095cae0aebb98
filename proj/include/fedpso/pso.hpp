#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedpso/rng.hpp"
#include "fedpso/types.hpp"

namespace fedpso {

// Integer search box for (L, N, E).
struct SearchBounds {
  int min_layers = 1;
  int max_layers = 5;
  int min_neurons = 1;
  int max_neurons = 200;
  int min_epochs = 1;
  int max_epochs = 50;

  void validate() const;  // throws std::invalid_argument
};

struct PsoCoefficients {
  double w = 0.729;  // inertia
  double c1 = 2.0;   // pull toward pbest
  double c2 = 2.0;   // pull toward gbest

  void validate() const;  // w in (0,1], c1/c2 in [0,4]
};

// Per-dimension velocity cap: 10% of the dimension's range, symmetric
// about zero. Always derived from the search bounds, never set directly.
struct VelocityBounds {
  double max_vl = 0.0;
  double max_vn = 0.0;
  double max_ve = 0.0;

  static VelocityBounds from(const SearchBounds& b);
};

// Continuous relaxation of (L, N, E); models are instantiated at the
// nearest-integer rounding.
struct Position {
  double l = 0.0;
  double n = 0.0;
  double e = 0.0;
};

struct Velocity {
  double vl = 0.0;
  double vn = 0.0;
  double ve = 0.0;
};

struct ParticleState {
  Position position;
  Velocity velocity;
  Position pbest_position;
  Fitness pbest_fitness;
};

struct SwarmState {
  std::vector<ParticleState> particles;
  Position gbest_position;
  Fitness gbest_fitness;
  int iteration = 0;
  std::uint64_t rng_seed = 0;

  SearchBounds bounds;
  VelocityBounds velocity_bounds;
  Rng rng{0};
  bool evaluated = false;  // initial fitness pass done
  std::optional<Direction> direction;
  std::map<ModelConfig, double, ConfigLess> fitness_cache;
};

using FitnessFn = std::function<Fitness(const ModelConfig&)>;

struct EvalRecord {
  int iteration = 0;
  int particle = 0;
  ModelConfig config;
  double fitness = 0.0;
  bool cache_hit = false;
};

// Thrown when a fitness evaluation fails; carries the offending particle
// index and the evaluation trace recorded before the failing iteration.
struct PsoAborted : std::runtime_error {
  PsoAborted(const std::string& msg, int particle, std::vector<EvalRecord> trace)
      : std::runtime_error(msg),
        particle_index(particle),
        partial_trace(std::move(trace)) {}

  int particle_index;
  std::vector<EvalRecord> partial_trace;
};

struct StepOptions {
  PsoCoefficients coef;
  // When set, the velocity update subtracts the current velocity (instead
  // of the current position) from pbest/gbest in the attraction terms.
  bool literal_form = false;
  int threads = 1;
};

struct PsoResult {
  ModelConfig best_config;
  Fitness best_fitness;
  int iterations_used = 0;
  bool converged = false;  // stopped by the stall rule rather than max_it
  PsoCoefficients coefficients;  // last pair used when resampling
  bool resampled_coefficients = false;
  std::vector<EvalRecord> evaluations;
};

ModelConfig round_to_config(const Position& p);

// v' = w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x), clamped per dimension.
// Draws two fresh uniforms per dimension, in (L, N, E) order.
Velocity update_velocity(const ParticleState& p, const Position& gbest,
                         const PsoCoefficients& coef, const VelocityBounds& vb,
                         Rng& rng, bool literal_form = false);

// x' = x + v componentwise; coordinates that leave the box are clamped to
// the boundary and that velocity component is zeroed.
void update_position(Position& pos, Velocity& vel, const SearchBounds& b);

SwarmState init_swarm(const SearchBounds& b, int pop_size, std::uint64_t seed);

// Evaluates every particle at its rounded config and seeds pbest/gbest.
void evaluate_initial(SwarmState& s, const FitnessFn& fn,
                      std::vector<EvalRecord>* log = nullptr, int threads = 1);

// One full iteration: velocity/position updates for all particles, then
// (memoized) evaluation, then pbest/gbest reduction in particle order.
void step(SwarmState& s, const FitnessFn& fn, const StepOptions& opts,
          std::vector<EvalRecord>* log = nullptr);

// c1, c2 ~ U[0,4], derived from the run seed on an independent stream.
PsoCoefficients sample_coefficients(double w, std::uint64_t run_seed);

struct RunOptions {
  double epsilon = 1e-6;  // gbest stall threshold between consecutive iterations
  bool literal_form = false;
  int threads = 1;
  // redraw c1, c2 ~ U[0,4] before every iteration (from an independent
  // stream keyed on the run seed); the coef argument then supplies w only
  bool resample_coefficients = false;
};

PsoResult run(const SearchBounds& bounds, const PsoCoefficients& coef,
              int pop_size, int max_it, const FitnessFn& fn, std::uint64_t seed,
              const RunOptions& opts = {});

}  // namespace fedpso
