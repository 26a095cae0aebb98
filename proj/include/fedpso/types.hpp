#pragma once

#include <limits>
#include <string>

namespace fedpso {

enum class Task { kRegression, kClassification };
enum class Direction { kMaximize, kMinimize };

// The hyperparameter triple under search: hidden layer count, neurons per
// layer, and local epochs per communication round.
struct ModelConfig {
  int layers = 1;
  int neurons = 1;
  int epochs = 1;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// strict weak order for map keys
struct ConfigLess {
  bool operator()(const ModelConfig& a, const ModelConfig& b) const {
    if (a.layers != b.layers) return a.layers < b.layers;
    if (a.neurons != b.neurons) return a.neurons < b.neurons;
    return a.epochs < b.epochs;
  }
};

// Search metric. Accuracy is maximized, RMSE minimized; comparisons go
// through better_than so callers never branch on direction.
struct Fitness {
  double value = 0.0;
  Direction direction = Direction::kMaximize;

  bool better_than(const Fitness& other) const {
    return direction == Direction::kMaximize ? value > other.value
                                             : value < other.value;
  }

  static Fitness worst(Direction d) {
    const double inf = std::numeric_limits<double>::infinity();
    return {d == Direction::kMaximize ? -inf : inf, d};
  }
};

inline std::string to_string(const ModelConfig& c) {
  return "(L=" + std::to_string(c.layers) + ", N=" + std::to_string(c.neurons) +
         ", E=" + std::to_string(c.epochs) + ")";
}

}  // namespace fedpso
