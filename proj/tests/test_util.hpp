#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shapeboost/error.hpp"
#include "shapeboost/model.hpp"

namespace testutil {

inline shapeboost::LabeledInstance instance(std::vector<double> values, int label = 1,
                                            std::string id = {}) {
  return {{std::move(values), std::move(id)}, label};
}

inline std::vector<shapeboost::LabeledInstance> random_instances(
    std::size_t m, std::size_t length, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<shapeboost::LabeledInstance> out;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> v(length);
    for (double& x : v) x = normal(rng);
    out.push_back(instance(std::move(v), i % 2 == 0 ? 1 : -1));
  }
  return out;
}

inline shapeboost::Sample full_sample(
    const std::vector<shapeboost::LabeledInstance>& instances) {
  shapeboost::Sample s;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    s.instances.push_back(i);
    s.labels.push_back(instances[i].label);
  }
  return s;
}

}  // namespace testutil

namespace testutil {

// Error code raised by fn, or nullopt when it returns normally.
template <typename Fn>
std::optional<shapeboost::ErrorCode> error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const shapeboost::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testutil
