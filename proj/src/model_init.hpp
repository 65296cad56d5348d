#pragma once

#include <string>
#include <vector>

#include "medsr/prng.hpp"
#include "medsr/tensor.hpp"

namespace medsr::models::detail {

inline Tensor normal_tensor(Prng& rng, std::vector<int> dims, double stddev) {
  Tensor t(std::move(dims));
  for (auto& v : t.data()) v = static_cast<float>(rng.normal() * stddev);
  return t;
}

/// Adds name.weight [cout, cin, k, k] ~ N(0, stddev^2) and a zero bias. With
/// `passthrough`, output channel 0 also copies input channel 0.
inline void add_conv(ModelWeights& w, Prng& rng, const std::string& name, int cout, int cin, int k, double stddev,
                     bool passthrough) {
  Tensor weight = normal_tensor(rng, {cout, cin, k, k}, stddev);
  if (passthrough) weight[static_cast<std::size_t>(k / 2) * k + k / 2] += 1.0f;
  w.add(name + ".weight", std::move(weight));
  w.add(name + ".bias", Tensor({cout}));
}

}  // namespace medsr::models::detail
