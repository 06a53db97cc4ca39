#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedasm/instance.hpp"
#include "fedasm/random.hpp"

namespace fedasm {

Instance generate_instance(std::size_t num_classes, std::size_t num_federations,
                           std::uint64_t seed, const GeneratorOptions& options) {
  if (num_classes < 1 || num_federations < 1) {
    throw std::invalid_argument("generate_instance needs at least one class and one federation");
  }
  if (!(options.mean_class_size > 0) || options.min_class_size < 1) {
    throw std::invalid_argument("generate_instance: bad size options");
  }
  Rng rng(seed);
  InstanceSpec spec;
  // Each equivalence class signs up for its own leaf assembly.
  for (std::size_t i = 0; i < num_classes; ++i) {
    const std::string leaf = "c" + std::to_string(i);
    spec.nodes.push_back(leaf);
    const double u = rng.uniform01();
    const double draw = -options.mean_class_size * std::log1p(-u);
    const auto size = std::max<std::int64_t>(options.min_class_size, std::llround(draw));
    spec.classes.push_back({{leaf}, size});
  }
  for (std::size_t f = 0; f < num_federations; ++f) {
    const std::string name = "f" + std::to_string(f);
    const std::size_t available = spec.nodes.size();
    const std::size_t lo = std::min<std::size_t>(2, available);
    const std::size_t count = lo + static_cast<std::size_t>(rng.below(available - lo + 1));
    std::vector<std::size_t> pool(available);
    std::iota(pool.begin(), pool.end(), 0);
    partial_shuffle(std::span<std::size_t>(pool), count, rng);
    std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(chosen.begin(), chosen.end());
    for (auto c : chosen) spec.edges.emplace_back(name, spec.nodes[c]);
    spec.nodes.push_back(name);
  }
  return Instance::build(std::move(spec));
}

}  // namespace fedasm
