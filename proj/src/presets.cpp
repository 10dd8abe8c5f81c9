#include "blockprobe/presets.hpp"

namespace blockprobe {

namespace {

// Roles from least to most important. Inert: near-zero coefficient. Noisy
// and f/n roles add variance without carrying noise signal; g roles carry it.
constexpr BlockSpec kInert{0.005, 0.5, 0.0, 0.5};
constexpr BlockSpec kNoisy{0.25, 0.0, 0.0, 1.0};
constexpr BlockSpec kSignal{0.3, 0.6, 0.0, 0.4};
constexpr BlockSpec kNoiseLow{0.35, 0.0, 1.0, 0.0};
constexpr BlockSpec kNoiseMid{0.4, 0.0, 1.0, 0.0};
constexpr BlockSpec kNoiseHigh{0.45, 0.0, 1.0, 0.0};
constexpr BlockSpec kDominant{1.2, 0.0, 1.0, 0.0};

struct Planted {
  std::vector<BlockSpec> roles;
  std::vector<std::vector<std::size_t>> order;
};

const Planted& planted_2x7() {
  static const Planted p{
      {kInert, kNoisy, kSignal, kNoiseLow, kNoiseMid, kNoiseHigh, kDominant},
      {{0, 1, 2, 4, 6, 5, 3}, {1, 0, 5, 4, 2, 6, 3}}};
  return p;
}

const Planted& planted_2x5() {
  static const Planted p{{kInert, kNoisy, kSignal, kNoiseMid, kDominant},
                         {{0, 1, 4, 2, 3}, {0, 1, 4, 3, 2}}};
  return p;
}

SurrogateModel build_planted(const Planted& p) {
  const std::size_t n = p.order.size();
  const std::size_t m = p.roles.size();
  Grid<BlockSpec> specs(n, m);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t rank = 0; rank < m; ++rank) specs(t, p.order[t][rank]) = p.roles[rank];
  }
  return SurrogateModel(std::move(specs), kDefaultDim, Regime::independent);
}

PlantedTruth truth_of(const Planted& p) {
  PlantedTruth out;
  out.order = p.order;
  for (const auto& o : p.order) {
    out.least_important.push_back(o.front());
    out.most_important.push_back(o.back());
  }
  return out;
}

SurrogateModel build_uniform(const BlockSpec& spec, std::size_t steps, std::size_t blocks,
                             Regime regime = Regime::independent) {
  return SurrogateModel(Grid<BlockSpec>(steps, blocks, spec), kDefaultDim, regime);
}

SurrogateModel build_shared_noise() {
  // Per step, sum_i A_i sqrt(var_g_i) = 1.
  const std::vector<std::vector<BlockSpec>> rows{
      {{0.4, 0.1, 1.0, 0.2}, {0.3, 0.05, 1.0, 0.1}, {0.2, 0.0, 1.0, 0.3}, {0.1, 0.2, 1.0, 0.05}},
      {{0.5, 0.0, 1.0, 0.1}, {0.25, 0.1, 1.0, 0.2}, {0.15, 0.3, 1.0, 0.0}, {0.1, 0.0, 1.0, 0.4}},
  };
  Grid<BlockSpec> specs(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t i = 0; i < rows[t].size(); ++i) specs(t, i) = rows[t][i];
  }
  return SurrogateModel(std::move(specs), kDefaultDim, Regime::shared_noise);
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"planted-2x7", "planted-2x5", "uniform",
                                              "zero-variance", "shared-noise"};
  return names;
}

SurrogateModel make_preset(const std::string& name) {
  if (name == "planted-2x7") return build_planted(planted_2x7());
  if (name == "planted-2x5") return build_planted(planted_2x5());
  if (name == "uniform") return build_uniform({0.3, 0.2, 1.0, 0.2}, 2, 7);
  if (name == "zero-variance") return build_uniform({0.5, 0.0, 0.0, 0.0}, 2, 7);
  if (name == "shared-noise") return build_shared_noise();
  throw ConfigError("unknown model preset: " + name);
}

std::optional<PlantedTruth> planted_truth(const std::string& name) {
  if (name == "planted-2x7") return truth_of(planted_2x7());
  if (name == "planted-2x5") return truth_of(planted_2x5());
  return std::nullopt;
}

SurrogateModel random_independent_model(Rng& rng, std::size_t steps, std::size_t blocks,
                                        std::size_t dim) {
  std::uniform_real_distribution<double> coeff(0.2, 1.5);
  std::uniform_real_distribution<double> var(0.05, 2.0);
  Grid<BlockSpec> specs(steps, blocks);
  for (std::size_t t = 0; t < steps; ++t) {
    for (BlockSpec& s : specs.row(t)) {
      s.a_coeff = coeff(rng);
      s.var_f = var(rng);
      s.var_g = var(rng);
      s.var_n = var(rng);
    }
  }
  return SurrogateModel(std::move(specs), dim, Regime::independent);
}

}  // namespace blockprobe
