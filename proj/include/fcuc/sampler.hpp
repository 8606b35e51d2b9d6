#pragma once

// Labelled frequency-response dataset over the (M, D, Rg, Fg) box.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fcuc/sfr.hpp"

namespace fcuc::sampler {

using Feature = std::array<double, 4>;  // M, D, Rg, Fg

struct SampleBox {
  Feature lower{};
  Feature upper{};
  double T = 8.0;
  double dP = 0.08;

  // Throws std::invalid_argument unless lower < upper, M bounds and T positive, dP >= 0.
  void validate() const;
};

[[nodiscard]] std::vector<Feature> boundary_corners(const SampleBox& box);

struct LhsDesign {
  std::vector<Feature> points;
  double min_distance = 0.0;  // in unit-cube coordinates
};

// Best-of-`candidates` maximin Latin hypercube. When `all` is given it
// receives every candidate design in generation order.
[[nodiscard]] LhsDesign lhs(const SampleBox& box, std::size_t n, std::uint64_t seed,
                            std::size_t candidates = 20, std::vector<LhsDesign>* all = nullptr);

[[nodiscard]] double min_pairwise_distance(const std::vector<Feature>& unit_points);

struct FrequencySample {
  Feature x{};
  Feature xn{};
  sfr::Stability stability = sfr::Stability::Unstable;
  bool stable = false;
  double y_nadir = 0.0;         // Hz, set iff stable
  std::vector<double> y_step;   // Hz per checkpoint, set iff stable
};

struct Dataset {
  SampleBox box;
  sfr::StepwiseLimit limit;
  std::uint64_t seed = 0;
  std::size_t lhs_candidates = 20;
  Feature norm{};  // per-feature divisor
  std::vector<FrequencySample> rows;

  [[nodiscard]] std::size_t stable_count() const;
  [[nodiscard]] Feature normalize(const Feature& x) const;
  [[nodiscard]] Feature denormalize(const Feature& xn) const;
};

struct BuildOptions {
  std::size_t lhs_candidates = 20;
  std::size_t min_stable = 100;
};

// n counts the 16 corners plus n - 16 Latin hypercube points.
[[nodiscard]] Dataset build_dataset(const SampleBox& box, std::size_t n, const sfr::StepwiseLimit& lim,
                                    std::uint64_t seed, const BuildOptions& opts = {});

// Labels one point; nullopt unless stable.
struct Labels {
  double y_nadir = 0.0;
  std::vector<double> y_step;
};
[[nodiscard]] std::optional<Labels> label(const Feature& x, const SampleBox& box, const sfr::StepwiseLimit& lim);

[[nodiscard]] std::string to_csv(const Dataset& ds);
// Sidecar JSON text; carries the SHA-256 of the CSV text.
[[nodiscard]] std::string sidecar_json(const Dataset& ds, const std::string& csv);

void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& sidecar_path);
// Verifies the CSV hash against the sidecar; throws ArtifactMismatch on disagreement.
[[nodiscard]] Dataset load_dataset(const std::string& csv_path, const std::string& sidecar_path);
[[nodiscard]] std::string dataset_hash(const std::string& sidecar_path);

// Deterministic split of stable rows into train / held-out by a seeded shuffle.
struct Split {
  std::vector<std::size_t> train, test;
};
[[nodiscard]] Split split_stable(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace fcuc::sampler
