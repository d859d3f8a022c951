#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pcnc/config.hpp"
#include "pcnc/types.hpp"

namespace pcnc {

inline constexpr double kBoltzmann = 1.381e-23;
inline constexpr double kNoiseTemperature = 290.0;
inline constexpr double kShadowingStdDb = 4.0;
inline constexpr double kShadowingDecorrelation = 9.0;  // meters
inline constexpr double kMinLinkDistance = 1.0;         // meters
inline constexpr long kMaxPlacementAttempts = 1'000'000;

/// Independent random substreams of one trial.
enum class StreamRole : std::uint64_t {
  Positions = 1,
  Shadowing = 2,
  Fading = 3,
  SolverInit = 4,
  Allocation = 5,
  Example = 6,
};

/// Generator for substream (seed, trial, role). Any trial is reproducible in isolation.
Rng substream(std::uint64_t seed, std::uint64_t trial, StreamRole role);

struct NetworkRealization {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  RMatrix beta;          // K x L, linear
  ChannelGrid channels;  // K x L grid of N x M
  double rho = 0.0;      // tx_power / noise_power
  double area_side = 0.0;

  int num_aps() const { return static_cast<int>(ap_positions.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }
};

/// Toroidal distance on the [0, side)^2 square.
double wrap_distance(const Point& p, const Point& q, double side);

/// k_B * T0 * B * 10^(F/10), in watts.
double noise_power(double bandwidth, double noise_figure_db);

/// -30.5 - 36.7 log10(d / 1 m). Throws std::domain_error for d <= 0.
double path_loss_db(double distance);

/// APs by rejection sampling with toroidal min spacing, UEs uniform.
/// Throws PlacementError after kMaxPlacementAttempts rejected draws.
std::pair<std::vector<Point>, std::vector<Point>> place_network(const ScenarioConfig& config,
                                                                Rng& rng);

/// K x L shadowing in dB; each AP column is N(0, 16 * 2^(-delta/9)) across UEs.
RMatrix sample_shadowing(const std::vector<Point>& ue_positions, int num_aps, double side,
                         Rng& rng);

/// beta_kl = 10^((PL(max(d_kl, 1 m)) + F_kl) / 10).
RMatrix large_scale(const std::vector<Point>& ap_positions,
                    const std::vector<Point>& ue_positions, const RMatrix& shadowing_db,
                    double side);

/// G_kl = sqrt(beta_kl) * G~_kl with G~ i.i.d. CN(0, 1).
ChannelGrid sample_channels(const RMatrix& beta, int M, int N, Rng& rng);

/// Full realization for trial `trial` of `config`.
NetworkRealization realize(const ScenarioConfig& config, std::uint64_t trial);

}  // namespace pcnc
