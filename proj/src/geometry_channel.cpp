#include "pcnc/geometry_channel.hpp"

#include <cmath>

#include "pcnc/linalg.hpp"

namespace pcnc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng substream(std::uint64_t seed, std::uint64_t trial, StreamRole role) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
  const std::uint64_t c = splitmix64(b ^ static_cast<std::uint64_t>(role));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

double wrap_distance(const Point& p, const Point& q, double side) {
  double dx = std::abs(p.x() - q.x());
  double dy = std::abs(p.y() - q.y());
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return std::hypot(dx, dy);
}

double noise_power(double bandwidth, double noise_figure_db) {
  return kBoltzmann * kNoiseTemperature * bandwidth * std::pow(10.0, noise_figure_db / 10.0);
}

double path_loss_db(double distance) {
  if (!(distance > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  return -30.5 - 36.7 * std::log10(distance);
}

std::pair<std::vector<Point>, std::vector<Point>> place_network(const ScenarioConfig& config,
                                                                Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, config.area_side);
  std::vector<Point> aps;
  aps.reserve(config.L);
  long attempts = 0;
  while (static_cast<int>(aps.size()) < config.L) {
    if (attempts++ >= kMaxPlacementAttempts)
      throw PlacementError("place_network: could not place " + std::to_string(config.L) +
                           " APs with spacing " + std::to_string(config.min_ap_spacing) +
                           " m in a " + std::to_string(config.area_side) +
                           " m square (density infeasible)");
    const double x = u(rng);
    const double y = u(rng);
    const Point cand(x, y);
    bool ok = true;
    for (const auto& p : aps) {
      if (wrap_distance(p, cand, config.area_side) < config.min_ap_spacing) {
        ok = false;
        break;
      }
    }
    if (ok) aps.push_back(cand);
  }
  std::vector<Point> ues;
  ues.reserve(config.K);
  for (int k = 0; k < config.K; ++k) {
    const double x = u(rng);
    const double y = u(rng);
    ues.emplace_back(x, y);
  }
  return {std::move(aps), std::move(ues)};
}

RMatrix sample_shadowing(const std::vector<Point>& ue_positions, int num_aps, double side,
                         Rng& rng) {
  const auto K = static_cast<Eigen::Index>(ue_positions.size());
  RMatrix cov(K, K);
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j) {
      const double delta = wrap_distance(ue_positions[i], ue_positions[j], side);
      cov(i, j) = kShadowingStdDb * kShadowingStdDb *
                  std::pow(2.0, -delta / kShadowingDecorrelation);
    }
  cov.diagonal().array() += 1e-9;
  Eigen::LLT<RMatrix> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_shadowing: UE covariance not positive definite");
  const RMatrix lower = llt.matrixL();

  std::normal_distribution<double> nd(0.0, 1.0);
  RMatrix f(K, num_aps);
  RVector z(K);
  for (int l = 0; l < num_aps; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) z(k) = nd(rng);
    f.col(l) = lower * z;
  }
  return f;
}

RMatrix large_scale(const std::vector<Point>& ap_positions,
                    const std::vector<Point>& ue_positions, const RMatrix& shadowing_db,
                    double side) {
  const auto K = static_cast<Eigen::Index>(ue_positions.size());
  const auto L = static_cast<Eigen::Index>(ap_positions.size());
  RMatrix beta(K, L);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index l = 0; l < L; ++l) {
      const double d =
          std::max(kMinLinkDistance, wrap_distance(ue_positions[k], ap_positions[l], side));
      beta(k, l) = std::pow(10.0, (path_loss_db(d) + shadowing_db(k, l)) / 10.0);
    }
  return beta;
}

ChannelGrid sample_channels(const RMatrix& beta, int M, int N, Rng& rng) {
  ChannelGrid g(beta.rows(), beta.cols());
  for (Eigen::Index k = 0; k < beta.rows(); ++k)
    for (Eigen::Index l = 0; l < beta.cols(); ++l)
      g(k, l) = std::sqrt(beta(k, l)) * complex_gaussian(N, M, rng);
  return g;
}

NetworkRealization realize(const ScenarioConfig& config, std::uint64_t trial) {
  NetworkRealization net;
  Rng pos = substream(config.seed, trial, StreamRole::Positions);
  Rng shadow = substream(config.seed, trial, StreamRole::Shadowing);
  Rng fading = substream(config.seed, trial, StreamRole::Fading);

  auto [aps, ues] = place_network(config, pos);
  net.ap_positions = std::move(aps);
  net.ue_positions = std::move(ues);
  const RMatrix f = sample_shadowing(net.ue_positions, config.L, config.area_side, shadow);
  net.beta = large_scale(net.ap_positions, net.ue_positions, f, config.area_side);
  net.channels = sample_channels(net.beta, config.M, config.N, fading);
  net.rho = config.tx_power / noise_power(config.bandwidth, config.noise_figure_db);
  net.area_side = config.area_side;
  return net;
}

}  // namespace pcnc
