#include "nolm/source_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace nolm::source {
namespace {

using quantum::PolarizationKet;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

const Eigen::Vector2cd kLeadingPol = Eigen::Vector2cd(1.0, 1.0) / std::numbers::sqrt2;
const Eigen::Vector2cd kTrailingPol =
    Eigen::Vector2cd(1.0, std::complex<double>(0.0, 1.0)) / std::numbers::sqrt2;

bool same_up_to_phase(const PolarizationKet& k, const Eigen::Vector2cd& ref) {
  return k.dim() == 2 && std::abs(std::abs(ref.dot(k.amplitudes())) - 1.0) < 1e-9;
}

// cos(t)|HH> + sign sin(t)|VV> with sin(2t) = sqrt(tangle).
PolarizationKet branch_state(double tangle, double sign) {
  const double theta = 0.5 * std::asin(std::sqrt(tangle));
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(0) = std::cos(theta);
  v(3) = sign * std::sin(theta);
  return PolarizationKet(v);
}

}  // namespace

void SourceConfig::validate() const {
  require(pump_fwhm_ps > 0.0, "source.pump_fwhm_ps must be positive");
  require(rep_rate_mhz > 0.0, "source.rep_rate_mhz must be positive");
  require(pair_prob_per_pulse >= 0.0 && pair_prob_per_pulse < 0.1,
          "source.pair_prob_per_pulse must lie in [0, 0.1)");
  require(delta_t_ps >= 1.0, "source.delta_t_ps must be at least 1 ps");
  require(c1_over_c2 > 0.0 && std::isfinite(c1_over_c2), "source.c1_over_c2 must be positive");
  require(pair_tangle > 0.0 && pair_tangle <= 1.0, "source.pair_tangle must lie in (0, 1]");
  require(pair_white_noise >= 0.0 && pair_white_noise <= 1.0,
          "source.pair_white_noise must lie in [0, 1]");
  require(grid_step_ps > 0.0 && grid_step_ps <= pump_fwhm_ps / 10.0,
          "source.grid_step_ps must be positive and resolve the pump");
}

const char* to_string(SpatialMode m) { return m == SpatialMode::T ? "T" : "R"; }

MultiplexedStream::MultiplexedStream(std::vector<EntangledChannel> channels)
    : channels_(std::move(channels)) {
  require(!channels_.empty(), "MultiplexedStream: no channels");
  double total = 0.0;
  for (const auto& c : channels_) {
    require(c.weight >= 0.0, "MultiplexedStream: negative weight");
    require(c.pol_state.dim() == 4, "MultiplexedStream: channel state must be two-qubit");
    require(c.temporal_profile.area() > 0.0, "MultiplexedStream: profile needs positive area");
    total += c.weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, "MultiplexedStream: weights must sum to 1");
  for (std::size_t a = 0; a < channels_.size(); ++a) {
    for (std::size_t b = a + 1; b < channels_.size(); ++b) {
      if (channels_[a].spatial_mode != channels_[b].spatial_mode) continue;
      require(std::abs(channels_[a].t_center_ps - channels_[b].t_center_ps) >= 1.0,
              "MultiplexedStream: time bins in one mode must be at least 1 ps apart");
    }
  }
}

double MultiplexedStream::weight_in(SpatialMode mode) const {
  double w = 0.0;
  for (const auto& c : channels_) {
    if (c.spatial_mode == mode) w += c.weight;
  }
  return w;
}

double MultiplexedStream::total_weight() const {
  return weight_in(SpatialMode::T) + weight_in(SpatialMode::R);
}

std::vector<PumpChannel> michelson_pump(const SourceConfig& config, MichelsonArms arms) {
  config.validate();
  const double r = config.c1_over_c2;
  const double c1 = r / std::sqrt(1.0 + r * r);
  const double c2 = 1.0 / std::sqrt(1.0 + r * r);
  std::vector<PumpChannel> out(2);
  out[0].t_center_ps = config.t0_ps;
  out[0].amplitude = arms == MichelsonArms::SecondOnly ? 0.0 : std::sqrt(c1);
  out[0].jones = PolarizationKet(kLeadingPol);
  out[1].t_center_ps = config.t0_ps + config.delta_t_ps;
  out[1].amplitude = arms == MichelsonArms::FirstOnly ? 0.0 : std::sqrt(c2);
  out[1].jones = PolarizationKet(kTrailingPol);
  return out;
}

SampledProfile temporal_pair_density(const SampledProfile& pump_intensity) {
  for (double v : pump_intensity.values) require(v >= 0.0, "temporal_pair_density: negative intensity");
  require(pump_intensity.area() > 0.0, "temporal_pair_density: zero-area input");
  return powered(pump_intensity, 2);
}

MultiplexedStream sfwm_channels(const std::vector<PumpChannel>& pump, const SourceConfig& config) {
  config.validate();
  require(pump.size() == 2, "sfwm_channels: expects the two Michelson pump channels");
  std::vector<EntangledChannel> channels;
  double total = 0.0;
  for (std::size_t k = 0; k < pump.size(); ++k) {
    const auto& p = pump[k];
    require(p.amplitude >= 0.0, "sfwm_channels: negative pump amplitude");
    double sign = 0.0;
    if (same_up_to_phase(p.jones, kLeadingPol)) {
      sign = 1.0;
    } else if (same_up_to_phase(p.jones, kTrailingPol)) {
      sign = -1.0;
    } else {
      throw std::invalid_argument("sfwm_channels: unsupported pump polarization");
    }
    // Pair amplitude scales with the square of the pump amplitude.
    const double weight = std::pow(p.amplitude, 4);
    if (weight == 0.0) continue;
    EntangledChannel c;
    c.t_center_ps = p.t_center_ps;
    c.weight = weight;
    c.pol_state = branch_state(config.pair_tangle, sign);
    const auto pump_shape = gaussian_profile(p.t_center_ps, config.pump_fwhm_ps,
                                             config.grid_step_ps, 3.0 * config.pump_fwhm_ps);
    c.temporal_profile = temporal_pair_density(pump_shape);
    c.spatial_mode = SpatialMode::T;
    channels.push_back(std::move(c));
    total += weight;
  }
  require(total > 0.0, "sfwm_channels: all pump arms blocked");
  for (auto& c : channels) c.weight /= total;
  return MultiplexedStream(std::move(channels));
}

double window_overlap(const SampledProfile& profile, const SampledProfile& window) {
  const double peak = profile.max();
  double acc = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double v = profile.values[i];
    if (v <= 1e-12 * peak) continue;
    const double t = profile.time(i);
    if (!window.covers(t)) {
      throw std::invalid_argument("demultiplex: window grid does not cover a channel's support");
    }
    acc += v * window.at(t);
    norm += v;
  }
  return acc / norm;
}

MultiplexedStream demultiplex(const MultiplexedStream& stream, const SampledProfile& window) {
  std::vector<EntangledChannel> out;
  for (const auto& c : stream.channels()) {
    const double p = std::clamp(window_overlap(c.temporal_profile, window), 0.0, 1.0);
    EntangledChannel through = c;
    through.spatial_mode = SpatialMode::T;
    through.weight = c.weight * p;
    EntangledChannel reflected = c;
    reflected.spatial_mode = SpatialMode::R;
    reflected.weight = c.weight * (1.0 - p);
    if (through.weight > 0.0) out.push_back(std::move(through));
    if (reflected.weight > 0.0) out.push_back(std::move(reflected));
  }
  return MultiplexedStream(std::move(out));
}

quantum::DensityMatrix project_and_trace(const MultiplexedStream& stream, SpatialMode mode) {
  std::vector<double> weights;
  std::vector<quantum::DensityMatrix> states;
  for (const auto& c : stream.channels()) {
    if (c.spatial_mode != mode || c.weight <= 0.0) continue;
    weights.push_back(c.weight);
    states.push_back(quantum::DensityMatrix::pure(c.pol_state));
  }
  if (weights.empty()) throw std::invalid_argument("project_and_trace: zero weight in mode");
  return quantum::DensityMatrix::mixture(weights, states);
}

quantum::DensityMatrix apply_source_imperfection(const quantum::DensityMatrix& rho,
                                                 const SourceConfig& config) {
  return quantum::depolarize(rho, config.pair_white_noise);
}

}  // namespace nolm::source
