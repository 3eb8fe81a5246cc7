#include "eigenspec/signal_sim.hpp"

#include <cmath>
#include <numbers>

#include "eigenspec/errors.hpp"
#include "eigenspec/rng.hpp"

namespace eigenspec {

void BearingSpec::validate() const {
  if (bpfi_mult <= 0.0 || bpfo_mult <= 0.0 || bsf_mult <= 0.0) {
    throw InvalidArgumentError("bearing '" + designation +
                               "': all frequency multiples must be positive");
  }
  if (bpfi_mult <= bpfo_mult) {
    throw InvalidArgumentError("bearing '" + designation +
                               "': BPFI must exceed BPFO");
  }
}

BearingSpec skf22240() {
  return BearingSpec{"SKF 22240 CCK/W33", 11.103, 7.897, 2.830};
}

void FaultSimParams::validate() const {
  if (decay_beta_hz <= 0.0) {
    throw InvalidArgumentError("decay_beta_hz must be positive");
  }
  if (sample_rate_hz <= 0.0) {
    throw InvalidArgumentError("sample_rate_hz must be positive");
  }
  if (!(resonance_fn_hz < sample_rate_hz / 2.0)) {
    throw InvalidArgumentError("resonance frequency " +
                               std::to_string(resonance_fn_hz) +
                               " Hz is at or above Nyquist");
  }
  if (duration_s <= 0.0) {
    throw InvalidArgumentError("duration_s must be positive");
  }
  if (amplitude_jitter_frac < 0.0 || amplitude_jitter_frac >= 1.0) {
    throw InvalidArgumentError("amplitude_jitter_frac must lie in [0, 1)");
  }
  if (amplitude_mean < 0.0) {
    throw InvalidArgumentError("amplitude_mean must be non-negative");
  }
  if (shaft_speed_rpm <= 0.0) {
    throw InvalidArgumentError("shaft_speed_rpm must be positive");
  }
}

double Signal::power() const {
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

double fault_frequency(const BearingSpec& spec, FaultType fault,
                       double shaft_speed_rpm) {
  if (shaft_speed_rpm <= 0.0) {
    throw InvalidArgumentError("shaft speed must be positive");
  }
  double shaft_hz = shaft_speed_rpm / 60.0;
  switch (fault) {
    case FaultType::InnerRace:
      return spec.bpfi_mult * shaft_hz;
    case FaultType::OuterRace:
      return spec.bpfo_mult * shaft_hz;
    case FaultType::RollingElement:
      // Rolling element impacts hit both races: one impact per half spin.
      return 2.0 * spec.bsf_mult * shaft_hz;
  }
  throw InvalidArgumentError("unknown fault type");
}

Signal simulate_fault_signal(const FaultSimParams& params,
                             const BearingSpec& spec) {
  params.validate();
  spec.validate();

  const double fs = params.sample_rate_hz;
  const double period =
      1.0 / fault_frequency(spec, params.fault_type, params.shaft_speed_rpm);
  const auto n_samples =
      static_cast<std::size_t>(std::floor(params.duration_s * fs));
  if (n_samples == 0) {
    throw InvalidArgumentError("duration too short for even one sample");
  }

  const auto n_impulses =
      static_cast<long>(std::floor(params.duration_s / period));
  const double dt = 1.0 / fs;
  const double omega = 2.0 * std::numbers::pi * params.resonance_fn_hz;
  const double beta = params.decay_beta_hz;

  Rng amplitude_rng(derive_seed(params.rng_seed, "amplitude-jitter"));

  std::vector<double> samples(n_samples, 0.0);
  for (long j = 1; j <= n_impulses; ++j) {
    const double onset = static_cast<double>(j) * period;
    const double amplitude =
        params.amplitude_mean *
        amplitude_rng.uniform(1.0 - params.amplitude_jitter_frac,
                              1.0 + params.amplitude_jitter_frac);
    // First sample strictly after the onset; the burst is zero at t <= jT.
    auto i0 = static_cast<std::size_t>(std::floor(onset * fs)) + 1;
    for (std::size_t i = i0; i < n_samples; ++i) {
      const double tau = static_cast<double>(i) * dt - onset;
      const double envelope = amplitude * std::exp(-beta * tau);
      if (envelope == 0.0) break;  // exp underflowed; the rest adds exact zeros
      samples[i] += envelope * std::sin(omega * tau);
    }
  }

  return Signal{std::move(samples), fs, std::nullopt};
}

Signal add_awgn(const Signal& sig, double snr_db, std::uint64_t rng_seed,
                NoiseReference reference) {
  if (sig.samples.empty()) {
    throw InvalidArgumentError("cannot add noise to an empty signal");
  }
  double reference_power = 1.0;
  if (reference == NoiseReference::Measured) {
    reference_power = sig.power();
    if (reference_power == 0.0) {
      throw DataError("SNR undefined: input signal has zero power");
    }
  }
  const double noise_sd =
      std::sqrt(reference_power / std::pow(10.0, snr_db / 10.0));

  Rng rng(derive_seed(rng_seed, "awgn"));
  Signal out = sig;
  for (double& v : out.samples) v += noise_sd * rng.normal();
  return out;
}

}  // namespace eigenspec
